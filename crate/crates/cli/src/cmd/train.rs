//! `train`: fit a network (data-only or physics-blended) and write its
//! epoch trace, summary, checkpoint, and blending-weight histogram.

use serde::{Deserialize, Serialize};

use adaptive_pinn::blend::{BlendingNeuron, PhysicsInput};
use adaptive_pinn::error::{Error, Result};
use adaptive_pinn::mlp::{Activation, ArchSpec, Mlp};
use adaptive_pinn::model::{standardized_parts, surrogate_problem};
use adaptive_pinn::pde::{sample_collocation, PdeProblem, SamplingScheme};
use adaptive_pinn::seed::sub_seed;
use adaptive_pinn::stats::lambda_histogram;
use adaptive_pinn::train::{train, Schedule, TrainConfig, TrainMode, TrainReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::common::{
    atomic_write_str, atomic_write_with, config_has_seed, resolve_seed, resolved_from_config,
    write_json_pretty, Ctx, DataArgs, DataSource,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    #[command(flatten)]
    data: DataArgs,
    /// Network architecture, e.g. 2-[16,16]-1 (default: inputs-[16,16]-1)
    #[arg(long)]
    arch: Option<String>,
    /// Training mode: data, pinn, or pinn-alternate
    #[arg(long)]
    mode: Option<String>,
    /// Residual problem: conduction1d, conduction-vark1d, or convdiff1d
    #[arg(long)]
    problem: Option<String>,
    /// Adam learning rate
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Maximum training epochs
    #[arg(long)]
    epochs: Option<usize>,
    /// Early-stopping patience (epochs without validation improvement)
    #[arg(long)]
    patience: Option<usize>,
    /// Fraction of rows held out for validation
    #[arg(long)]
    val_fraction: Option<f64>,
    /// Learning-rate schedule: constant or step
    #[arg(long)]
    schedule: Option<String>,
    /// Multiplier applied at each step-decay interval
    #[arg(long)]
    decay_factor: Option<f64>,
    /// Epochs between step decays
    #[arg(long)]
    decay_every: Option<usize>,
    /// Number of residual collocation points
    #[arg(long)]
    collocation: Option<usize>,
    /// Initial blending pre-activation (0 = balanced data/physics weights)
    #[arg(long)]
    alpha0: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default)]
struct Resolved {
    command: String,
    seed: u64,
    #[serde(flatten)]
    data: DataSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    arch: Option<String>,
    mode: String,
    problem: String,
    learning_rate: f64,
    epochs: usize,
    patience: usize,
    val_fraction: f64,
    schedule: String,
    decay_factor: f64,
    decay_every: usize,
    collocation: usize,
    alpha0: f64,
    /// Architecture fragments as emitted by `hyperopt`; folded into `arch`.
    #[serde(skip_serializing_if = "Option::is_none")]
    hidden: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hidden_width: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_layers: Option<usize>,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            command: "train".into(),
            seed: 0,
            data: DataSource::default(),
            arch: None,
            mode: "pinn".into(),
            problem: "convdiff1d".into(),
            learning_rate: 0.02,
            epochs: 500,
            patience: 100,
            val_fraction: 0.2,
            schedule: "constant".into(),
            decay_factor: 0.5,
            decay_every: 200,
            collocation: 32,
            alpha0: 0.0,
            hidden: None,
            hidden_width: None,
            n_layers: None,
        }
    }
}

pub fn parse_mode(name: &str) -> Result<TrainMode> {
    match name {
        "data" => Ok(TrainMode::DataOnly),
        "pinn" => Ok(TrainMode::Pinn),
        "pinn-alternate" => Ok(TrainMode::PinnAlternate),
        other => Err(Error::InvalidConfig(format!(
            "unknown mode `{other}` (expected data, pinn, or pinn-alternate)"
        ))),
    }
}

fn base_problem(name: &str, peclet: f64, seed: u64) -> Result<PdeProblem> {
    Ok(match name {
        "conduction1d" => PdeProblem::conduction1d(seed),
        "conduction-vark1d" => PdeProblem::conduction_vark1d(seed),
        "convdiff1d" => PdeProblem::convdiff1d(peclet, seed),
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown problem `{other}` (expected conduction1d, conduction-vark1d, or \
                 convdiff1d)"
            )))
        }
    })
}

/// Final architecture: an explicit arch string must match the data's feature
/// count; `hidden`/`hidden_width`/`n_layers` fragments (as written by
/// `hyperopt`) replace the hidden layers.
fn resolve_arch(r: &Resolved, n_features: usize) -> Result<ArchSpec> {
    let base_hidden = match &r.arch {
        Some(s) => {
            let spec: ArchSpec = s.parse()?;
            if spec.n_inputs != n_features {
                return Err(Error::InvalidConfig(format!(
                    "architecture `{s}` expects {} inputs but the dataset has {} features",
                    spec.n_inputs, n_features
                )));
            }
            if spec.n_outputs != 1 {
                return Err(Error::InvalidConfig(format!(
                    "architecture `{s}` must have exactly 1 output"
                )));
            }
            spec.hidden
        }
        None => vec![16, 16],
    };
    let hidden = if let Some(h) = &r.hidden {
        h.clone()
    } else if r.hidden_width.is_some() || r.n_layers.is_some() {
        let width = r.hidden_width.unwrap_or(16);
        let layers = r.n_layers.unwrap_or(2);
        vec![width; layers]
    } else {
        base_hidden
    };
    ArchSpec::new(n_features, hidden, 1)
}

/// Writes the per-epoch blending-weight histogram (20 bins over [0, 1]).
pub fn write_lambda_hist(report: &TrainReport, path: &std::path::Path) -> Result<()> {
    let hist = lambda_histogram(&report.lambda_trace(), 20)?;
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (i, &count) in hist.counts.iter().enumerate() {
        out.push_str(&format!(
            "{:?},{:?},{}\n",
            hist.edges[i],
            hist.edges[i + 1],
            count
        ));
    }
    atomic_write_str(path, &out)
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<()> {
    let mut r: Resolved = resolved_from_config(&ctx.config, "train")?;
    r.seed = resolve_seed(ctx.seed_flag, r.seed, config_has_seed(&ctx.config));
    r.data = args.data.overlay(r.data);
    if let Some(a) = &args.arch {
        // An explicit flag overrides config-file architecture fragments too.
        r.arch = Some(a.clone());
        r.hidden = None;
        r.hidden_width = None;
        r.n_layers = None;
    }
    if let Some(m) = &args.mode {
        r.mode = m.clone();
    }
    if let Some(p) = &args.problem {
        r.problem = p.clone();
    }
    if let Some(x) = args.learning_rate {
        r.learning_rate = x;
    }
    if let Some(n) = args.epochs {
        r.epochs = n;
    }
    if let Some(n) = args.patience {
        r.patience = n;
    }
    if let Some(x) = args.val_fraction {
        r.val_fraction = x;
    }
    if let Some(s) = &args.schedule {
        r.schedule = s.clone();
    }
    if let Some(x) = args.decay_factor {
        r.decay_factor = x;
    }
    if let Some(n) = args.decay_every {
        r.decay_every = n;
    }
    if let Some(n) = args.collocation {
        r.collocation = n;
    }
    if let Some(x) = args.alpha0 {
        r.alpha0 = x;
    }

    let mode = parse_mode(&r.mode)?;
    let schedule = match r.schedule.as_str() {
        "constant" => Schedule::Constant,
        "step" => Schedule::StepDecay {
            factor: r.decay_factor,
            every: r.decay_every,
        },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown schedule `{other}` (expected constant or step)"
            )))
        }
    };

    let ds = r.data.load(r.seed)?;
    let n_features = ds.n_features();
    let arch = resolve_arch(&r, n_features)?;
    // The resolved file pins the concrete architecture, so fragments from a
    // search result collapse to one canonical form.
    r.arch = Some(arch.to_string());
    r.hidden = None;
    r.hidden_width = None;
    r.n_layers = None;
    write_json_pretty(&ctx.path("config-resolved.json"), &r)?;

    // Multi-feature data trains in standardized feature/target space (the
    // checkpoint lives there too); a single feature trains on raw values.
    let train_ds = if n_features > 1 {
        standardized_parts(&ds)?.0
    } else {
        ds.clone()
    };

    let pinn = mode != TrainMode::DataOnly;
    let mut physics_input = None;
    let prob = if !pinn {
        None
    } else if n_features == 1 {
        // The network input is the physical coordinate: residual on the
        // preset domain, fresh collocation draw, boundaries enforced.
        let mut p = base_problem(&r.problem, r.data.peclet, sub_seed(r.seed, "physics"))?;
        if r.data.data.is_none() && r.data.synth == "convdiff" {
            // The convdiff generator offsets targets by +1 to keep relative
            // errors defined; the boundary values shift with them.
            p.boundary = (1.0, 2.0);
        }
        p.collocation = sample_collocation(
            p.domain,
            r.collocation,
            SamplingScheme::UniformRandom,
            sub_seed(r.seed, "colloc"),
        )?;
        p.validate()?;
        Some(p)
    } else {
        // Physics as a smoothness prior along standardized feature axis 0:
        // residual only, no boundary term, remaining inputs held at 0.
        let axis: Vec<f64> = train_ds.features.iter().map(|row| row[0]).collect();
        let lo = axis.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = axis.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        physics_input = Some(PhysicsInput {
            dim: 0,
            fill: vec![0.0; n_features],
        });
        let physics_seed = sub_seed(r.seed, "physics");
        let p = match r.problem.as_str() {
            "convdiff1d" => surrogate_problem((lo, hi), r.data.peclet, r.collocation, physics_seed)?,
            name => {
                let base = base_problem(name, r.data.peclet, physics_seed)?;
                let collocation = sample_collocation(
                    (lo, hi),
                    r.collocation,
                    SamplingScheme::UniformRandom,
                    sub_seed(physics_seed, "colloc"),
                )?;
                let p = PdeProblem {
                    domain: (lo, hi),
                    collocation,
                    boundary_weight: 0.0,
                    ..base
                };
                p.validate()?;
                p
            }
        };
        Some(p)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(r.seed, "init"));
    let net = Mlp::init(arch, Activation::Tanh, &mut rng);
    let cfg = TrainConfig {
        learning_rate: r.learning_rate,
        max_epochs: r.epochs,
        schedule,
        early_stop_patience: r.patience,
        val_fraction: r.val_fraction,
        seed: sub_seed(r.seed, "train"),
        mode,
        physics_input,
        ..TrainConfig::default()
    };
    let neuron = pinn
        .then(|| BlendingNeuron::new(r.alpha0))
        .transpose()?;
    let (fitted, _neuron, report) = train(&net, neuron, &train_ds, prob.as_ref(), &cfg)?;

    atomic_write_with(&ctx.path("train_epochs.csv"), |tmp| report.write_csv(tmp))?;
    atomic_write_with(&ctx.path("train_summary.json"), |tmp| {
        report.write_json_summary(tmp)
    })?;
    atomic_write_with(&ctx.path("model.json"), |tmp| fitted.save_checkpoint(tmp))?;
    if pinn {
        write_lambda_hist(&report, &ctx.path("lambda_p_hist.csv"))?;
    }
    println!(
        "trained {} ({} mode) for {} epochs; best val MAPE {:.5} at epoch {}",
        r.arch.as_deref().unwrap_or("?"),
        r.mode,
        report.final_epoch,
        report.best_val_mape,
        report.best_epoch
    );
    Ok(())
}
