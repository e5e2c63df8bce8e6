//! `mc-validate`: Monte Carlo robustness study. Each trial retrains a model
//! on a fresh random subset and predicts at a fixed holdout set; the report
//! compares the three network variants (transfer, plain, physics-blended) on
//! prediction variance, error variance, and training length.

use serde::{Deserialize, Serialize};

use adaptive_pinn::data::{synthesize, SynthSpec};
use adaptive_pinn::error::{Error, Result};
use adaptive_pinn::model::{
    fit_model, fit_plain_net, ModelKind, ModelSpec, NetSettings, PinnSettings, TlSettings,
};
use adaptive_pinn::seed::sub_seed;
use adaptive_pinn::stats::{monte_carlo_cv, RobustnessReport};

use crate::common::{
    atomic_write_str, config_has_seed, resolve_seed, resolved_from_config, write_json_pretty,
    Ctx, DataArgs, DataSource,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Retraining trials per model
    #[arg(long)]
    trials: Option<usize>,
    /// Fraction of rows fixed as the prediction holdout
    #[arg(long)]
    holdout: Option<f64>,
    /// Fraction of the remaining pool resampled for each trial
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Effort preset: full or quick
    #[arg(long)]
    preset: Option<String>,
    #[command(flatten)]
    data: DataArgs,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default)]
struct Resolved {
    command: String,
    seed: u64,
    trials: usize,
    holdout: f64,
    train_fraction: f64,
    preset: String,
    #[serde(flatten)]
    data: DataSource,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            command: "mc-validate".into(),
            seed: 0,
            trials: 100,
            holdout: 0.2,
            train_fraction: 0.8,
            preset: "full".into(),
            data: DataSource::default(),
        }
    }
}

fn preset_net(name: &str) -> Result<NetSettings> {
    Ok(match name {
        "full" => NetSettings {
            hidden: vec![16, 16],
            learning_rate: 0.02,
            max_epochs: 300,
            patience: 60,
            val_fraction: 0.2,
        },
        "quick" => NetSettings {
            hidden: vec![6],
            learning_rate: 0.05,
            max_epochs: 50,
            patience: 20,
            val_fraction: 0.2,
        },
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset `{other}` (expected full or quick)"
            )))
        }
    })
}

struct ModelRow {
    kind: ModelKind,
    report: RobustnessReport,
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<()> {
    let mut r: Resolved = resolved_from_config(&ctx.config, "mc-validate")?;
    r.seed = resolve_seed(ctx.seed_flag, r.seed, config_has_seed(&ctx.config));
    r.data = args.data.overlay(r.data);
    if let Some(n) = args.trials {
        r.trials = n;
    }
    if let Some(x) = args.holdout {
        r.holdout = x;
    }
    if let Some(x) = args.train_fraction {
        r.train_fraction = x;
    }
    if let Some(p) = &args.preset {
        r.preset = p.clone();
    }
    let net = preset_net(&r.preset)?;
    write_json_pretty(&ctx.path("config-resolved.json"), &r)?;

    let ds = r.data.load(r.seed)?;

    // The transfer variant warm-starts from a source-domain model trained
    // once up front; the study then measures only target-side variation.
    let n_colloc = if r.preset == "quick" { 10 } else { 24 };
    let source_ds = synthesize(&SynthSpec::water(
        60,
        r.data.noise,
        sub_seed(r.seed, "mc-source-data"),
    ))?;
    let source = fit_plain_net(&source_ds, &net, sub_seed(r.seed, "mc-source"))?.net;

    let specs = [
        (
            ModelKind::TlNn,
            ModelSpec::TlNn {
                settings: TlSettings {
                    net: net.clone(),
                    ..TlSettings::default()
                },
                source,
            },
        ),
        (ModelKind::Nn, ModelSpec::Nn(net.clone())),
        (
            ModelKind::Pinn,
            ModelSpec::Pinn(PinnSettings {
                net: net.clone(),
                n_collocation: n_colloc,
                ..PinnSettings::default()
            }),
        ),
    ];

    let mut rows = Vec::new();
    for (kind, spec) in &specs {
        let study_seed = sub_seed(r.seed, &format!("mc-{}", kind.slug()));
        let report = monte_carlo_cv(
            &ds,
            r.trials,
            r.holdout,
            r.train_fraction,
            study_seed,
            |train_ds, trial_seed| fit_model(spec, train_ds, trial_seed),
        )?;
        rows.push(ModelRow {
            kind: *kind,
            report,
        });
    }

    let mut out = String::from(
        "# max_var_pred: across-trial variance of the prediction at each fixed holdout point, \
         maximum over points\n",
    );
    out.push_str("model,max_var_pred,max_var_mape,avg_epochs,trials,failed\n");
    for row in &rows {
        out.push_str(&format!(
            "{},{:?},{:?},{:?},{},{}\n",
            row.kind.label(),
            row.report.max_pred_variance,
            row.report.mape_variance,
            row.report.avg_epochs,
            row.report.trials,
            row.report.failed_trials
        ));
    }
    atomic_write_str(&ctx.path("robustness.csv"), &out)?;

    for row in &rows {
        println!(
            "{:<8} max prediction variance {:.6}, MAPE variance {:.6}, avg epochs {:.1} \
             ({} trials, {} failed)",
            row.kind.label(),
            row.report.max_pred_variance,
            row.report.mape_variance,
            row.report.avg_epochs,
            row.report.trials,
            row.report.failed_trials
        );
    }
    let nn = rows.iter().find(|r| r.kind == ModelKind::Nn);
    let pinn = rows.iter().find(|r| r.kind == ModelKind::Pinn);
    if let (Some(nn), Some(pinn)) = (nn, pinn) {
        if pinn.report.max_pred_variance >= nn.report.max_pred_variance {
            eprintln!(
                "warning: physics blending did not reduce prediction variance here \
                 (PINN {:.6} >= NN {:.6})",
                pinn.report.max_pred_variance, nn.report.max_pred_variance
            );
        }
    }
    Ok(())
}
