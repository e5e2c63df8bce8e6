//! `hyperopt`: search training hyperparameters (learning rate and hidden
//! architecture) by random sampling, Bayesian optimization, or a genetic
//! algorithm; the best configuration is written in a form `train --config`
//! accepts directly.

use serde::{Deserialize, Serialize};

use adaptive_pinn::data::split;
use adaptive_pinn::error::{Error, Result};
use adaptive_pinn::model::{fit_plain_net, NetSettings};
use adaptive_pinn::search::{
    bayes_opt, ga_search, random_search, write_best_json, write_history_csv, GenomeSpace,
    ParamDim, ParamKind, ParamSpace, ParamValue, SearchOutcome,
};
use adaptive_pinn::seed::sub_seed;
use adaptive_pinn::stats::mape;

use crate::common::{
    atomic_write_str, atomic_write_with, config_has_seed, resolve_seed, resolved_from_config,
    write_json_pretty, Ctx, DataArgs, DataSource,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Search method: random, bayes, or ga
    #[arg(long)]
    method: Option<String>,
    /// Total objective evaluations (random and bayes)
    #[arg(long)]
    budget: Option<usize>,
    /// Random trials seeding the Bayesian surrogate
    #[arg(long)]
    n_init: Option<usize>,
    /// Genetic population size
    #[arg(long)]
    population: Option<usize>,
    /// Genetic generations
    #[arg(long)]
    generations: Option<usize>,
    #[command(flatten)]
    data: DataArgs,
    /// Training epochs per candidate evaluation
    #[arg(long)]
    epochs: Option<usize>,
    /// Early-stopping patience per candidate evaluation
    #[arg(long)]
    patience: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default)]
struct Resolved {
    command: String,
    seed: u64,
    method: String,
    budget: usize,
    n_init: usize,
    population: usize,
    generations: usize,
    #[serde(flatten)]
    data: DataSource,
    epochs: usize,
    patience: usize,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            command: "hyperopt".into(),
            seed: 0,
            method: "bayes".into(),
            budget: 30,
            n_init: 5,
            population: 20,
            generations: 30,
            data: DataSource::default(),
            epochs: 120,
            patience: 60,
        }
    }
}

/// Learning rate (log scale), layer width, and depth.
fn search_space() -> Result<ParamSpace> {
    ParamSpace::new(vec![
        ParamDim {
            name: "learning_rate".into(),
            kind: ParamKind::LogReal {
                low: 1e-4,
                high: 0.5,
            },
        },
        ParamDim {
            name: "hidden_width".into(),
            kind: ParamKind::Integer { low: 4, high: 48 },
        },
        ParamDim {
            name: "n_layers".into(),
            kind: ParamKind::Integer { low: 1, high: 3 },
        },
    ])
}

fn settings_from_point(
    space: &ParamSpace,
    point: &[f64],
    epochs: usize,
    patience: usize,
) -> Result<NetSettings> {
    let mut lr = None;
    let mut width = None;
    let mut layers = None;
    for (name, value) in space.decode(point)? {
        match (name.as_str(), value) {
            ("learning_rate", ParamValue::Real(x)) => lr = Some(x),
            ("hidden_width", ParamValue::Int(x)) => width = Some(x as usize),
            ("n_layers", ParamValue::Int(x)) => layers = Some(x as usize),
            _ => {}
        }
    }
    let (lr, width, layers) = (
        lr.ok_or_else(|| Error::Other("missing learning_rate".into()))?,
        width.ok_or_else(|| Error::Other("missing hidden_width".into()))?,
        layers.ok_or_else(|| Error::Other("missing n_layers".into()))?,
    );
    Ok(NetSettings {
        hidden: vec![width; layers],
        learning_rate: lr,
        max_epochs: epochs,
        patience,
        val_fraction: 0.2,
    })
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<()> {
    let mut r: Resolved = resolved_from_config(&ctx.config, "hyperopt")?;
    r.seed = resolve_seed(ctx.seed_flag, r.seed, config_has_seed(&ctx.config));
    r.data = args.data.overlay(r.data);
    if let Some(m) = &args.method {
        r.method = m.clone();
    }
    if let Some(n) = args.budget {
        r.budget = n;
    }
    if let Some(n) = args.n_init {
        r.n_init = n;
    }
    if let Some(n) = args.population {
        r.population = n;
    }
    if let Some(n) = args.generations {
        r.generations = n;
    }
    if let Some(n) = args.epochs {
        r.epochs = n;
    }
    if let Some(n) = args.patience {
        r.patience = n;
    }
    write_json_pretty(&ctx.path("config-resolved.json"), &r)?;

    let ds = r.data.load(r.seed)?;
    // One fixed search-level split and one fixed fit seed across all trials,
    // so candidates differ only in their hyperparameters.
    let (fit_ds, val_ds) = split(&ds, 0.75, sub_seed(r.seed, "hyperopt-val"))?;
    let fit_seed = sub_seed(r.seed, "hyperopt-fit");
    let val_targets = val_ds.targets.clone();
    let score = |fit: &adaptive_pinn::model::NetFit| -> Result<f64> {
        let preds: Vec<f64> = val_ds.features.iter().map(|row| fit.predict(row)).collect();
        Ok(mape(&val_targets, &preds)?.mape)
    };

    if r.method == "ga" {
        let objective = |genome: &adaptive_pinn::search::Genome| -> Result<f64> {
            let settings = NetSettings {
                hidden: genome.hidden.clone(),
                learning_rate: genome.learning_rate(),
                max_epochs: r.epochs,
                patience: r.patience,
                val_fraction: 0.2,
            };
            score(&fit_plain_net(&fit_ds, &settings, fit_seed)?)
        };
        let outcome = ga_search(
            &GenomeSpace::default(),
            objective,
            r.population,
            r.generations,
            sub_seed(r.seed, "ga"),
        )?;
        let mut hist = String::from("generation,best_fitness\n");
        for (g, best) in outcome.generation_best.iter().enumerate() {
            hist.push_str(&format!("{g},{best:?}\n"));
        }
        atomic_write_str(&ctx.path("ga_history.csv"), &hist)?;
        let best = serde_json::json!({
            "learning_rate": outcome.best.learning_rate(),
            "hidden": outcome.best.hidden,
            "objective": outcome.best_fitness,
        });
        write_json_pretty(&ctx.path("best_config.json"), &best)?;
        println!(
            "ga: best validation MAPE {:.5} with hidden {:?}, learning rate {:.5} \
             ({} evaluations)",
            outcome.best_fitness,
            outcome.best.hidden,
            outcome.best.learning_rate(),
            outcome.evaluations
        );
        return Ok(());
    }

    let space = search_space()?;
    let objective = |point: &[f64]| -> Result<f64> {
        let settings = settings_from_point(&space, point, r.epochs, r.patience)?;
        score(&fit_plain_net(&fit_ds, &settings, fit_seed)?)
    };
    let outcome: SearchOutcome = match r.method.as_str() {
        "random" => random_search(&space, objective, r.budget, sub_seed(r.seed, "rs"))?,
        "bayes" => bayes_opt(&space, objective, r.budget, r.n_init, sub_seed(r.seed, "bo"))?,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown method `{other}` (expected random, bayes, or ga)"
            )))
        }
    };
    atomic_write_with(&ctx.path("hyperopt_history.csv"), |tmp| {
        write_history_csv(&space, &outcome.history, tmp)
    })?;
    atomic_write_with(&ctx.path("best_config.json"), |tmp| {
        write_best_json(&space, &outcome.best, tmp)
    })?;
    if !outcome.surrogate_fallbacks.is_empty() {
        eprintln!(
            "note: surrogate had too few successful trials at iterations {:?}; \
             those proposals were random",
            outcome.surrogate_fallbacks
        );
    }
    println!(
        "{}: best validation MAPE {:.5} after {} evaluations",
        r.method,
        outcome.best.objective,
        outcome.history.len()
    );
    Ok(())
}
