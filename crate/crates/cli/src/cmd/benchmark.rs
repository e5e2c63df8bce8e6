//! `benchmark`: compare the six model families (transfer network, plain
//! network, physics-blended network, Gaussian process, and two tuned support
//! vector regressors) on a source/target dataset pair.

use serde::{Deserialize, Serialize};

use adaptive_pinn::data::{load_csv, synthesize, Dataset, SynthSpec};
use adaptive_pinn::error::{Error, Result};
use adaptive_pinn::model::{
    benchmark_suite, write_benchmark_csv, BenchmarkConfig, NetSettings, SvrSearchSettings,
};
use adaptive_pinn::seed::sub_seed;

use crate::common::{
    atomic_write_with, config_has_seed, resolve_seed, resolved_from_config, write_json_pretty,
    Ctx,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Effort preset: full or quick
    #[arg(long)]
    preset: Option<String>,
    /// Override the preset's number of train/holdout resamples
    #[arg(long)]
    n_seeds: Option<usize>,
    /// Source-domain CSV (default: synthetic water-like data)
    #[arg(long)]
    source_data: Option<String>,
    /// Target-domain CSV (default: synthetic sodium-like data)
    #[arg(long)]
    target_data: Option<String>,
    /// Synthetic source rows
    #[arg(long)]
    n_source: Option<usize>,
    /// Synthetic target rows
    #[arg(long)]
    n_target: Option<usize>,
    /// Relative noise level of synthetic targets
    #[arg(long)]
    noise: Option<f64>,
    /// Holdout fraction per resample
    #[arg(long)]
    holdout: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default)]
struct Resolved {
    command: String,
    seed: u64,
    preset: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_seeds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    source_data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    target_data: Option<String>,
    n_source: usize,
    n_target: usize,
    noise: f64,
    holdout: f64,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            command: "benchmark".into(),
            seed: 0,
            preset: "full".into(),
            n_seeds: None,
            source_data: None,
            target_data: None,
            n_source: 60,
            n_target: 87,
            noise: 0.05,
            holdout: 0.2,
        }
    }
}

fn preset_config(name: &str) -> Result<BenchmarkConfig> {
    let mut cfg = BenchmarkConfig::default();
    match name {
        "full" => {
            cfg.n_seeds = 5;
            cfg.net = NetSettings {
                hidden: vec![16, 16],
                learning_rate: 0.02,
                max_epochs: 300,
                patience: 60,
                val_fraction: 0.2,
            };
            cfg.pinn.net = cfg.net.clone();
            cfg.pinn.n_collocation = 24;
            cfg.tl.net = cfg.net.clone();
            cfg.svr_search = SvrSearchSettings {
                budget: 16,
                n_init: 5,
                ..SvrSearchSettings::default()
            };
        }
        "quick" => {
            cfg.n_seeds = 2;
            cfg.net = NetSettings {
                hidden: vec![6],
                learning_rate: 0.05,
                max_epochs: 50,
                patience: 20,
                val_fraction: 0.2,
            };
            cfg.pinn.net = cfg.net.clone();
            cfg.pinn.n_collocation = 10;
            cfg.tl.net = cfg.net.clone();
            cfg.svr_search = SvrSearchSettings {
                budget: 5,
                n_init: 3,
                ..SvrSearchSettings::default()
            };
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown preset `{other}` (expected full or quick)"
            )))
        }
    }
    Ok(cfg)
}

fn load_or_synth(
    path: Option<&String>,
    spec: SynthSpec,
) -> Result<Dataset> {
    match path {
        Some(p) => load_csv(std::path::Path::new(p), None),
        None => synthesize(&spec),
    }
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<()> {
    let mut r: Resolved = resolved_from_config(&ctx.config, "benchmark")?;
    r.seed = resolve_seed(ctx.seed_flag, r.seed, config_has_seed(&ctx.config));
    if let Some(p) = &args.preset {
        r.preset = p.clone();
    }
    if let Some(n) = args.n_seeds {
        r.n_seeds = Some(n);
    }
    if let Some(p) = &args.source_data {
        r.source_data = Some(p.clone());
    }
    if let Some(p) = &args.target_data {
        r.target_data = Some(p.clone());
    }
    if let Some(n) = args.n_source {
        r.n_source = n;
    }
    if let Some(n) = args.n_target {
        r.n_target = n;
    }
    if let Some(x) = args.noise {
        r.noise = x;
    }
    if let Some(x) = args.holdout {
        r.holdout = x;
    }

    let mut cfg = preset_config(&r.preset)?;
    if let Some(n) = r.n_seeds {
        cfg.n_seeds = n;
    }
    cfg.holdout_fraction = r.holdout;
    cfg.seed = sub_seed(r.seed, "bench");
    write_json_pretty(&ctx.path("config-resolved.json"), &r)?;

    let ds_source = load_or_synth(
        r.source_data.as_ref(),
        SynthSpec::water(r.n_source, r.noise, sub_seed(r.seed, "data-source")),
    )?;
    let ds_target = load_or_synth(
        r.target_data.as_ref(),
        SynthSpec::sodium(r.n_target, r.noise, sub_seed(r.seed, "data-target")),
    )?;

    let rows = benchmark_suite(&ds_source, &ds_target, &cfg)?;
    atomic_write_with(&ctx.path("benchmark.csv"), |tmp| {
        write_benchmark_csv(&rows, tmp)
    })?;
    for row in &rows {
        match row.median_mape {
            Some(m) => println!(
                "{:<14} median holdout MAPE {:.5} ({} / {} resamples ok)",
                row.model.label(),
                m,
                row.seeds_ok,
                cfg.n_seeds
            ),
            None => println!(
                "{:<14} failed: {}",
                row.model.label(),
                row.error.as_deref().unwrap_or("unknown")
            ),
        }
    }
    Ok(())
}
