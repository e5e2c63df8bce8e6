//! `gen-data`: write a synthetic dataset CSV named after its domain.

use serde::{Deserialize, Serialize};

use adaptive_pinn::data::{synthesize, synthesize_convdiff, SynthSpec};
use adaptive_pinn::error::Result;
use adaptive_pinn::seed::sub_seed;

use crate::common::{
    config_has_seed, resolve_seed, resolved_from_config, save_dataset, write_json_pretty, Ctx,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Domain to synthesize: water, sodium, or convdiff
    #[arg(long)]
    domain: Option<String>,
    /// Number of rows
    #[arg(long)]
    n: Option<usize>,
    /// Relative noise level on targets
    #[arg(long)]
    noise: Option<f64>,
    /// Peclet number (convdiff domain only)
    #[arg(long)]
    peclet: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default)]
struct Resolved {
    command: String,
    seed: u64,
    domain: String,
    n: usize,
    noise: f64,
    peclet: f64,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            command: "gen-data".into(),
            seed: 0,
            domain: "sodium".into(),
            n: 87,
            noise: 0.05,
            peclet: 5.0,
        }
    }
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<()> {
    let mut r: Resolved = resolved_from_config(&ctx.config, "gen-data")?;
    r.seed = resolve_seed(ctx.seed_flag, r.seed, config_has_seed(&ctx.config));
    if let Some(d) = &args.domain {
        r.domain = d.clone();
    }
    if let Some(n) = args.n {
        r.n = n;
    }
    if let Some(x) = args.noise {
        r.noise = x;
    }
    if let Some(x) = args.peclet {
        r.peclet = x;
    }
    write_json_pretty(&ctx.path("config-resolved.json"), &r)?;

    // Draw from the root seed's `data` sub-stream so a generated CSV matches
    // the dataset other commands synthesize internally at the same root seed.
    let data_seed = sub_seed(r.seed, "data");
    let ds = match r.domain.as_str() {
        "water" => synthesize(&SynthSpec::water(r.n, r.noise, data_seed))?,
        "sodium" => synthesize(&SynthSpec::sodium(r.n, r.noise, data_seed))?,
        "convdiff" => synthesize_convdiff(r.peclet, r.n, r.noise, data_seed)?,
        other => {
            return Err(adaptive_pinn::error::Error::InvalidConfig(format!(
                "unknown domain `{other}` (expected water, sodium, or convdiff)"
            )))
        }
    };
    save_dataset(&ds, &ctx.path(&format!("{}.csv", r.domain)))
}
