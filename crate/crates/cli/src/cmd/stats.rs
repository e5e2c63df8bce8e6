//! `stats`: distributional comparison of the two fluid domains (rank-sum
//! test and kernel density estimates of the targets), plus an optional
//! histogram of a blending-weight trace from a training run.

use serde::{Deserialize, Serialize};

use adaptive_pinn::data::{load_csv, synthesize, Dataset, SynthSpec};
use adaptive_pinn::error::Result;
use adaptive_pinn::seed::sub_seed;
use adaptive_pinn::stats::{kde, kde_grid, lambda_histogram, mann_whitney_u, UTestMethod};

use crate::common::{
    atomic_write_str, config_has_seed, read_csv_column, resolve_seed, resolved_from_config,
    write_json_pretty, Ctx,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Water-domain CSV (default: synthetic)
    #[arg(long)]
    water: Option<String>,
    /// Sodium-domain CSV (default: synthetic)
    #[arg(long)]
    sodium: Option<String>,
    /// Synthetic water rows
    #[arg(long)]
    n_water: Option<usize>,
    /// Synthetic sodium rows
    #[arg(long)]
    n_sodium: Option<usize>,
    /// Relative noise level of synthetic targets
    #[arg(long)]
    noise: Option<f64>,
    /// Epoch trace CSV from `train`; its lambda_p column is histogrammed
    #[arg(long)]
    lambda_trace: Option<String>,
    /// Histogram bins for the blending-weight trace
    #[arg(long)]
    bins: Option<usize>,
    /// Density-curve grid points
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default)]
struct Resolved {
    command: String,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    water: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sodium: Option<String>,
    n_water: usize,
    n_sodium: usize,
    noise: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_trace: Option<String>,
    bins: usize,
    grid_points: usize,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            command: "stats".into(),
            seed: 0,
            water: None,
            sodium: None,
            n_water: 60,
            n_sodium: 87,
            noise: 0.05,
            lambda_trace: None,
            bins: 20,
            grid_points: 256,
        }
    }
}

/// Density-curve padding beyond the sample range, in bandwidths.
const KDE_PAD: f64 = 5.0;

fn write_kde_csv(sample: &[f64], n_points: usize, path: &std::path::Path) -> Result<()> {
    let grid = kde_grid(sample, n_points, KDE_PAD)?;
    let curve = kde(sample, &grid)?;
    let mut out = format!("# bandwidth: {:?}\nx,density\n", curve.bandwidth);
    for (x, d) in curve.grid.iter().zip(&curve.density) {
        out.push_str(&format!("{x:?},{d:?}\n"));
    }
    atomic_write_str(path, &out)
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<()> {
    let mut r: Resolved = resolved_from_config(&ctx.config, "stats")?;
    r.seed = resolve_seed(ctx.seed_flag, r.seed, config_has_seed(&ctx.config));
    if let Some(p) = &args.water {
        r.water = Some(p.clone());
    }
    if let Some(p) = &args.sodium {
        r.sodium = Some(p.clone());
    }
    if let Some(n) = args.n_water {
        r.n_water = n;
    }
    if let Some(n) = args.n_sodium {
        r.n_sodium = n;
    }
    if let Some(x) = args.noise {
        r.noise = x;
    }
    if let Some(p) = &args.lambda_trace {
        r.lambda_trace = Some(p.clone());
    }
    if let Some(n) = args.bins {
        r.bins = n;
    }
    if let Some(n) = args.grid_points {
        r.grid_points = n;
    }
    write_json_pretty(&ctx.path("config-resolved.json"), &r)?;

    let load = |path: Option<&String>, spec: SynthSpec| -> Result<Dataset> {
        match path {
            Some(p) => load_csv(std::path::Path::new(p), None),
            None => synthesize(&spec),
        }
    };
    let water = load(
        r.water.as_ref(),
        SynthSpec::water(r.n_water, r.noise, sub_seed(r.seed, "data-water")),
    )?;
    let sodium = load(
        r.sodium.as_ref(),
        SynthSpec::sodium(r.n_sodium, r.noise, sub_seed(r.seed, "data-sodium")),
    )?;

    let test = mann_whitney_u(&water.targets, &sodium.targets)?;
    write_json_pretty(
        &ctx.path("utest.json"),
        &serde_json::json!({
            "u": test.u,
            "p": test.p,
            "method": match test.method {
                UTestMethod::Exact => "exact",
                UTestMethod::NormalApprox => "normal-approx",
            },
            "n_water": water.targets.len(),
            "n_sodium": sodium.targets.len(),
        }),
    )?;

    write_kde_csv(&water.targets, r.grid_points, &ctx.path("kde_water.csv"))?;
    write_kde_csv(&sodium.targets, r.grid_points, &ctx.path("kde_sodium.csv"))?;

    if let Some(trace_path) = &r.lambda_trace {
        let trace = read_csv_column(std::path::Path::new(trace_path), "lambda_p")?;
        let hist = lambda_histogram(&trace, r.bins)?;
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (i, &count) in hist.counts.iter().enumerate() {
            out.push_str(&format!(
                "{:?},{:?},{}\n",
                hist.edges[i],
                hist.edges[i + 1],
                count
            ));
        }
        atomic_write_str(&ctx.path("lambda_p_hist.csv"), &out)?;
    }

    println!(
        "rank-sum test: U = {:.1}, p = {:.3e} ({}); the target distributions {} at the 5% level",
        test.u,
        test.p,
        match test.method {
            UTestMethod::Exact => "exact",
            UTestMethod::NormalApprox => "normal approximation",
        },
        if test.p < 0.05 { "differ" } else { "are not distinguishable" }
    );
    Ok(())
}
