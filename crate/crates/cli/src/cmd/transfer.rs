//! `transfer`: warm-start a network from a trained checkpoint and fine-tune
//! it on new data with selected layers frozen, or sweep which single hidden
//! layer to freeze.

use serde::{Deserialize, Serialize};

use adaptive_pinn::error::{Error, Result};
use adaptive_pinn::mlp::Mlp;
use adaptive_pinn::model::standardized_parts;
use adaptive_pinn::seed::sub_seed;
use adaptive_pinn::train::{TrainConfig, TrainMode};
use adaptive_pinn::transfer::{
    layer_sweep, train_frozen, transfer_init, write_sweep_csv, TransferPlan,
};

use crate::common::{
    atomic_write_with, config_has_seed, resolve_seed, resolved_from_config, write_json_pretty,
    Ctx, DataArgs, DataSource,
};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Source model checkpoint (as written by `train`)
    #[arg(long)]
    source: Option<String>,
    #[command(flatten)]
    data: DataArgs,
    /// Hidden layers to copy from the source and freeze, e.g. --layers 0,1
    #[arg(long, value_delimiter = ',')]
    layers: Option<Vec<usize>>,
    /// Learning-rate multiplier for frozen layers (0 = fully frozen)
    #[arg(long)]
    freeze_scale: Option<f64>,
    /// Copy layers but leave them trainable
    #[arg(long)]
    no_freeze: bool,
    /// Sweep freezing each hidden layer in turn instead of fine-tuning once
    #[arg(long)]
    sweep: bool,
    /// Restarts per sweep row
    #[arg(long)]
    sweep_seeds: Option<usize>,
    /// Adam learning rate
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Maximum training epochs
    #[arg(long)]
    epochs: Option<usize>,
    /// Early-stopping patience
    #[arg(long)]
    patience: Option<usize>,
    /// Fraction of rows held out for validation
    #[arg(long)]
    val_fraction: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default)]
struct Resolved {
    command: String,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(flatten)]
    data: DataSource,
    layers: Vec<usize>,
    freeze: bool,
    freeze_scale: f64,
    sweep: bool,
    sweep_seeds: usize,
    learning_rate: f64,
    epochs: usize,
    patience: usize,
    val_fraction: f64,
}

impl Default for Resolved {
    fn default() -> Self {
        Self {
            command: "transfer".into(),
            seed: 0,
            source: None,
            data: DataSource::default(),
            layers: vec![0],
            freeze: true,
            freeze_scale: 0.0,
            sweep: false,
            sweep_seeds: 5,
            learning_rate: 0.02,
            epochs: 500,
            patience: 100,
            val_fraction: 0.2,
        }
    }
}

pub fn run(args: &Args, ctx: &Ctx) -> Result<()> {
    let mut r: Resolved = resolved_from_config(&ctx.config, "transfer")?;
    r.seed = resolve_seed(ctx.seed_flag, r.seed, config_has_seed(&ctx.config));
    r.data = args.data.overlay(r.data);
    if let Some(s) = &args.source {
        r.source = Some(s.clone());
    }
    if let Some(l) = &args.layers {
        r.layers = l.clone();
    }
    if let Some(x) = args.freeze_scale {
        r.freeze_scale = x;
    }
    if args.no_freeze {
        r.freeze = false;
    }
    if args.sweep {
        r.sweep = true;
    }
    if let Some(n) = args.sweep_seeds {
        r.sweep_seeds = n;
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

    let source_path = r.source.clone().ok_or_else(|| {
        Error::InvalidConfig("transfer needs --source <checkpoint>".to_string())
    })?;
    let source = Mlp::load_checkpoint(std::path::Path::new(&source_path))?;

    let ds = r.data.load(r.seed)?;
    if source.arch().n_inputs != ds.n_features() {
        return Err(Error::InvalidConfig(format!(
            "source checkpoint expects {} inputs but the dataset has {} features",
            source.arch().n_inputs,
            ds.n_features()
        )));
    }
    write_json_pretty(&ctx.path("config-resolved.json"), &r)?;

    // Checkpoints for multi-feature data live in standardized space, so the
    // target data is standardized the same way before fine-tuning.
    let train_ds = if ds.n_features() > 1 {
        standardized_parts(&ds)?.0
    } else {
        ds.clone()
    };

    let cfg = TrainConfig {
        learning_rate: r.learning_rate,
        max_epochs: r.epochs,
        early_stop_patience: r.patience,
        val_fraction: r.val_fraction,
        seed: sub_seed(r.seed, "train"),
        mode: TrainMode::DataOnly,
        ..TrainConfig::default()
    };

    if r.sweep {
        let rows = layer_sweep(&source, &train_ds, None, &cfg, r.sweep_seeds)?;
        atomic_write_with(&ctx.path("transfer_sweep.csv"), |tmp| {
            write_sweep_csv(&rows, tmp)
        })?;
        for row in &rows {
            println!(
                "freeze layer {}: median holdout MAPE {:.5} over {} seeds",
                row.layer_index, row.median_mape, row.seeds
            );
        }
        return Ok(());
    }

    let plan = TransferPlan::new(&source_path).with_layers(r.layers.clone());
    let net = transfer_init(&source, &plan, sub_seed(r.seed, "init"))?;
    let frozen: Vec<usize> = if r.freeze { plan.layers_to_copy.clone() } else { Vec::new() };
    let (fitted, _neuron, report) =
        train_frozen(&net, None, &train_ds, None, &cfg, &frozen, r.freeze_scale, false)?;

    atomic_write_with(&ctx.path("train_epochs.csv"), |tmp| report.write_csv(tmp))?;
    atomic_write_with(&ctx.path("train_summary.json"), |tmp| {
        report.write_json_summary(tmp)
    })?;
    atomic_write_with(&ctx.path("model.json"), |tmp| fitted.save_checkpoint(tmp))?;
    println!(
        "fine-tuned from {} ({} layer(s) {}); best val MAPE {:.5} at epoch {}",
        source_path,
        r.layers.len(),
        if r.freeze { "frozen" } else { "copied, trainable" },
        report.best_val_mape,
        report.best_epoch
    );
    Ok(())
}
