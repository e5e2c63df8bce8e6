//! Transfer learning: initialize a target network from a trained source,
//! optionally freeze the copied layers, and sweep over which single layer to
//! transfer.
//!
//! Freezing acts on the optimizer step, so a hard-frozen parameter is
//! bit-identical before and after training. The blending scalar is always
//! re-initialized to zero at transfer time because source and target loss
//! scales generally differ.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blend::BlendingNeuron;
use crate::data::{split, Dataset};
use crate::error::{Error, Result};
use crate::mlp::Mlp;
use crate::pde::PdeProblem;
use crate::seed::{sub_seed, sub_seed_indexed};
use crate::stats::mape;
use crate::train::{train_scaled, TrainConfig, TrainMode, TrainReport};

/// What to carry over from the source network and how to treat it afterwards.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferPlan {
    /// Checkpoint the source network was loaded from (informational; the
    /// library APIs take an already-loaded network).
    pub source: PathBuf,
    /// 0-based indices of weight layers (counted from the input) to copy.
    pub layers_to_copy: Vec<usize>,
    /// Freeze the copied layers during fine-tuning.
    pub freeze_copied: bool,
    /// Let the blending scalar keep training during fine-tuning.
    pub fine_tune_alpha: bool,
}

impl TransferPlan {
    pub fn new(source: impl Into<PathBuf>) -> Self {
        TransferPlan {
            source: source.into(),
            layers_to_copy: Vec::new(),
            freeze_copied: true,
            fine_tune_alpha: true,
        }
    }

    pub fn with_layers(mut self, layers: impl Into<Vec<usize>>) -> Self {
        self.layers_to_copy = layers.into();
        self.layers_to_copy.sort_unstable();
        self.layers_to_copy.dedup();
        self
    }
}

/// Build a target network: fresh Glorot initialization from `seed`, then the
/// planned layers overwritten bitwise from `source`.
pub fn transfer_init(source: &Mlp, plan: &TransferPlan, seed: u64) -> Result<Mlp> {
    let src_shapes = source.arch().layer_shapes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut target = Mlp::init(source.arch().clone(), source.activation(), &mut rng);
    let tgt_shapes = target.arch().layer_shapes();
    let layout = target.layout();
    let mut params = target.params().to_vec();
    for &layer in &plan.layers_to_copy {
        if layer >= tgt_shapes.len() {
            return Err(Error::InvalidConfig(format!(
                "layer index {layer} out of range for a {}-layer network",
                tgt_shapes.len()
            )));
        }
        if src_shapes[layer] != tgt_shapes[layer] {
            return Err(Error::LayerShapeMismatch {
                layer,
                expected: tgt_shapes[layer],
                found: src_shapes[layer],
            });
        }
        let range = layout.layer_range(layer);
        params[range.clone()].copy_from_slice(&source.params()[range]);
    }
    target.set_params(&params)?;
    Ok(target)
}

/// Check shape compatibility for copying `layers` between two architectures,
/// without building anything.
pub fn check_compatible(
    source: &crate::mlp::ArchSpec,
    target: &crate::mlp::ArchSpec,
    layers: &[usize],
) -> Result<()> {
    let src = source.layer_shapes();
    let tgt = target.layer_shapes();
    for &layer in layers {
        if layer >= tgt.len() || layer >= src.len() {
            return Err(Error::InvalidConfig(format!(
                "layer index {layer} out of range (source has {}, target has {} layers)",
                src.len(),
                tgt.len()
            )));
        }
        if src[layer] != tgt[layer] {
            return Err(Error::LayerShapeMismatch {
                layer,
                expected: tgt[layer],
                found: src[layer],
            });
        }
    }
    Ok(())
}

/// Per-parameter step scales for freezing: `freeze_scale` (0 = hard freeze,
/// e.g. 0.1 = soft freeze) on every parameter of the listed layers, 1
/// elsewhere; the trailing α slot (PINN modes) gets 1 or 0 according to
/// `fine_tune_alpha`.
pub fn layer_scales(
    net: &Mlp,
    frozen_layers: &[usize],
    freeze_scale: f64,
    pinn: bool,
    fine_tune_alpha: bool,
) -> Result<Vec<f64>> {
    let layout = net.layout();
    let n_layers = layout.n_layers();
    let mut scales = vec![1.0; net.n_params() + usize::from(pinn)];
    for &layer in frozen_layers {
        if layer >= n_layers {
            return Err(Error::InvalidConfig(format!(
                "cannot freeze layer {layer}: network has {n_layers} layers"
            )));
        }
        for i in layout.layer_range(layer) {
            scales[i] = freeze_scale;
        }
    }
    if pinn {
        let n = scales.len();
        scales[n - 1] = if fine_tune_alpha { 1.0 } else { 0.0 };
    }
    Ok(scales)
}

/// Fine-tune with the listed layers frozen (hard when `freeze_scale == 0`).
/// Everything else behaves exactly like [`crate::train::train`].
#[allow(clippy::too_many_arguments)]
pub fn train_frozen(
    net: &Mlp,
    neuron: Option<BlendingNeuron>,
    ds: &Dataset,
    prob: Option<&PdeProblem>,
    cfg: &TrainConfig,
    frozen_layers: &[usize],
    freeze_scale: f64,
    fine_tune_alpha: bool,
) -> Result<(Mlp, BlendingNeuron, TrainReport)> {
    if !(0.0..=1.0).contains(&freeze_scale) {
        return Err(Error::InvalidConfig(format!(
            "freeze scale must lie in [0,1], got {freeze_scale}"
        )));
    }
    let pinn = matches!(cfg.mode, TrainMode::Pinn | TrainMode::PinnAlternate);
    let scales = layer_scales(net, frozen_layers, freeze_scale, pinn, fine_tune_alpha)?;
    train_scaled(net, neuron, ds, prob, cfg, Some(&scales))
}

/// One row of the layer-sweep table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub layer_index: usize,
    pub median_mape: f64,
    pub seeds: usize,
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite metrics"));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// For each hidden layer of the source, transfer exactly that layer into a
/// fresh target, freeze it, fine-tune on `target_ds`, and score MAPE on a
/// held-out fifth of the data. Each row is the median over `n_seeds`
/// replicate runs (disjoint seed streams); rows run in parallel.
pub fn layer_sweep(
    source: &Mlp,
    target_ds: &Dataset,
    prob: Option<&PdeProblem>,
    cfg: &TrainConfig,
    n_seeds: usize,
) -> Result<Vec<SweepRow>> {
    if n_seeds < 1 {
        return Err(Error::InvalidConfig(
            "layer sweep needs at least one seed per row".to_string(),
        ));
    }
    let n_hidden = source.arch().hidden.len();
    if n_hidden == 0 {
        return Err(Error::InvalidConfig(
            "layer sweep needs at least one hidden layer".to_string(),
        ));
    }
    if source.arch().n_inputs != target_ds.n_features() {
        return Err(Error::DimensionMismatch {
            expected: source.arch().n_inputs,
            found: target_ds.n_features(),
        });
    }
    let (fit_ds, holdout) = split(target_ds, 0.8, sub_seed(cfg.seed, "sweep-holdout"))?;
    let pinn = matches!(cfg.mode, TrainMode::Pinn | TrainMode::PinnAlternate);

    let rows: Result<Vec<SweepRow>> = (0..n_hidden)
        .into_par_iter()
        .map(|k| {
            let mut mapes = Vec::with_capacity(n_seeds);
            for s in 0..n_seeds {
                let run = sub_seed_indexed(cfg.seed, "sweep-run", (k * 100_003 + s) as u64);
                let plan = TransferPlan::new("<in-memory>").with_layers(vec![k]);
                let target = transfer_init(source, &plan, sub_seed(run, "init"))?;
                let run_cfg = TrainConfig {
                    seed: sub_seed(run, "train"),
                    ..cfg.clone()
                };
                let neuron = pinn.then(BlendingNeuron::default);
                let (fitted, _, _) = train_frozen(
                    &target,
                    neuron,
                    &fit_ds,
                    prob,
                    &run_cfg,
                    &[k],
                    0.0,
                    true,
                )?;
                let preds: Vec<f64> = holdout.features.iter().map(|r| fitted.forward(r)).collect();
                mapes.push(mape(&holdout.targets, &preds)?.mape);
            }
            Ok(SweepRow {
                layer_index: k,
                median_mape: median(&mut mapes),
                seeds: n_seeds,
            })
        })
        .collect();
    rows
}

/// Emit the sweep table as `layer_index,median_mape,seeds`.
pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut out = String::from("layer_index,median_mape,seeds\n");
    for r in rows {
        out.push_str(&format!("{},{:?},{}\n", r.layer_index, r.median_mape, r.seeds));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
