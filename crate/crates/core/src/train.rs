//! Adam-based training loop with learning-rate scheduling and early stopping.
//!
//! Gradients are full-batch and computed on a reused reverse-mode tape, so a
//! run is bit-for-bit reproducible for a fixed configuration. In PINN mode the
//! blending scalar `α` rides at the end of the parameter vector and receives
//! its update from the same backward pass as the weights.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autodiff::Tape;
use crate::blend::{
    blend_weights, compose_vars, data_loss_vars, physics_loss_vars, BlendingNeuron, PhysicsInput,
};
use crate::data::{split, Dataset};
use crate::error::{Error, Result};
use crate::mlp::Mlp;
use crate::pde::PdeProblem;
use crate::seed::sub_seed;
use crate::stats::mape;

/// Learning-rate schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Schedule {
    Constant,
    /// `base · factor^⌊epoch/every⌋`
    StepDecay { factor: f64, every: usize },
}

/// Effective learning rate at a (0-based) epoch.
pub fn schedule_lr(base_lr: f64, epoch: usize, schedule: Schedule) -> f64 {
    match schedule {
        Schedule::Constant => base_lr,
        Schedule::StepDecay { factor, every } => base_lr * factor.powi((epoch / every) as i32),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    /// Mean-squared-error regression only.
    DataOnly,
    /// Joint minimization of the blended composite loss.
    Pinn,
    /// Epochs alternate between stepping on the weighted data term and the
    /// weighted physics term; losses are still reported jointly.
    PinnAlternate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub max_epochs: usize,
    pub schedule: Schedule,
    pub early_stop_patience: usize,
    pub val_fraction: f64,
    pub seed: u64,
    pub mode: TrainMode,
    /// Mapping of the physics coordinate onto network inputs (PINN modes).
    pub physics_input: Option<PhysicsInput>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            max_epochs: 1000,
            schedule: Schedule::Constant,
            early_stop_patience: 50,
            val_fraction: 0.2,
            seed: 0,
            mode: TrainMode::DataOnly,
            physics_input: None,
        }
    }
}

impl TrainConfig {
    /// The aggressive historical configuration (learning rate 0.34). Kept as
    /// a named preset only; it diverges on poorly scaled targets.
    pub fn reference_pinn() -> Self {
        TrainConfig {
            learning_rate: 0.34,
            mode: TrainMode::Pinn,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.early_stop_patience < 1 {
            return Err(Error::InvalidConfig(
                "early-stop patience must be at least 1".to_string(),
            ));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "validation fraction must lie in (0,1), got {}",
                self.val_fraction
            )));
        }
        if let Schedule::StepDecay { factor, every } = self.schedule {
            if !(factor > 0.0 && factor <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "step-decay factor must lie in (0,1], got {factor}"
                )));
            }
            if every == 0 {
                return Err(Error::InvalidConfig(
                    "step-decay interval must be at least 1".to_string(),
                ));
            }
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig(
                "max_epochs must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

/// Adam first/second-moment accumulators.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        AdamState {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }
}

/// One bias-corrected Adam update, with a per-parameter scale on the step
/// (1 = normal, 0 = frozen, values between soften the update).
pub fn adam_step_scaled(
    params: &mut [f64],
    grads: &[f64],
    scales: &[f64],
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    if grads.len() != params.len() || state.m.len() != params.len() || scales.len() != params.len()
    {
        return Err(Error::ParamCountMismatch {
            expected: params.len(),
            found: grads.len(),
        });
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient { index: i });
    }
    state.t += 1;
    let bc1 = 1.0 - beta1.powi(state.t as i32);
    let bc2 = 1.0 - beta2.powi(state.t as i32);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        if scales[i] == 0.0 {
            continue;
        }
        let m_hat = state.m[i] / bc1;
        let v_hat = state.v[i] / bc2;
        params[i] -= scales[i] * lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// One bias-corrected Adam update over all parameters.
pub fn adam_step(
    params: &mut [f64],
    grads: &[f64],
    state: &mut AdamState,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
) -> Result<()> {
    let scales = vec![1.0; params.len()];
    adam_step_scaled(params, grads, &scales, state, lr, beta1, beta2, eps)
}

/// Validation-driven stopping rule: improvement means a strictly lower
/// metric; the run stops once `patience` epochs pass without one.
#[derive(Clone, Debug)]
pub struct EarlyStopper {
    patience: usize,
    best: f64,
    best_epoch: usize,
    since_best: usize,
}

impl EarlyStopper {
    pub fn new(patience: usize) -> Self {
        EarlyStopper {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            since_best: 0,
        }
    }

    /// Record the metric for a (1-based) epoch; returns `true` when training
    /// should stop after this epoch.
    pub fn observe(&mut self, epoch: usize, metric: f64) -> bool {
        if metric < self.best {
            self.best = metric;
            self.best_epoch = epoch;
            self.since_best = 0;
        } else {
            self.since_best += 1;
        }
        self.since_best >= self.patience
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_metric(&self) -> f64 {
        self.best
    }
}

/// Everything recorded about one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub total_loss: f64,
    pub data_loss: f64,
    pub physics_loss: f64,
    pub lambda_p: f64,
    pub val_mape: f64,
}

/// Full training history plus summary fields.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub final_epoch: usize,
    pub best_epoch: usize,
    pub best_val_mape: f64,
    /// Measured run time; deliberately absent from emitted files so reruns
    /// are byte-identical.
    pub wall_time_secs: f64,
}

#[derive(Serialize)]
struct ReportSummary {
    final_epoch: usize,
    best_epoch: usize,
    best_val_mape: f64,
    final_total_loss: f64,
    final_data_loss: f64,
    final_physics_loss: f64,
    final_lambda_p: f64,
}

impl TrainReport {
    /// λ_p value per epoch, for histogramming.
    pub fn lambda_trace(&self) -> Vec<f64> {
        self.epochs.iter().map(|e| e.lambda_p).collect()
    }

    /// One CSV row per epoch.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("epoch,total_loss,data_loss,physics_loss,lambda_p,val_mape\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},{:?},{:?},{:?},{:?},{:?}\n",
                e.epoch, e.total_loss, e.data_loss, e.physics_loss, e.lambda_p, e.val_mape
            ));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Summary JSON (no timing fields, so reruns match byte for byte).
    pub fn write_json_summary(&self, path: &Path) -> Result<()> {
        let last = self.epochs.last().ok_or(Error::EmptyDataset)?;
        let summary = ReportSummary {
            final_epoch: self.final_epoch,
            best_epoch: self.best_epoch,
            best_val_mape: self.best_val_mape,
            final_total_loss: last.total_loss,
            final_data_loss: last.data_loss,
            final_physics_loss: last.physics_loss,
            final_lambda_p: last.lambda_p,
        };
        let json = serde_json::to_string_pretty(&summary)
            .map_err(|e| Error::Other(format!("report serialization failed: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// Train a network (see [`train`]) with per-parameter step scales; the scale
/// vector covers the network parameters plus, in PINN modes, a trailing slot
/// for `α`. Scale 0 freezes a parameter exactly.
pub fn train_scaled(
    net: &Mlp,
    neuron: Option<BlendingNeuron>,
    ds: &Dataset,
    prob: Option<&PdeProblem>,
    cfg: &TrainConfig,
    scales: Option<&[f64]>,
) -> Result<(Mlp, BlendingNeuron, TrainReport)> {
    cfg.validate()?;
    let pinn = matches!(cfg.mode, TrainMode::Pinn | TrainMode::PinnAlternate);
    if pinn && (neuron.is_none() || prob.is_none()) {
        return Err(Error::InvalidConfig(
            "physics-informed modes need a blending scalar and a residual problem".to_string(),
        ));
    }
    let embed = match (&cfg.physics_input, pinn) {
        (Some(e), true) => {
            e.validate(net.arch().n_inputs)?;
            Some(e.clone())
        }
        (None, true) => {
            if net.arch().n_inputs != 1 {
                return Err(Error::InvalidConfig(
                    "multi-input network needs an explicit physics input mapping".to_string(),
                ));
            }
            Some(PhysicsInput::direct())
        }
        (_, false) => None,
    };
    if let Some(p) = prob {
        p.validate()?;
    }

    let start = std::time::Instant::now();
    let (train_ds, val_ds) = split(ds, 1.0 - cfg.val_fraction, sub_seed(cfg.seed, "val-split"))?;

    let n_net = net.n_params();
    let n_all = n_net + usize::from(pinn);
    let mut params: Vec<f64> = net.params().to_vec();
    if pinn {
        params.push(neuron.expect("checked above").alpha);
    }
    let scales: Vec<f64> = match scales {
        Some(s) => {
            if s.len() != n_all {
                return Err(Error::ParamCountMismatch {
                    expected: n_all,
                    found: s.len(),
                });
            }
            s.to_vec()
        }
        None => vec![1.0; n_all],
    };

    let mut state = AdamState::new(n_all);
    let mut stopper = EarlyStopper::new(cfg.early_stop_patience);
    let mut records: Vec<EpochRecord> = Vec::new();
    let mut best_params = params.clone();
    let mut eval_net = net.clone();
    let tape = Tape::with_capacity(1024);

    for iter in 0..cfg.max_epochs {
        let epoch = iter + 1;
        tape.clear();
        let vars: Vec<crate::autodiff::Var> = params.iter().map(|&p| tape.var(p)).collect();
        let (theta, alpha) = if pinn {
            let (t, a) = vars.split_at(n_net);
            (t, Some(a[0]))
        } else {
            (&vars[..], None)
        };

        let d = data_loss_vars(&tape, net, theta, &train_ds);
        let (objective, data_value, physics_value, lambda_p) = if pinn {
            let p = physics_loss_vars(
                &tape,
                net,
                theta,
                prob.expect("checked above"),
                embed.as_ref().expect("set for pinn"),
            );
            let alpha = alpha.expect("pinn");
            let total = compose_vars(alpha, d, p);
            let objective = match cfg.mode {
                TrainMode::Pinn => total,
                TrainMode::PinnAlternate => {
                    // Even epochs step on the weighted data term, odd epochs
                    // on the weighted physics term; α learns through the
                    // weights either way.
                    let lambda_d = alpha.sigmoid();
                    if epoch % 2 == 1 {
                        lambda_d * d
                    } else {
                        (1.0 - lambda_d) * p
                    }
                }
                TrainMode::DataOnly => unreachable!(),
            };
            let w = blend_weights(params[n_all - 1])?;
            (objective, d.value(), p.value(), w.lambda_p)
        } else {
            (d, d.value(), 0.0, 0.0)
        };

        let data_loss = data_value;
        let physics_loss = physics_value;
        let total_loss = if pinn {
            (1.0 - lambda_p) * data_loss + lambda_p * physics_loss
        } else {
            data_loss
        };
        if !total_loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }

        eval_net.set_params(&params[..n_net])?;
        let val_preds: Vec<f64> = val_ds.features.iter().map(|r| eval_net.forward(r)).collect();
        let val_mape = mape(&val_ds.targets, &val_preds)?.mape;

        records.push(EpochRecord {
            epoch,
            total_loss,
            data_loss,
            physics_loss,
            lambda_p,
            val_mape,
        });

        let improved = val_mape < stopper.best_metric();
        let stop = stopper.observe(epoch, val_mape);
        if improved {
            best_params.copy_from_slice(&params);
        }
        if stop {
            break;
        }

        let grads = tape.gradient(objective, &vars)?;
        let lr = schedule_lr(cfg.learning_rate, iter, cfg.schedule);
        adam_step_scaled(
            &mut params,
            &grads,
            &scales,
            &mut state,
            lr,
            cfg.beta1,
            cfg.beta2,
            cfg.eps,
        )?;
    }

    let mut out_net = net.clone();
    out_net.set_params(&best_params[..n_net])?;
    let out_neuron = if pinn {
        BlendingNeuron::new(best_params[n_all - 1])?
    } else {
        neuron.unwrap_or_default()
    };
    let report = TrainReport {
        final_epoch: records.len(),
        best_epoch: stopper.best_epoch(),
        best_val_mape: stopper.best_metric(),
        epochs: records,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok((out_net, out_neuron, report))
}

/// Train a network. `DataOnly` ignores `neuron`/`prob`; the PINN modes
/// require both. Returns the parameters of the best validation epoch (not the
/// last), the final blending scalar, and the epoch-by-epoch report.
pub fn train(
    net: &Mlp,
    neuron: Option<BlendingNeuron>,
    ds: &Dataset,
    prob: Option<&PdeProblem>,
    cfg: &TrainConfig,
) -> Result<(Mlp, BlendingNeuron, TrainReport)> {
    train_scaled(net, neuron, ds, prob, cfg, None)
}
