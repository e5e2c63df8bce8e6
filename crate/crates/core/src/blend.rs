//! Learnable blending of data-driven and physics-driven loss terms.
//!
//! A single trainable scalar `α` sets the mixture through a sigmoid:
//! `λ_d = σ(α)`, `λ_p = 1 − σ(α)`, so both weights stay strictly inside
//! `(0, 1)` and sum to one by construction. The composite loss is
//! `L = λ_d·L_data + λ_p·L_physics`; `α` receives gradients through the same
//! backward pass as the network parameters.
//!
//! Every loss term exists in two forms that share the same generic code path:
//! a plain `f64` evaluator and a tape-variable builder used during training.
//! The two produce bit-identical values.

use serde::{Deserialize, Serialize};

use crate::autodiff::{sigmoid_f64, Jet, Tape, Var};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mlp::Mlp;
use crate::pde::{residual_terms, PdeProblem, TemperatureField};

/// The trainable blending scalar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendingNeuron {
    pub alpha: f64,
}

impl BlendingNeuron {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "blending scalar must be finite, got {alpha}"
            )));
        }
        Ok(BlendingNeuron { alpha })
    }

    pub fn weights(self) -> BlendWeights {
        blend_weights(self.alpha).expect("finite by construction")
    }
}

impl Default for BlendingNeuron {
    /// `α = 0` starts the mixture balanced at `λ_d = λ_p = 0.5`.
    fn default() -> Self {
        BlendingNeuron { alpha: 0.0 }
    }
}

/// The derived loss weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendWeights {
    pub lambda_d: f64,
    pub lambda_p: f64,
}

/// `(σ(α), 1 − σ(α))`. Stable for `|α|` up to ~700; the weights sum to one
/// exactly in floating point.
pub fn blend_weights(alpha: f64) -> Result<BlendWeights> {
    if !alpha.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "blending scalar must be finite, got {alpha}"
        )));
    }
    let lambda_d = sigmoid_f64(alpha);
    Ok(BlendWeights {
        lambda_d,
        lambda_p: 1.0 - lambda_d,
    })
}

/// One composite-loss evaluation, all terms reported.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub data_loss: f64,
    pub physics_loss: f64,
    pub weights: BlendWeights,
    pub total: f64,
}

/// Weighted combination `λ_d·data + λ_p·physics`.
pub fn compose(data_loss: f64, physics_loss: f64, weights: BlendWeights) -> LossBreakdown {
    LossBreakdown {
        data_loss,
        physics_loss,
        weights,
        total: weights.lambda_d * data_loss + weights.lambda_p * physics_loss,
    }
}

/// Mean squared error of the network over a dataset.
pub fn data_loss(net: &Mlp, ds: &Dataset) -> Result<f64> {
    if ds.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut sum = 0.0;
    for (row, &y) in ds.features.iter().zip(&ds.targets) {
        let r = net.forward(row) - y;
        sum += r * r;
    }
    Ok(sum / ds.n_rows() as f64)
}

/// Mean squared residual over the collocation set plus the weighted boundary
/// penalty.
pub fn physics_loss(field: &impl TemperatureField, prob: &PdeProblem) -> Result<f64> {
    if prob.collocation.is_empty() {
        return Err(Error::InvalidConfig(
            "collocation set must be non-empty".to_string(),
        ));
    }
    let mut sum = 0.0;
    for &x in &prob.collocation {
        let r = prob.residual_at(field, x)?;
        sum += r * r;
    }
    Ok(sum / prob.collocation.len() as f64 + prob.boundary_penalty(field)?)
}

/// Full composite loss for a single-input network acting directly as the
/// temperature field.
pub fn composite_loss(
    net: &Mlp,
    ds: &Dataset,
    prob: &PdeProblem,
    neuron: BlendingNeuron,
) -> Result<LossBreakdown> {
    let d = data_loss(net, ds)?;
    let p = physics_loss(net, prob)?;
    Ok(compose(d, p, neuron.weights()))
}

/// How the scalar physics coordinate maps onto the network's input vector:
/// `x` replaces coordinate `dim`, every other coordinate comes from `fill`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsInput {
    pub dim: usize,
    pub fill: Vec<f64>,
}

impl PhysicsInput {
    /// Identity embedding for single-input networks.
    pub fn direct() -> Self {
        PhysicsInput {
            dim: 0,
            fill: vec![0.0],
        }
    }

    pub fn validate(&self, n_inputs: usize) -> Result<()> {
        if self.dim >= self.fill.len() || self.fill.len() != n_inputs {
            return Err(Error::InvalidConfig(format!(
                "physics input axis {} with {} coordinates does not fit a {}-input network",
                self.dim,
                self.fill.len(),
                n_inputs
            )));
        }
        Ok(())
    }
}

/// Tape-variable mean squared error; mirrors [`data_loss`] operation for
/// operation.
pub fn data_loss_vars<'t>(
    tape: &'t Tape,
    net: &Mlp,
    params: &[Var<'t>],
    ds: &Dataset,
) -> Var<'t> {
    let mut sum = tape.constant(0.0);
    for (row, &y) in ds.features.iter().zip(&ds.targets) {
        let inputs: Vec<Var<'t>> = row.iter().map(|&x| tape.constant(x)).collect();
        let r = net.forward_scalars(params, &inputs)[0] - y;
        sum = sum + r * r;
    }
    sum / ds.n_rows() as f64
}

/// Tape-variable physics loss; mirrors [`physics_loss`] operation for
/// operation, with residual derivatives carried by jets over tape variables
/// so parameter gradients flow through `T′` and `T″` exactly.
pub fn physics_loss_vars<'t>(
    tape: &'t Tape,
    net: &Mlp,
    params: &[Var<'t>],
    prob: &PdeProblem,
    embed: &PhysicsInput,
) -> Var<'t> {
    let param_jets: Vec<Jet<Var<'t>>> = params.iter().map(|&p| Jet::constant(p)).collect();
    let mut sum = tape.constant(0.0);
    for &x in &prob.collocation {
        let inputs: Vec<Jet<Var<'t>>> = embed
            .fill
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if i == embed.dim {
                    Jet::variable(tape.constant(x))
                } else {
                    Jet::constant(tape.constant(c))
                }
            })
            .collect();
        let u = net.forward_scalars(&param_jets, &inputs)[0];
        let f = tape.constant(prob.source.eval(x));
        let r = residual_terms(prob.kind, &prob.props, prob.c_k, u.v, u.d1, u.d2, f);
        sum = sum + r * r;
    }
    let mean = sum / prob.collocation.len() as f64;

    let (a, b) = prob.domain;
    let boundary_value = |x: f64| {
        let inputs: Vec<Var<'t>> = embed
            .fill
            .iter()
            .enumerate()
            .map(|(i, &c)| tape.constant(if i == embed.dim { x } else { c }))
            .collect();
        net.forward_scalars(params, &inputs)[0]
    };
    let ra = boundary_value(a) - prob.boundary.0;
    let rb = boundary_value(b) - prob.boundary.1;
    let raw = ra.powi(2) + rb.powi(2);
    mean + raw * prob.boundary_weight
}

/// Tape-variable composite: `σ(α)·data + (1 − σ(α))·physics`.
pub fn compose_vars<'t>(alpha: Var<'t>, data: Var<'t>, physics: Var<'t>) -> Var<'t> {
    let lambda_d = alpha.sigmoid();
    let lambda_p = 1.0 - lambda_d;
    lambda_d * data + lambda_p * physics
}
