//! Fully connected feed-forward networks with scalar-generic evaluation.
//!
//! The forward pass is written once over [`Scalar`], so the same code path
//! serves plain evaluation (`f64`), reverse-mode parameter gradients
//! ([`Var`](crate::autodiff::Var)), and first/second input derivatives
//! ([`Jet`](crate::autodiff::Jet)). Hidden layers use a smooth activation;
//! the output layer is linear.
//!
//! Architectures are described by compact strings such as `2-[20,20,12]-1`
//! (inputs, hidden widths, outputs); `1-[]-1` is a plain affine map.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{input_derivs, DualValue, ParamLayout, Scalar};
use crate::error::{Error, Result};

const CHECKPOINT_VERSION: u32 = 1;

/// Hidden-layer activation. The output layer is always linear.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => z.sigmoid(),
        }
    }
}

/// Network shape: input width, hidden widths, output width.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ArchSpec {
    pub n_inputs: usize,
    pub hidden: Vec<usize>,
    pub n_outputs: usize,
}

impl ArchSpec {
    pub fn new(n_inputs: usize, hidden: Vec<usize>, n_outputs: usize) -> Result<Self> {
        if n_inputs == 0 || n_outputs == 0 || hidden.contains(&0) {
            return Err(Error::InvalidConfig(
                "layer widths must be positive".to_string(),
            ));
        }
        Ok(ArchSpec {
            n_inputs,
            hidden,
            n_outputs,
        })
    }

    /// `(fan_in, fan_out)` per dense layer, input to output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let widths: Vec<usize> = std::iter::once(self.n_inputs)
            .chain(self.hidden.iter().copied())
            .chain(std::iter::once(self.n_outputs))
            .collect();
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::layers(self.layer_shapes())
    }

    pub fn param_count(&self) -> usize {
        self.layout().param_count()
    }

    pub fn n_layers(&self) -> usize {
        self.hidden.len() + 1
    }
}

impl fmt::Display for ArchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let widths: Vec<String> = self.hidden.iter().map(|w| w.to_string()).collect();
        write!(
            f,
            "{}-[{}]-{}",
            self.n_inputs,
            widths.join(","),
            self.n_outputs
        )
    }
}

impl FromStr for ArchSpec {
    type Err = Error;

    /// Parse `"D-[h1,h2,...]-O"`, e.g. `"2-[20,20,12]-1"` or `"1-[]-1"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("malformed architecture string `{s}`"));
        let (inputs, rest) = s.split_once("-[").ok_or_else(bad)?;
        let (mid, outputs) = rest.split_once("]-").ok_or_else(bad)?;
        let n_inputs: usize = inputs.trim().parse().map_err(|_| bad())?;
        let n_outputs: usize = outputs.trim().parse().map_err(|_| bad())?;
        let hidden = if mid.trim().is_empty() {
            Vec::new()
        } else {
            mid.split(',')
                .map(|w| w.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        ArchSpec::new(n_inputs, hidden, n_outputs)
    }
}

impl TryFrom<String> for ArchSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ArchSpec> for String {
    fn from(a: ArchSpec) -> String {
        a.to_string()
    }
}

/// A dense network: architecture, hidden activation, and a flat parameter
/// vector (per layer: `fan_out × fan_in` weights row-major, then `fan_out`
/// biases).
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    arch: ArchSpec,
    activation: Activation,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    arch: ArchSpec,
    activation: Activation,
    params: Vec<f64>,
}

impl Mlp {
    /// Glorot-uniform weights (`U(-l, l)` with `l = sqrt(6/(fan_in+fan_out))`),
    /// zero biases. Deterministic for a fixed RNG state.
    pub fn init(arch: ArchSpec, activation: Activation, rng: &mut impl Rng) -> Self {
        let mut params = Vec::with_capacity(arch.param_count());
        for (fan_in, fan_out) in arch.layer_shapes() {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for _ in 0..fan_in * fan_out {
                params.push(rng.random_range(-limit..limit));
            }
            params.extend(std::iter::repeat_n(0.0, fan_out));
        }
        Mlp {
            arch,
            activation,
            params,
        }
    }

    pub fn from_params(arch: ArchSpec, activation: Activation, params: Vec<f64>) -> Result<Self> {
        if params.len() != arch.param_count() {
            return Err(Error::ParamCountMismatch {
                expected: arch.param_count(),
                found: params.len(),
            });
        }
        Ok(Mlp {
            arch,
            activation,
            params,
        })
    }

    pub fn arch(&self) -> &ArchSpec {
        &self.arch
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::ParamCountMismatch {
                expected: self.params.len(),
                found: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn layout(&self) -> ParamLayout {
        self.arch.layout()
    }

    /// Forward pass with caller-supplied parameter scalars (tape variables,
    /// jets, or plain floats); `params` must use this network's layout.
    pub fn forward_scalars<T: Scalar>(&self, params: &[T], inputs: &[T]) -> Vec<T> {
        debug_assert_eq!(params.len(), self.arch.param_count());
        debug_assert_eq!(inputs.len(), self.arch.n_inputs);
        let shapes = self.arch.layer_shapes();
        let mut acts: Vec<T> = inputs.to_vec();
        let mut next: Vec<T> = Vec::new();
        let mut offset = 0;
        for (li, &(fan_in, fan_out)) in shapes.iter().enumerate() {
            let last = li == shapes.len() - 1;
            next.clear();
            for j in 0..fan_out {
                let mut z = params[offset + fan_in * fan_out + j];
                for (k, &a) in acts.iter().enumerate() {
                    z = z + params[offset + j * fan_in + k] * a;
                }
                next.push(if last { z } else { self.activation.apply(z) });
            }
            std::mem::swap(&mut acts, &mut next);
            offset += fan_in * fan_out + fan_out;
        }
        acts
    }

    /// Scalar prediction for a single-output network.
    pub fn forward(&self, inputs: &[f64]) -> f64 {
        debug_assert_eq!(self.arch.n_outputs, 1);
        self.forward_scalars(&self.params, inputs)[0]
    }

    /// `(u, u', u'')` at `x` for a single-input single-output network,
    /// by exact tangent propagation.
    pub fn forward_with_input_derivs(&self, x: f64) -> Result<(f64, f64, f64)> {
        debug_assert_eq!(self.arch.n_inputs, 1);
        debug_assert_eq!(self.arch.n_outputs, 1);
        let params: Vec<DualValue> = self.params.iter().map(|&p| DualValue::constant(p)).collect();
        input_derivs(|xj| self.forward_scalars(&params, &[xj])[0], x)
    }

    /// Write a versioned JSON checkpoint.
    pub fn save_checkpoint(&self, path: &Path) -> Result<()> {
        let file = CheckpointFile {
            version: CHECKPOINT_VERSION,
            arch: self.arch.clone(),
            activation: self.activation,
            params: self.params.clone(),
        };
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| Error::Other(format!("checkpoint serialization failed: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    /// Read a checkpoint written by [`Mlp::save_checkpoint`]. Rejects version
    /// mismatches, parameter-count mismatches, and non-finite parameters.
    pub fn load_checkpoint(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: CheckpointFile = serde_json::from_str(&text)
            .map_err(|e| Error::MalformedCheckpoint(format!("{}: {e}", path.display())))?;
        if file.version != CHECKPOINT_VERSION {
            return Err(Error::MalformedCheckpoint(format!(
                "unsupported checkpoint version {} (expected {})",
                file.version, CHECKPOINT_VERSION
            )));
        }
        if file.params.len() != file.arch.param_count() {
            return Err(Error::MalformedCheckpoint(format!(
                "checkpoint holds {} parameters but architecture {} needs {}",
                file.params.len(),
                file.arch,
                file.arch.param_count()
            )));
        }
        if let Some(i) = file.params.iter().position(|p| !p.is_finite()) {
            return Err(Error::MalformedCheckpoint(format!(
                "non-finite parameter at index {i}"
            )));
        }
        Mlp::from_params(file.arch, file.activation, file.params)
    }
}
