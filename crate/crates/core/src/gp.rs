//! Gaussian-process regression with an RBF kernel.
//!
//! Targets are standardized internally (zero-mean prior on the standardized
//! scale) and predictions are mapped back, so callers work in original units.
//! The Gram matrix gets a geometric jitter ladder if plain Cholesky fails.

use nalgebra::{DMatrix, DVector, Dyn};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// `k(x, x′) = exp(−γ‖x − x′‖²)`; `k(x,x) = 1`, symmetric, values in (0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RbfKernel {
    pub gamma: f64,
}

impl RbfKernel {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "RBF gamma must be a positive finite number, got {gamma}"
            )));
        }
        Ok(RbfKernel { gamma })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                found: b.len(),
            });
        }
        let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        Ok((-self.gamma * sq).exp())
    }
}

/// Convenience free function matching the kernel formula.
pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> Result<f64> {
    RbfKernel::new(gamma)?.eval(a, b)
}

const JITTER_BASE: f64 = 1e-10;
const JITTER_MAX: f64 = 1e-4;

/// Cholesky of `mat + jitter·I`, first with no jitter, then climbing a
/// geometric ladder 1e-10 ×10 … 1e-4. Returns the factor and the jitter that
/// succeeded.
fn cholesky_with_jitter(
    mat: &DMatrix<f64>,
) -> Result<(nalgebra::linalg::Cholesky<f64, Dyn>, f64)> {
    if let Some(chol) = mat.clone().cholesky() {
        return Ok((chol, 0.0));
    }
    let n = mat.nrows();
    let mut jitter = JITTER_BASE;
    while jitter <= JITTER_MAX * (1.0 + 1e-12) {
        let mut jittered = mat.clone();
        for i in 0..n {
            jittered[(i, i)] += jitter;
        }
        if let Some(chol) = jittered.cholesky() {
            return Ok((chol, jitter));
        }
        jitter *= 10.0;
    }
    Err(Error::CholeskyFailure {
        max_jitter: JITTER_MAX,
    })
}

/// Fitted Gaussian process: kernel, noise, training data, and the Cholesky
/// factor of `K + σ²I (+ jitter·I)` on the standardized-target scale.
#[derive(Clone, Debug)]
pub struct GpModel {
    kernel: RbfKernel,
    noise: f64,
    xs: Vec<Vec<f64>>,
    alpha: DVector<f64>,
    chol: nalgebra::linalg::Cholesky<f64, Dyn>,
    y_mean: f64,
    y_std: f64,
    jitter_used: f64,
    log_marginal_likelihood: f64,
}

impl GpModel {
    /// Log marginal likelihood of the standardized targets.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    pub fn n_train(&self) -> usize {
        self.xs.len()
    }

    /// Observation-noise variance the model was fitted with (standardized
    /// target scale).
    pub fn noise(&self) -> f64 {
        self.noise
    }
}

/// Fit a zero-prior-mean GP on standardized targets. `noise` is the variance
/// added to the Gram diagonal (standardized scale).
pub fn gp_fit(ds: &Dataset, gamma: f64, noise: f64) -> Result<GpModel> {
    let kernel = RbfKernel::new(gamma)?;
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "GP noise variance must be non-negative and finite, got {noise}"
        )));
    }
    let n = ds.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }

    let y_mean = ds.targets.iter().sum::<f64>() / n as f64;
    let var = ds.targets.iter().map(|y| (y - y_mean).powi(2)).sum::<f64>() / n as f64;
    let y_std = if var.sqrt() > 0.0 { var.sqrt() } else { 1.0 };
    let z = DVector::from_iterator(n, ds.targets.iter().map(|y| (y - y_mean) / y_std));

    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval(&ds.features[i], &ds.features[j])?;
            gram[(i, j)] = k;
            gram[(j, i)] = k;
        }
        gram[(i, i)] += noise;
    }

    let (chol, jitter_used) = cholesky_with_jitter(&gram)?;
    let alpha = chol.solve(&z);

    let log_det_half: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum();
    let lml = -0.5 * z.dot(&alpha)
        - log_det_half
        - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();

    Ok(GpModel {
        kernel,
        noise,
        xs: ds.features.clone(),
        alpha,
        chol,
        y_mean,
        y_std,
        jitter_used,
        log_marginal_likelihood: lml,
    })
}

/// Posterior mean and latent variance (no observation noise) at `x`, in
/// original target units.
pub fn gp_predict(model: &GpModel, x: &[f64]) -> Result<(f64, f64)> {
    let n = model.xs.len();
    let mut kstar = DVector::zeros(n);
    for (i, xi) in model.xs.iter().enumerate() {
        kstar[i] = model.kernel.eval(xi, x)?;
    }
    let mean_std = kstar.dot(&model.alpha);
    let v = model.chol.solve(&kstar);
    let var_std = (1.0 - kstar.dot(&v)).max(0.0);
    Ok((
        model.y_mean + model.y_std * mean_std,
        model.y_std * model.y_std * var_std,
    ))
}
