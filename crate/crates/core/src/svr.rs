//! ε-insensitive support vector regression trained by sequential minimal
//! optimization (SMO).
//!
//! The dual is solved over the 2N box variables (α, α*), each in [0, C], with
//! the equality constraint Σ(α − α*) = 0. Every iteration picks the maximal
//! KKT-violating pair across both halves, takes the analytic two-variable
//! step, and clips it to the box. The kernel matrix is precomputed; the
//! per-point predictions `e = Kβ` are updated incrementally, so one iteration
//! costs O(N).

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gp::RbfKernel;

/// Convergence threshold on the maximal KKT violation.
pub const SMO_TOL: f64 = 1e-4;
/// Iteration budget per fitted model, as a multiple of the training size.
pub const SMO_MAX_ITER_FACTOR: usize = 100;
/// Curvature floor for degenerate (duplicate-point) pairs.
const TAU: f64 = 1e-12;

/// Fitted ε-SVR: dual coefficients β = α − α* aligned with the training
/// rows, bias, and the kernel.
#[derive(Clone, Debug)]
pub struct SvrModel {
    kernel: RbfKernel,
    c: f64,
    epsilon: f64,
    xs: Vec<Vec<f64>>,
    betas: Vec<f64>,
    bias: f64,
    iterations: usize,
    final_violation: f64,
}

impl SvrModel {
    /// β_i = α_i − α*_i per training row; |β_i| ≤ C, Σβ = 0.
    pub fn dual_coefficients(&self) -> &[f64] {
        &self.betas
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn cost(&self) -> f64 {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Rows with a nonzero dual coefficient.
    pub fn n_support(&self) -> usize {
        self.betas.iter().filter(|b| **b != 0.0).count()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// KKT violation at the last working-set scan (≤ tolerance on success).
    pub fn final_violation(&self) -> f64 {
        self.final_violation
    }
}

struct Scan {
    /// max over the "push β up" candidates of (target − prediction ∓ ε)
    m_val: f64,
    m_idx: usize,
    m_star: bool,
    /// min over the "push β down" candidates
    big_m_val: f64,
    big_m_idx: usize,
    big_m_star: bool,
}

/// One maximal-violating-pair scan over both variable halves.
///
/// For data point k with prediction-without-bias `e_k`:
/// raising β (via α up when β may rise, or α* down) profits at rate
/// `y − e − ε` resp. `y − e + ε`; lowering β mirrors it. The bias b must
/// separate all raise-rates from all lower-rates, so the violation is
/// `m − M` and the midpoint is the bias estimate.
fn scan(z_a: &[f64], z_b: &[f64], e: &[f64], ys: &[f64], c: f64, eps: f64) -> Scan {
    let mut s = Scan {
        m_val: f64::NEG_INFINITY,
        m_idx: 0,
        m_star: false,
        big_m_val: f64::INFINITY,
        big_m_idx: 0,
        big_m_star: false,
    };
    for k in 0..ys.len() {
        let r = ys[k] - e[k];
        // α half (label +1): raising is allowed while α < C, lowering while α > 0.
        if z_a[k] < c && r - eps > s.m_val {
            s.m_val = r - eps;
            s.m_idx = k;
            s.m_star = false;
        }
        if z_a[k] > 0.0 && r - eps < s.big_m_val {
            s.big_m_val = r - eps;
            s.big_m_idx = k;
            s.big_m_star = false;
        }
        // α* half (label −1): raising β means shrinking α*, and vice versa.
        if z_b[k] > 0.0 && r + eps > s.m_val {
            s.m_val = r + eps;
            s.m_idx = k;
            s.m_star = true;
        }
        if z_b[k] < c && r + eps < s.big_m_val {
            s.big_m_val = r + eps;
            s.big_m_idx = k;
            s.big_m_star = true;
        }
    }
    s
}

/// Fit with an explicit KKT tolerance (the public entry point fixes it at
/// [`SMO_TOL`]).
pub fn svr_fit_tol(ds: &Dataset, c: f64, gamma: f64, epsilon: f64, tol: f64) -> Result<SvrModel> {
    let kernel = RbfKernel::new(gamma)?;
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "SVR cost C must be positive and finite, got {c}"
        )));
    }
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "SVR epsilon must be non-negative and finite, got {epsilon}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "SMO tolerance must be positive, got {tol}"
        )));
    }
    let n = ds.n_rows();
    let ys = &ds.targets;

    let mut gram = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval(&ds.features[i], &ds.features[j])?;
            gram[i][j] = k;
            gram[j][i] = k;
        }
    }

    let mut z_a = vec![0.0f64; n]; // α
    let mut z_b = vec![0.0f64; n]; // α*
    let mut e = vec![0.0f64; n]; // Kβ
    let max_iter = SMO_MAX_ITER_FACTOR * n;
    let mut iterations = 0usize;
    let mut last = scan(&z_a, &z_b, &e, ys, c, epsilon);

    while last.m_val - last.big_m_val > tol {
        if iterations >= max_iter {
            return Err(Error::SmoNonConvergence {
                iterations,
                kkt_violation: last.m_val - last.big_m_val,
            });
        }
        iterations += 1;

        let (i, i_star) = (last.m_idx, last.m_star);
        let (j, j_star) = (last.big_m_idx, last.big_m_star);
        let kappa = (gram[i][i] + gram[j][j] - 2.0 * gram[i][j]).max(TAU);
        let mut t = (last.m_val - last.big_m_val) / kappa;

        // Box caps: the raise side moves α up or α* down; the lower side
        // moves α down or α* up.
        let cap_i = if i_star { z_b[i] } else { c - z_a[i] };
        let cap_j = if j_star { c - z_b[j] } else { z_a[j] };
        t = t.min(cap_i).min(cap_j);

        // A capped step lands exactly on the bound. Snapping matters: leaving
        // a rounding-sized residue keeps the variable in the working set with
        // a cap too small to make progress, and the same pair is re-picked
        // forever.
        if i_star {
            z_b[i] = if t >= cap_i { 0.0 } else { z_b[i] - t };
        } else {
            z_a[i] = if t >= cap_i { c } else { z_a[i] + t };
        }
        if j_star {
            z_b[j] = if t >= cap_j { c } else { z_b[j] + t };
        } else {
            z_a[j] = if t >= cap_j { 0.0 } else { z_a[j] - t };
        }

        // β_i rose by t, β_j fell by t.
        for k in 0..n {
            e[k] += t * (gram[k][i] - gram[k][j]);
        }
        last = scan(&z_a, &z_b, &e, ys, c, epsilon);
    }

    let bias = match (
        last.m_val.is_finite(),
        last.big_m_val.is_finite(),
    ) {
        (true, true) => 0.5 * (last.m_val + last.big_m_val),
        (true, false) => last.m_val,
        (false, true) => last.big_m_val,
        (false, false) => 0.0,
    };
    let betas: Vec<f64> = z_a.iter().zip(&z_b).map(|(a, b)| a - b).collect();
    Ok(SvrModel {
        kernel,
        c,
        epsilon,
        xs: ds.features.clone(),
        betas,
        bias,
        iterations,
        final_violation: (last.m_val - last.big_m_val).max(0.0),
    })
}

/// Fit an ε-SVR with the standard tolerance.
pub fn svr_fit(ds: &Dataset, c: f64, gamma: f64, epsilon: f64) -> Result<SvrModel> {
    svr_fit_tol(ds, c, gamma, epsilon, SMO_TOL)
}

/// `f(x) = Σ β_i k(x_i, x) + b`, summing only over support vectors.
pub fn svr_predict(model: &SvrModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.xs[0].len() {
        return Err(Error::DimensionMismatch {
            expected: model.xs[0].len(),
            found: x.len(),
        });
    }
    let mut f = model.bias;
    for (xi, &b) in model.xs.iter().zip(&model.betas) {
        if b != 0.0 {
            f += b * model.kernel.eval(xi, x)?;
        }
    }
    Ok(f)
}

/// Dual objective `W(β) = yᵀβ − ½βᵀKβ − ε‖β‖₁` (the quantity SMO maximizes).
pub fn dual_objective(ds: &Dataset, gamma: f64, epsilon: f64, betas: &[f64]) -> Result<f64> {
    if betas.len() != ds.n_rows() {
        return Err(Error::ParamCountMismatch {
            expected: ds.n_rows(),
            found: betas.len(),
        });
    }
    let kernel = RbfKernel::new(gamma)?;
    let mut w = 0.0;
    for (i, bi) in betas.iter().enumerate() {
        w += ds.targets[i] * bi - epsilon * bi.abs();
        for (j, bj) in betas.iter().enumerate() {
            w -= 0.5 * bi * bj * kernel.eval(&ds.features[i], &ds.features[j])?;
        }
    }
    Ok(w)
}
