//! One-dimensional PDE residual problems with analytic reference solutions.
//!
//! Three reduced problems stand in for the full conjugate heat-transfer
//! system: steady conduction, conduction with temperature-dependent
//! conductivity, and convection–diffusion. Each exposes a pointwise residual
//! `R(x)` that vanishes on the exact solution, evaluated at a fixed set of
//! collocation points plus a Dirichlet boundary penalty.
//!
//! Residual formulas are written once over [`Scalar`], so the same code
//! computes plain values, reverse-mode parameter gradients, and
//! tangent-propagated input derivatives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{input_derivs, DualValue, Scalar};
use crate::error::{Error, Result};
use crate::mlp::Mlp;

/// Material and flow constants. The momentum-equation fields (`mu`, `g`,
/// `p_ref`) are recorded for bookkeeping but unused by the reduced problems.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidProperties {
    pub rho: f64,
    pub mu: f64,
    pub cp: f64,
    pub k_f: f64,
    pub k_s: f64,
    pub g: f64,
    pub u_adv: f64,
    pub p_ref: f64,
}

impl FluidProperties {
    /// Unit-scale properties for desk-size problems.
    pub fn unit() -> Self {
        FluidProperties {
            rho: 1.0,
            mu: 1.0e-3,
            cp: 1.0,
            k_f: 1.0,
            k_s: 1.0,
            g: 9.81,
            u_adv: 1.0,
            p_ref: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho", self.rho),
            ("cp", self.cp),
            ("k_f", self.k_f),
            ("k_s", self.k_s),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "fluid property {name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for FluidProperties {
    fn default() -> Self {
        Self::unit()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PdeKind {
    /// `R = k_s·T″ + f`
    Conduction1D,
    /// `R = k′(T)·(T′)² + k(T)·T″ + f` with `k(T) = k_s·(1 + c_k·T)`
    ConductionVarK1D,
    /// `R = ρ·c_p·u_adv·T′ − k_f·T″ − f`
    ConvDiff1D,
}

/// Source term `f(x)`, chosen from a closed family so problems stay
/// serializable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTerm {
    Zero,
    Constant(f64),
    /// `f(x) = amplitude · sin(πx)`
    SinPi { amplitude: f64 },
}

impl SourceTerm {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SourceTerm::Zero => 0.0,
            SourceTerm::Constant(c) => c,
            SourceTerm::SinPi { amplitude } => amplitude * (std::f64::consts::PI * x).sin(),
        }
    }
}

/// How collocation points are placed in the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingScheme {
    UniformRandom,
    EquiSpaced,
}

/// Draw `n` collocation points in `[a, b]`. Equispaced sets include both
/// endpoints for `n ≥ 2` (a single point sits at the midpoint); random sets
/// are uniform and deterministic per seed.
pub fn sample_collocation(
    domain: (f64, f64),
    n: usize,
    scheme: SamplingScheme,
    seed: u64,
) -> Result<Vec<f64>> {
    let (a, b) = domain;
    if !(a < b) {
        return Err(Error::InvalidConfig(format!(
            "domain must satisfy a < b, got [{a}, {b}]"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidConfig(
            "collocation set must be non-empty".to_string(),
        ));
    }
    Ok(match scheme {
        SamplingScheme::EquiSpaced => {
            if n == 1 {
                vec![0.5 * (a + b)]
            } else {
                // Interpolate as a·(1−t) + b·t so both endpoints are exact,
                // and clamp: the multiply-then-divide form can overshoot the
                // upper endpoint by one ulp.
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        (a * (1.0 - t) + b * t).clamp(a, b)
                    })
                    .collect()
            }
        }
        SamplingScheme::UniformRandom => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.random_range(a..b)).collect()
        }
    })
}

/// A scalar temperature field with first and second spatial derivatives.
///
/// Implemented by single-input networks, by closures over [`DualValue`]
/// arithmetic (exact derivatives), by closed-form triples, and by a
/// finite-difference fallback for cross-checking.
pub trait TemperatureField {
    /// `(T(x), T′(x), T″(x))`
    fn eval(&self, x: f64) -> Result<(f64, f64, f64)>;
}

impl TemperatureField for Mlp {
    fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        self.forward_with_input_derivs(x)
    }
}

/// Field defined by a closure built from [`DualValue`] primitives; derivatives
/// are exact via tangent propagation.
pub struct DualField<F: Fn(DualValue) -> DualValue>(pub F);

impl<F: Fn(DualValue) -> DualValue> TemperatureField for DualField<F> {
    fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        input_derivs(&self.0, x)
    }
}

/// Field given directly as a closed-form `(T, T′, T″)` triple — for injecting
/// analytic solutions whose derivatives are known exactly.
pub struct ExplicitField<F: Fn(f64) -> (f64, f64, f64)>(pub F);

impl<F: Fn(f64) -> (f64, f64, f64)> TemperatureField for ExplicitField<F> {
    fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        Ok((self.0)(x))
    }
}

/// Central-difference fallback field over any scalar function; used only to
/// cross-check exact-derivative paths.
pub struct FiniteDiffField<F: Fn(f64) -> f64> {
    pub f: F,
    pub h: f64,
}

impl<F: Fn(f64) -> f64> TemperatureField for FiniteDiffField<F> {
    fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        let (f, h) = (&self.f, self.h);
        let (lo, mid, hi) = (f(x - h), f(x), f(x + h));
        Ok((
            mid,
            (hi - lo) / (2.0 * h),
            (hi - 2.0 * mid + lo) / (h * h),
        ))
    }
}

/// A multi-input network restricted to one input axis: `x` replaces
/// coordinate `dim`, all other coordinates come from `fill`.
pub struct AxisField<'a> {
    net: &'a Mlp,
    dim: usize,
    fill: Vec<f64>,
}

impl<'a> AxisField<'a> {
    pub fn new(net: &'a Mlp, dim: usize, fill: Vec<f64>) -> Result<Self> {
        if dim >= fill.len() || fill.len() != net.arch().n_inputs {
            return Err(Error::InvalidConfig(format!(
                "axis {dim} with {} fill coordinates does not match a {}-input network",
                fill.len(),
                net.arch().n_inputs
            )));
        }
        Ok(AxisField { net, dim, fill })
    }
}

impl TemperatureField for AxisField<'_> {
    fn eval(&self, x: f64) -> Result<(f64, f64, f64)> {
        let params: Vec<DualValue> = self
            .net
            .params()
            .iter()
            .map(|&p| DualValue::constant(p))
            .collect();
        input_derivs(
            |xj| {
                let inputs: Vec<DualValue> = self
                    .fill
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| {
                        if i == self.dim {
                            xj
                        } else {
                            DualValue::constant(c)
                        }
                    })
                    .collect();
                self.net.forward_scalars(&params, &inputs)[0]
            },
            x,
        )
    }
}

/// Pointwise residual from the field triple `(t, t1, t2)` at one location,
/// with the source value `f` already evaluated there. Scalar-generic so the
/// identical formula serves evaluation and training.
pub fn residual_terms<T: Scalar>(
    kind: PdeKind,
    props: &FluidProperties,
    c_k: f64,
    t: T,
    t1: T,
    t2: T,
    f: T,
) -> T {
    match kind {
        PdeKind::Conduction1D => t.lift(props.k_s) * t2 + f,
        PdeKind::ConductionVarK1D => {
            // k(T) = k_s·(1 + c_k·T) ⇒ d/dx(k·T′) = k_s·c_k·(T′)² + k(T)·T″
            let k_prime = t.lift(props.k_s * c_k);
            let k = t.lift(props.k_s) * (t.lift(1.0) + t.lift(c_k) * t);
            k_prime * t1 * t1 + k * t2 + f
        }
        PdeKind::ConvDiff1D => t.lift(props.rho * props.cp * props.u_adv) * t1 - t.lift(props.k_f) * t2 - f,
    }
}

/// Exact steady convection–diffusion profile on `[0, 1]` with boundary
/// values `(0, 1)`: `T(x) = (e^{Pe·x} − 1)/(e^{Pe} − 1)`.
pub fn convdiff_exact(pe: f64, x: f64) -> f64 {
    ((pe * x).exp() - 1.0) / (pe.exp() - 1.0)
}

/// Residual values at every collocation point plus the weighted boundary
/// penalty.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualEval {
    pub residuals: Vec<f64>,
    pub boundary_penalty: f64,
}

/// A 1-D residual problem: equation kind, domain, Dirichlet boundary values,
/// source term, material constants, and a fixed collocation set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeProblem {
    pub kind: PdeKind,
    pub domain: (f64, f64),
    pub boundary: (f64, f64),
    pub source: SourceTerm,
    pub props: FluidProperties,
    pub collocation: Vec<f64>,
    pub boundary_weight: f64,
    /// Conductivity slope for [`PdeKind::ConductionVarK1D`]; ignored otherwise.
    pub c_k: f64,
}

pub const DEFAULT_COLLOCATION: usize = 64;
pub const DEFAULT_C_K: f64 = 0.1;

impl PdeProblem {
    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.domain;
        if !(a < b) {
            return Err(Error::InvalidConfig(format!(
                "domain must satisfy a < b, got [{a}, {b}]"
            )));
        }
        if self.collocation.is_empty() {
            return Err(Error::InvalidConfig(
                "collocation set must be non-empty".to_string(),
            ));
        }
        for &x in &self.collocation {
            if !(x >= a && x <= b) {
                return Err(Error::OutsideDomain { x, lo: a, hi: b });
            }
        }
        if !(self.boundary_weight >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "boundary_weight must be non-negative, got {}",
                self.boundary_weight
            )));
        }
        if !(self.boundary.0.is_finite() && self.boundary.1.is_finite()) {
            return Err(Error::InvalidConfig(
                "boundary values must be finite".to_string(),
            ));
        }
        self.props.validate()
    }

    /// Steady conduction on `[0, 1]` whose exact solution is `sin(πx)`:
    /// source `f = k_s·π²·sin(πx)`, boundary `(0, 0)`.
    pub fn conduction1d(seed: u64) -> Self {
        let props = FluidProperties::unit();
        PdeProblem {
            kind: PdeKind::Conduction1D,
            domain: (0.0, 1.0),
            boundary: (0.0, 0.0),
            source: SourceTerm::SinPi {
                amplitude: props.k_s * std::f64::consts::PI * std::f64::consts::PI,
            },
            props,
            collocation: sample_collocation(
                (0.0, 1.0),
                DEFAULT_COLLOCATION,
                SamplingScheme::UniformRandom,
                seed,
            )
            .expect("static domain"),
            boundary_weight: 1.0,
            c_k: DEFAULT_C_K,
        }
    }

    /// Conduction with `k(T) = k_s·(1 + c_k·T)` on `[0, 1]`.
    pub fn conduction_vark1d(seed: u64) -> Self {
        PdeProblem {
            kind: PdeKind::ConductionVarK1D,
            ..Self::conduction1d(seed)
        }
    }

    /// Convection–diffusion on `[0, 1]` at the given Peclet number (unit
    /// density, heat capacity, and conductivity; `u_adv` carries Pe). Exact
    /// solution [`convdiff_exact`], boundary `(0, 1)`.
    pub fn convdiff1d(peclet: f64, seed: u64) -> Self {
        let props = FluidProperties {
            u_adv: peclet,
            ..FluidProperties::unit()
        };
        PdeProblem {
            kind: PdeKind::ConvDiff1D,
            domain: (0.0, 1.0),
            boundary: (0.0, 1.0),
            source: SourceTerm::Zero,
            props,
            collocation: sample_collocation(
                (0.0, 1.0),
                DEFAULT_COLLOCATION,
                SamplingScheme::UniformRandom,
                seed,
            )
            .expect("static domain"),
            boundary_weight: 1.0,
            c_k: DEFAULT_C_K,
        }
    }

    /// Peclet number `ρ·c_p·u_adv·(b−a)/k_f`.
    pub fn peclet(&self) -> f64 {
        let (a, b) = self.domain;
        self.props.rho * self.props.cp * self.props.u_adv * (b - a) / self.props.k_f
    }

    /// Pointwise residual of `field` at `x`.
    pub fn residual_at(&self, field: &impl TemperatureField, x: f64) -> Result<f64> {
        let (a, b) = self.domain;
        if !(x >= a && x <= b) {
            return Err(Error::OutsideDomain { x, lo: a, hi: b });
        }
        let (t, t1, t2) = field.eval(x)?;
        Ok(residual_terms(
            self.kind,
            &self.props,
            self.c_k,
            t,
            t1,
            t2,
            self.source.eval(x),
        ))
    }

    /// Weighted Dirichlet mismatch
    /// `boundary_weight · [(T(a) − T_a)² + (T(b) − T_b)²]`.
    pub fn boundary_penalty(&self, field: &impl TemperatureField) -> Result<f64> {
        let (a, b) = self.domain;
        let (ta, _, _) = field.eval(a)?;
        let (tb, _, _) = field.eval(b)?;
        let raw = (ta - self.boundary.0).powi(2) + (tb - self.boundary.1).powi(2);
        Ok(self.boundary_weight * raw)
    }

    /// Residuals at all collocation points plus the boundary penalty.
    pub fn evaluate(&self, field: &impl TemperatureField) -> Result<ResidualEval> {
        let residuals = self
            .collocation
            .iter()
            .map(|&x| self.residual_at(field, x))
            .collect::<Result<Vec<f64>>>()?;
        Ok(ResidualEval {
            residuals,
            boundary_penalty: self.boundary_penalty(field)?,
        })
    }
}
