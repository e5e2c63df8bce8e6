//! Scalar automatic differentiation.
//!
//! Two cooperating mechanisms:
//!
//! - A reverse-mode [`Tape`]: a Wengert list of scalar operations with cached
//!   local partials. One backward sweep yields the gradient of a recorded
//!   scalar with respect to every leaf [`Var`].
//! - Second-order forward tangents ([`Jet`]): truncated Taylor triples
//!   `(value, d/dx, d²/dx²)` propagated through the same primitive set.
//!
//! The two compose: a `Jet<Var>` carries tangent arithmetic whose components
//! are tape nodes, so an expression involving first or second *input*
//! derivatives of a network is still differentiable with respect to the
//! network *parameters*, exactly. `Jet<f64>` (aliased [`DualValue`]) is the
//! tape-free fast path for inference-time input derivatives.
//!
//! Supported primitives: `+`, `-`, `*`, `/`, `exp`, `ln`, `tanh`, `sigmoid`,
//! integer powers, and `sqrt`. Non-smooth primitives (`abs`, `max`) are
//! deliberately absent; residual definitions must stay smooth.
//!
//! A tape is single-threaded. Distinct tapes on distinct threads are
//! independent.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Range, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

#[derive(Clone, Copy)]
struct Node {
    value: f64,
    arity: u8,
    preds: [u32; 2],
    partials: [f64; 2],
}

/// Recording tape for reverse-mode differentiation.
///
/// Leaves are created with [`Tape::var`] (differentiable) or
/// [`Tape::constant`]; every arithmetic operation on [`Var`]s appends a node.
/// Domain faults during the forward pass (division by zero, `ln` of a
/// non-positive value, ...) poison the tape; [`Tape::gradient`] reports the
/// first fault instead of returning garbage.
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
    fault: RefCell<Option<String>>,
}

impl Tape {
    pub fn new() -> Self {
        Self::with_capacity(0)
    }

    pub fn with_capacity(n: usize) -> Self {
        Tape {
            nodes: RefCell::new(Vec::with_capacity(n)),
            fault: RefCell::new(None),
        }
    }

    /// Drop all recorded nodes (keeping capacity) and clear any fault.
    ///
    /// Any `Var` created before the call is invalidated; using one afterwards
    /// is a logic error.
    pub fn clear(&self) {
        self.nodes.borrow_mut().clear();
        *self.fault.borrow_mut() = None;
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Create a differentiable leaf.
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push(value, 0, [0, 0], [0.0, 0.0])
    }

    /// Create a constant leaf (zero gradient by construction).
    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push(value, 0, [0, 0], [0.0, 0.0])
    }

    fn push(&self, value: f64, arity: u8, preds: [u32; 2], partials: [f64; 2]) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let id = u32::try_from(nodes.len()).expect("tape longer than u32::MAX nodes");
        nodes.push(Node {
            value,
            arity,
            preds,
            partials,
        });
        Var { tape: self, id }
    }

    fn record_fault(&self, msg: String) {
        let mut fault = self.fault.borrow_mut();
        if fault.is_none() {
            *fault = Some(msg);
        }
    }

    /// First domain fault recorded during the forward pass, if any.
    pub fn fault(&self) -> Option<String> {
        self.fault.borrow().clone()
    }

    /// Reverse sweep: gradient of `output` with respect to each var in `wrt`.
    ///
    /// Deterministic; two sweeps over the same recording produce bit-identical
    /// results.
    pub fn gradient(&self, output: Var<'_>, wrt: &[Var<'_>]) -> Result<Vec<f64>> {
        if let Some(msg) = self.fault() {
            return Err(Error::ForwardFault(msg));
        }
        let nodes = self.nodes.borrow();
        if !nodes[output.id as usize].value.is_finite() {
            return Err(Error::ForwardFault(
                "non-finite value in forward pass".to_string(),
            ));
        }
        let mut adjoint = vec![0.0; nodes.len()];
        adjoint[output.id as usize] = 1.0;
        for i in (0..=output.id as usize).rev() {
            let a = adjoint[i];
            if a == 0.0 {
                continue;
            }
            let node = &nodes[i];
            for k in 0..node.arity as usize {
                adjoint[node.preds[k] as usize] += a * node.partials[k];
            }
        }
        Ok(wrt.iter().map(|v| adjoint[v.id as usize]).collect())
    }
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tape").field("len", &self.len()).finish()
    }
}

/// Handle to a scalar recorded on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    id: u32,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var(#{} = {})", self.id, self.value())
    }
}

impl<'t> Var<'t> {
    pub fn value(self) -> f64 {
        self.tape.nodes.borrow()[self.id as usize].value
    }

    fn unary(self, value: f64, partial: f64) -> Var<'t> {
        self.tape.push(value, 1, [self.id, 0], [partial, 0.0])
    }

    fn binary(self, rhs: Var<'t>, value: f64, pa: f64, pb: f64) -> Var<'t> {
        debug_assert!(std::ptr::eq(self.tape, rhs.tape), "vars from different tapes");
        self.tape.push(value, 2, [self.id, rhs.id], [pa, pb])
    }

    pub fn tanh(self) -> Var<'t> {
        let t = self.value().tanh();
        self.unary(t, 1.0 - t * t)
    }

    pub fn exp(self) -> Var<'t> {
        let e = self.value().exp();
        self.unary(e, e)
    }

    pub fn ln(self) -> Var<'t> {
        let v = self.value();
        if v <= 0.0 {
            self.tape
                .record_fault(format!("ln of non-positive value {v}"));
        }
        self.unary(v.ln(), 1.0 / v)
    }

    pub fn sqrt(self) -> Var<'t> {
        let v = self.value();
        if v < 0.0 {
            self.tape
                .record_fault(format!("sqrt of negative value {v}"));
        }
        let s = v.sqrt();
        self.unary(s, 0.5 / s)
    }

    pub fn sigmoid(self) -> Var<'t> {
        let s = sigmoid_f64(self.value());
        self.unary(s, s * (1.0 - s))
    }

    pub fn powi(self, n: i32) -> Var<'t> {
        let v = self.value();
        if v == 0.0 && n < 0 {
            self.tape
                .record_fault(format!("0 raised to negative power {n}"));
        }
        let partial = match n {
            0 => 0.0,
            _ => f64::from(n) * v.powi(n - 1),
        };
        self.unary(v.powi(n), partial)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, self.value() + rhs.value(), 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        self.binary(rhs, self.value() - rhs.value(), 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        let (a, b) = (self.value(), rhs.value());
        self.binary(rhs, a * b, b, a)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        let (a, b) = (self.value(), rhs.value());
        if b == 0.0 {
            self.tape.record_fault("division by zero".to_string());
        }
        self.binary(rhs, a / b, 1.0 / b, -a / (b * b))
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Var<'t> {
        self.unary(-self.value(), -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Var<'t> {
        self.unary(self.value() + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Var<'t> {
        self.unary(self.value() - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Var<'t> {
        self.unary(self.value() * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Var<'t> {
        if rhs == 0.0 {
            self.tape.record_fault("division by zero".to_string());
        }
        self.unary(self.value() / rhs, 1.0 / rhs)
    }
}

impl<'t> Add<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn add(self, rhs: Var<'t>) -> Var<'t> {
        rhs + self
    }
}

impl<'t> Sub<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        rhs.unary(self - rhs.value(), -1.0)
    }
}

impl<'t> Mul<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn mul(self, rhs: Var<'t>) -> Var<'t> {
        rhs * self
    }
}

impl<'t> Div<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        let b = rhs.value();
        if b == 0.0 {
            rhs.tape.record_fault("division by zero".to_string());
        }
        rhs.unary(self / b, -self / (b * b))
    }
}

// ---------------------------------------------------------------------------
// Scalar abstraction
// ---------------------------------------------------------------------------

/// Numeric scalar the network and residual formulas are generic over.
///
/// Implemented by `f64` (plain evaluation), [`Var`] (tape recording), and
/// [`Jet<T>`] (tangent propagation), so each formula is written once.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant in the same evaluation context as `self`.
    ///
    /// For tape variables this records the constant on `self`'s tape; for
    /// plain floats it is just `c`.
    fn lift(self, c: f64) -> Self;
    fn tanh(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn sigmoid(self) -> Self;
    fn powi(self, n: i32) -> Self;
    /// Underlying value (diagnostics; not differentiable).
    fn primal(self) -> f64;
}

pub(crate) fn sigmoid_f64(x: f64) -> f64 {
    // Stable for |x| up to ~700: never exponentiates a large positive value.
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Scalar for f64 {
    fn lift(self, c: f64) -> f64 {
        c
    }
    fn tanh(self) -> f64 {
        f64::tanh(self)
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn sigmoid(self) -> f64 {
        sigmoid_f64(self)
    }
    fn powi(self, n: i32) -> f64 {
        f64::powi(self, n)
    }
    fn primal(self) -> f64 {
        self
    }
}

impl<'t> Scalar for Var<'t> {
    fn lift(self, c: f64) -> Var<'t> {
        self.tape.constant(c)
    }
    fn tanh(self) -> Var<'t> {
        Var::tanh(self)
    }
    fn exp(self) -> Var<'t> {
        Var::exp(self)
    }
    fn ln(self) -> Var<'t> {
        Var::ln(self)
    }
    fn sqrt(self) -> Var<'t> {
        Var::sqrt(self)
    }
    fn sigmoid(self) -> Var<'t> {
        Var::sigmoid(self)
    }
    fn powi(self, n: i32) -> Var<'t> {
        Var::powi(self, n)
    }
    fn primal(self) -> f64 {
        self.value()
    }
}

// ---------------------------------------------------------------------------
// Second-order forward tangents
// ---------------------------------------------------------------------------

/// Truncated Taylor triple `(value, first derivative, second derivative)`
/// with respect to one chosen input direction.
#[derive(Clone, Copy, Debug)]
pub struct Jet<T: Scalar> {
    pub v: T,
    pub d1: T,
    pub d2: T,
}

/// Tape-free jet over plain floats: `(primal, f', f'')`.
pub type DualValue = Jet<f64>;

impl<T: Scalar> Jet<T> {
    /// The differentiation variable: `d/dx x = 1`, `d²/dx² x = 0`.
    pub fn variable(x: T) -> Self {
        Jet {
            v: x,
            d1: x.lift(1.0),
            d2: x.lift(0.0),
        }
    }

    /// A value that does not depend on the differentiation variable.
    pub fn constant(x: T) -> Self {
        Jet {
            v: x,
            d1: x.lift(0.0),
            d2: x.lift(0.0),
        }
    }

    fn chain(self, phi: T, dphi: T, ddphi: T) -> Self {
        Jet {
            v: phi,
            d1: dphi * self.d1,
            d2: ddphi * self.d1 * self.d1 + dphi * self.d2,
        }
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Jet<T>) -> Jet<T> {
        Jet {
            v: self.v + rhs.v,
            d1: self.d1 + rhs.d1,
            d2: self.d2 + rhs.d2,
        }
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Jet<T>) -> Jet<T> {
        Jet {
            v: self.v - rhs.v,
            d1: self.d1 - rhs.d1,
            d2: self.d2 - rhs.d2,
        }
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Jet<T>) -> Jet<T> {
        let two = self.v.lift(2.0);
        Jet {
            v: self.v * rhs.v,
            d1: self.d1 * rhs.v + self.v * rhs.d1,
            d2: self.d2 * rhs.v + two * self.d1 * rhs.d1 + self.v * rhs.d2,
        }
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Jet<T>;
    fn div(self, rhs: Jet<T>) -> Jet<T> {
        let q = self.v / rhs.v;
        let d1 = (self.d1 - q * rhs.d1) / rhs.v;
        let two = self.v.lift(2.0);
        let d2 = (self.d2 - q * rhs.d2 - two * d1 * rhs.d1) / rhs.v;
        Jet { v: q, d1, d2 }
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        Jet {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

impl<T: Scalar> Scalar for Jet<T> {
    fn lift(self, c: f64) -> Jet<T> {
        Jet::constant(self.v.lift(c))
    }

    fn tanh(self) -> Jet<T> {
        let t = self.v.tanh();
        let one = self.v.lift(1.0);
        let sech2 = one - t * t;
        let ddphi = -self.v.lift(2.0) * t * sech2;
        self.chain(t, sech2, ddphi)
    }

    fn exp(self) -> Jet<T> {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    fn ln(self) -> Jet<T> {
        let one = self.v.lift(1.0);
        let inv = one / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }

    fn sqrt(self) -> Jet<T> {
        let s = self.v.sqrt();
        let half = self.v.lift(0.5);
        let dphi = half / s;
        let ddphi = -half * dphi / self.v;
        self.chain(s, dphi, ddphi)
    }

    fn sigmoid(self) -> Jet<T> {
        let s = self.v.sigmoid();
        let one = self.v.lift(1.0);
        let dphi = s * (one - s);
        let ddphi = dphi * (one - self.v.lift(2.0) * s);
        self.chain(s, dphi, ddphi)
    }

    fn powi(self, n: i32) -> Jet<T> {
        match n {
            0 => Jet::constant(self.v.lift(1.0)),
            1 => self,
            _ => {
                let dphi = self.v.lift(f64::from(n)) * self.v.powi(n - 1);
                let ddphi = self.v.lift(f64::from(n) * f64::from(n - 1)) * self.v.powi(n - 2);
                self.chain(self.v.powi(n), dphi, ddphi)
            }
        }
    }

    fn primal(self) -> f64 {
        self.v.primal()
    }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Value and gradient of a scalar expression over a parameter vector.
///
/// `build` receives one differentiable [`Var`] per entry of `params` and
/// returns the expression root. Deterministic: identical inputs produce
/// bit-identical gradients.
pub fn grad<F>(params: &[f64], build: F) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> FnOnce(&'t Tape, &[Var<'t>]) -> Var<'t>,
{
    let tape = Tape::with_capacity(params.len() * 4);
    let vars: Vec<Var<'_>> = params.iter().map(|&p| tape.var(p)).collect();
    let out = build(&tape, &vars);
    let g = tape.gradient(out, &vars)?;
    Ok((out.value(), g))
}

/// `(f(x), f'(x), f''(x))` of a univariate function built from [`DualValue`]
/// arithmetic, via second-order tangent propagation (exact, no differencing).
pub fn input_derivs<F>(f: F, x: f64) -> Result<(f64, f64, f64)>
where
    F: Fn(DualValue) -> DualValue,
{
    let out = f(DualValue::variable(x));
    if !(out.v.is_finite() && out.d1.is_finite() && out.d2.is_finite()) {
        return Err(Error::ForwardFault(format!(
            "non-finite derivative triple at x = {x}: ({}, {}, {})",
            out.v, out.d1, out.d2
        )));
    }
    Ok((out.v, out.d1, out.d2))
}

// ---------------------------------------------------------------------------
// Parameter vectors
// ---------------------------------------------------------------------------

/// Shape descriptor for a flat parameter vector: dense layers (each
/// `fan_in * fan_out` weights followed by `fan_out` biases) and optionally a
/// trailing blending-scalar slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamLayout {
    pub layer_shapes: Vec<(usize, usize)>,
    pub has_alpha: bool,
}

impl ParamLayout {
    pub fn layers(layer_shapes: Vec<(usize, usize)>) -> Self {
        ParamLayout {
            layer_shapes,
            has_alpha: false,
        }
    }

    pub fn n_layers(&self) -> usize {
        self.layer_shapes.len()
    }

    pub fn layer_param_count(&self, layer: usize) -> usize {
        let (fan_in, fan_out) = self.layer_shapes[layer];
        fan_in * fan_out + fan_out
    }

    pub fn param_count(&self) -> usize {
        let layers: usize = (0..self.n_layers()).map(|l| self.layer_param_count(l)).sum();
        layers + usize::from(self.has_alpha)
    }

    /// Index range of layer `layer` (weights then biases) in the flat vector.
    pub fn layer_range(&self, layer: usize) -> Range<usize> {
        let start: usize = (0..layer).map(|l| self.layer_param_count(l)).sum();
        start..start + self.layer_param_count(layer)
    }

    pub fn alpha_index(&self) -> Option<usize> {
        self.has_alpha.then(|| self.param_count() - 1)
    }
}

/// Flat parameter vector plus its [`ParamLayout`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamVector {
    values: Vec<f64>,
    layout: ParamLayout,
}

impl ParamVector {
    pub fn new(values: Vec<f64>, layout: ParamLayout) -> Result<Self> {
        if values.len() != layout.param_count() {
            return Err(Error::ParamCountMismatch {
                expected: layout.param_count(),
                found: values.len(),
            });
        }
        Ok(ParamVector { values, layout })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn layout(&self) -> &ParamLayout {
        &self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn layer(&self, layer: usize) -> &[f64] {
        &self.values[self.layout.layer_range(layer)]
    }

    pub fn layer_mut(&mut self, layer: usize) -> &mut [f64] {
        let r = self.layout.layer_range(layer);
        &mut self.values[r]
    }

    pub fn alpha(&self) -> Option<f64> {
        self.layout.alpha_index().map(|i| self.values[i])
    }
}
