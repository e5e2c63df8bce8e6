//! Small-data scientific ML toolkit built around a self-supervised adaptive
//! PINN: a feed-forward network trained against a blend of data misfit and
//! PDE-residual loss, where the blend weight itself is a trainable scalar.
//!
//! The crate also ships everything needed to evaluate that model against
//! classical baselines on synthetic heat-transfer regression tasks:
//!
//! - [`data`] — CSV ingestion, synthetic Nusselt-correlation datasets,
//!   normalization, seeded splits
//! - [`autodiff`] — scalar reverse-mode tape plus second-order forward
//!   tangents, composable so physics-loss parameter gradients are exact
//! - [`mlp`] — feed-forward networks generic over the scalar type, with
//!   JSON checkpointing
//! - [`blend`] — the sigmoid blending neuron and composite loss
//! - [`pde`] — 1-D residual problems (conduction, variable-conductivity
//!   conduction, convection–diffusion) with analytic verification hooks
//! - [`train`] — full-batch Adam with scheduling and early stopping
//! - [`transfer`] — layer copying, freezing, and the layer-sweep experiment
//! - [`gp`] / [`svr`] — Gaussian-process and ε-SVR baselines with RBF kernel
//! - [`search`] — random search, Bayesian optimization, GA architecture search
//! - [`stats`] — MAPE, cross-validation, Monte Carlo robustness, Mann–Whitney
//!   U, KDE
//! - [`model`] — the `Learner` abstraction tying model specs into the
//!   evaluation harness, and the benchmark suite

pub mod autodiff;
pub mod blend;
pub mod data;
pub mod error;
pub mod gp;
pub mod mlp;
pub mod model;
pub mod pde;
pub mod search;
pub mod seed;
pub mod stats;
pub mod svr;
pub mod train;
pub mod transfer;

pub use error::{Error, Result};
