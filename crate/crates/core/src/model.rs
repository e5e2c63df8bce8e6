//! Benchmark model zoo: uniform fit/predict adapters around the neural,
//! Gaussian-process, and support-vector regressors, plus the six-row
//! benchmark table that compares them on a source/target dataset pair.
//!
//! Every adapter owns its preprocessing: features are standardized with the
//! training split's statistics and targets are standardized internally, so
//! `predict` accepts raw feature rows and returns raw-scale predictions.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blend::{BlendingNeuron, PhysicsInput};
use crate::data::{normalize, split, Dataset, NormStats};
use crate::error::{Error, Result};
use crate::gp::{gp_fit, gp_predict};
use crate::mlp::{Activation, ArchSpec, Mlp};
use crate::pde::{sample_collocation, PdeProblem, SamplingScheme};
use crate::search::{bayes_opt, random_search, ParamDim, ParamKind, ParamSpace};
use crate::seed::{sub_seed, sub_seed_indexed};
use crate::stats::{mape, FittedModel};
use crate::svr::{svr_fit, svr_predict};
use crate::train::{train, TrainConfig, TrainMode, TrainReport};
use crate::transfer::{train_frozen, transfer_init, TransferPlan};

// ---------------------------------------------------------------------------
// Model settings
// ---------------------------------------------------------------------------

/// Settings shared by the neural regressors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetSettings {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub val_fraction: f64,
}

impl Default for NetSettings {
    fn default() -> Self {
        Self {
            hidden: vec![12, 12],
            learning_rate: 0.02,
            max_epochs: 300,
            patience: 60,
            val_fraction: 0.2,
        }
    }
}

/// Physics-regularized network settings. The residual problem is a
/// convection–diffusion surrogate laid along one standardized feature axis;
/// it acts as a smoothness prior, with the blending scalar free to discount
/// it, so no boundary term is applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnSettings {
    pub net: NetSettings,
    /// Peclet number of the surrogate residual problem.
    pub peclet: f64,
    /// Collocation points along the physics axis.
    pub n_collocation: usize,
    /// Feature index the surrogate physics runs along.
    pub physics_axis: usize,
}

impl Default for PinnSettings {
    fn default() -> Self {
        Self {
            net: NetSettings::default(),
            peclet: 5.0,
            n_collocation: 24,
            physics_axis: 0,
        }
    }
}

/// Transfer-learning settings: which layers to copy from the source network
/// and whether to freeze them during fine-tuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TlSettings {
    pub net: NetSettings,
    /// 0-based weight-layer indices copied from the source network.
    pub copy_layers: Vec<usize>,
    pub freeze: bool,
}

impl Default for TlSettings {
    /// Copy and freeze the first hidden layer.
    fn default() -> Self {
        Self {
            net: NetSettings::default(),
            copy_layers: vec![0],
            freeze: true,
        }
    }
}

/// Gaussian-process settings (RBF kernel width and observation noise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpSettings {
    pub gamma: f64,
    pub noise: f64,
}

impl Default for GpSettings {
    fn default() -> Self {
        Self { gamma: 0.5, noise: 1e-2 }
    }
}

/// Fixed support-vector-regression hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrSettings {
    pub c: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl Default for SvrSettings {
    fn default() -> Self {
        Self { c: 5.0, gamma: 0.5, epsilon: 0.05 }
    }
}

/// Hyperparameter-searched support-vector regression: the searcher tunes
/// `(C, gamma, epsilon)` on an internal validation split, then the best
/// configuration is refitted on the full training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrSearchSettings {
    pub budget: usize,
    /// Initial random draws for the Bayesian variant.
    pub n_init: usize,
    pub c_range: (f64, f64),
    pub gamma_range: (f64, f64),
    pub epsilon_range: (f64, f64),
    /// Fraction of the training data held out to score candidates.
    pub val_fraction: f64,
}

impl Default for SvrSearchSettings {
    fn default() -> Self {
        Self {
            budget: 12,
            n_init: 4,
            c_range: (0.5, 10.0),
            gamma_range: (0.1, 5.0),
            epsilon_range: (1e-3, 0.3),
            val_fraction: 0.25,
        }
    }
}

/// How the searched-SVR benchmark rows pick hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    RandomSearch,
    Bayesian,
}

/// A fully specified model: settings plus, for transfer learning, the
/// pretrained source network.
#[derive(Debug, Clone)]
pub enum ModelSpec {
    Nn(NetSettings),
    Pinn(PinnSettings),
    TlNn { settings: TlSettings, source: Mlp },
    Gp(GpSettings),
    Svr(SvrSettings),
}

// ---------------------------------------------------------------------------
// Preprocessing helpers
// ---------------------------------------------------------------------------

/// Replaces targets with `(y - mean) / stddev` (population statistics;
/// a zero stddev falls back to 1 so constant targets stay finite).
fn standardize_targets(ds: &Dataset) -> (Dataset, f64, f64) {
    let n = ds.targets.len() as f64;
    let mean = ds.targets.iter().sum::<f64>() / n;
    let var = ds.targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let std = if var.sqrt() > 0.0 { var.sqrt() } else { 1.0 };
    let mut out = ds.clone();
    for y in &mut out.targets {
        *y = (*y - mean) / std;
    }
    (out, mean, std)
}

/// Standardizes features and targets of a training split, returning the
/// transformed data plus everything needed to map predictions back:
/// `(standardized dataset, feature stats, target mean, target stddev)`.
pub fn standardized_parts(ds: &Dataset) -> Result<(Dataset, NormStats, f64, f64)> {
    let (norm_ds, stats) = normalize(ds)?;
    let (std_ds, t_mean, t_std) = standardize_targets(&norm_ds);
    Ok((std_ds, stats, t_mean, t_std))
}

/// A trained neural regressor together with the preprocessing needed to
/// query it on raw feature rows.
pub struct NetFit {
    pub net: Mlp,
    pub feature_stats: NormStats,
    pub target_mean: f64,
    pub target_std: f64,
    pub report: TrainReport,
}

impl NetFit {
    /// Prediction on a raw (unstandardized) feature row.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let z = self.feature_stats.apply(row);
        self.net.forward(&z) * self.target_std + self.target_mean
    }

    fn into_fitted(self) -> FittedModel {
        let epochs = self.report.final_epoch;
        FittedModel {
            predict: Box::new(move |row| self.predict(row)),
            epochs,
        }
    }
}

fn net_train_config(s: &NetSettings, mode: TrainMode, seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: s.learning_rate,
        max_epochs: s.max_epochs,
        early_stop_patience: s.patience,
        val_fraction: s.val_fraction,
        seed,
        mode,
        ..TrainConfig::default()
    }
}

// ---------------------------------------------------------------------------
// Neural adapters
// ---------------------------------------------------------------------------

/// Trains a plain data-driven network on standardized features and targets.
pub fn fit_plain_net(ds: &Dataset, s: &NetSettings, seed: u64) -> Result<NetFit> {
    let (std_ds, feature_stats, target_mean, target_std) = standardized_parts(ds)?;
    let arch = ArchSpec {
        n_inputs: ds.n_features(),
        hidden: s.hidden.clone(),
        n_outputs: 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "init"));
    let net = Mlp::init(arch, Activation::Tanh, &mut rng);
    let cfg = net_train_config(s, TrainMode::DataOnly, sub_seed(seed, "train"));
    let (net, _, report) = train(&net, None, &std_ds, None, &cfg)?;
    Ok(NetFit {
        net,
        feature_stats,
        target_mean,
        target_std,
        report,
    })
}

/// Residual problem for [`fit_pinn_net`]: convection–diffusion along one
/// standardized feature axis, collocation drawn inside the training data's
/// axis range, and no boundary term (the surrogate is a smoothness prior,
/// not a boundary-value problem).
pub fn surrogate_problem(
    axis_range: (f64, f64),
    peclet: f64,
    n_collocation: usize,
    seed: u64,
) -> Result<PdeProblem> {
    let (lo, hi) = axis_range;
    if !(lo < hi) {
        return Err(Error::InvalidConfig(format!(
            "physics axis range must satisfy low < high, got [{lo}, {hi}]"
        )));
    }
    let base = PdeProblem::convdiff1d(peclet, seed);
    let collocation = sample_collocation(
        axis_range,
        n_collocation,
        SamplingScheme::UniformRandom,
        sub_seed(seed, "colloc"),
    )?;
    let prob = PdeProblem {
        domain: axis_range,
        collocation,
        boundary_weight: 0.0,
        ..base
    };
    prob.validate()?;
    Ok(prob)
}

/// Trains a physics-regularized network: data loss plus the surrogate
/// residual loss, blended by the trainable sigmoid weighting.
pub fn fit_pinn_net(ds: &Dataset, s: &PinnSettings, seed: u64) -> Result<NetFit> {
    if s.physics_axis >= ds.n_features() {
        return Err(Error::InvalidConfig(format!(
            "physics axis {} out of range for {} features",
            s.physics_axis,
            ds.n_features()
        )));
    }
    let (std_ds, feature_stats, target_mean, target_std) = standardized_parts(ds)?;
    let axis_vals = std_ds.features.iter().map(|r| r[s.physics_axis]);
    let lo = axis_vals.clone().fold(f64::INFINITY, f64::min);
    let hi = axis_vals.fold(f64::NEG_INFINITY, f64::max);
    let prob = surrogate_problem((lo, hi), s.peclet, s.n_collocation, sub_seed(seed, "physics"))?;
    let arch = ArchSpec {
        n_inputs: ds.n_features(),
        hidden: s.net.hidden.clone(),
        n_outputs: 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "init"));
    let net = Mlp::init(arch, Activation::Tanh, &mut rng);
    let mut cfg = net_train_config(&s.net, TrainMode::Pinn, sub_seed(seed, "train"));
    cfg.physics_input = Some(PhysicsInput {
        dim: s.physics_axis,
        fill: vec![0.0; ds.n_features()],
    });
    let (net, _, report) = train(&net, Some(BlendingNeuron::default()), &std_ds, Some(&prob), &cfg)?;
    Ok(NetFit {
        net,
        feature_stats,
        target_mean,
        target_std,
        report,
    })
}

/// Fine-tunes a copy of `source` on the target data, copying the planned
/// layers and (optionally) freezing them. The source network must have been
/// trained on standardized inputs of the same width, which
/// [`fit_plain_net`] guarantees.
pub fn fit_transfer_net(ds: &Dataset, source: &Mlp, s: &TlSettings, seed: u64) -> Result<NetFit> {
    if source.arch().n_inputs != ds.n_features() {
        return Err(Error::DimensionMismatch {
            expected: source.arch().n_inputs,
            found: ds.n_features(),
        });
    }
    let (std_ds, feature_stats, target_mean, target_std) = standardized_parts(ds)?;
    let plan = TransferPlan::new("").with_layers(s.copy_layers.clone());
    let net = transfer_init(source, &plan, sub_seed(seed, "init"))?;
    let cfg = net_train_config(&s.net, TrainMode::DataOnly, sub_seed(seed, "train"));
    let frozen: &[usize] = if s.freeze { &plan.layers_to_copy } else { &[] };
    let (net, _, report) = train_frozen(&net, None, &std_ds, None, &cfg, frozen, 0.0, false)?;
    Ok(NetFit {
        net,
        feature_stats,
        target_mean,
        target_std,
        report,
    })
}

// ---------------------------------------------------------------------------
// Kernel adapters
// ---------------------------------------------------------------------------

fn fit_gp_model(ds: &Dataset, s: &GpSettings) -> Result<FittedModel> {
    let (norm_ds, stats) = normalize(ds)?;
    let model = gp_fit(&norm_ds, s.gamma, s.noise)?;
    Ok(FittedModel {
        predict: Box::new(move |row| {
            gp_predict(&model, &stats.apply(row)).map(|(mean, _)| mean).unwrap_or(f64::NAN)
        }),
        epochs: 0,
    })
}

fn fit_svr_model(ds: &Dataset, s: &SvrSettings) -> Result<FittedModel> {
    let (std_ds, stats, t_mean, t_std) = standardized_parts(ds)?;
    let model = svr_fit(&std_ds, s.c, s.gamma, s.epsilon)?;
    let epochs = model.iterations();
    Ok(FittedModel {
        predict: Box::new(move |row| {
            svr_predict(&model, &stats.apply(row))
                .map(|p| p * t_std + t_mean)
                .unwrap_or(f64::NAN)
        }),
        epochs,
    })
}

fn svr_search_space(s: &SvrSearchSettings) -> Result<ParamSpace> {
    ParamSpace::new(vec![
        ParamDim {
            name: "c".into(),
            kind: ParamKind::LogReal { low: s.c_range.0, high: s.c_range.1 },
        },
        ParamDim {
            name: "gamma".into(),
            kind: ParamKind::LogReal { low: s.gamma_range.0, high: s.gamma_range.1 },
        },
        ParamDim {
            name: "epsilon".into(),
            kind: ParamKind::LogReal { low: s.epsilon_range.0, high: s.epsilon_range.1 },
        },
    ])
}

/// Tunes `(C, gamma, epsilon)` with the chosen searcher, scoring candidates
/// by holdout error on an internal split, then refits the best configuration
/// on all of `ds`. Candidates whose solver fails to converge score `+inf`
/// and are skipped by the searcher.
pub fn fit_svr_searched(
    ds: &Dataset,
    s: &SvrSearchSettings,
    method: SearchMethod,
    seed: u64,
) -> Result<FittedModel> {
    let space = svr_search_space(s)?;
    let (fit_ds, val_ds) = split(ds, 1.0 - s.val_fraction, sub_seed(seed, "svr-val"))?;
    let objective = |point: &[f64]| -> Result<f64> {
        let candidate = SvrSettings { c: point[0], gamma: point[1], epsilon: point[2] };
        let model = fit_svr_model(&fit_ds, &candidate)?;
        let preds: Vec<f64> = val_ds.features.iter().map(|r| (model.predict)(r)).collect();
        Ok(mape(&val_ds.targets, &preds)?.mape)
    };
    let outcome = match method {
        SearchMethod::RandomSearch => {
            random_search(&space, objective, s.budget, sub_seed(seed, "svr-rs"))?
        }
        SearchMethod::Bayesian => {
            bayes_opt(&space, objective, s.budget, s.n_init, sub_seed(seed, "svr-bo"))?
        }
    };
    let best = SvrSettings {
        c: outcome.best.point[0],
        gamma: outcome.best.point[1],
        epsilon: outcome.best.point[2],
    };
    fit_svr_model(ds, &best)
}

// ---------------------------------------------------------------------------
// Unified fitting entry point
// ---------------------------------------------------------------------------

/// Fits any [`ModelSpec`] on a raw training split, returning a prediction
/// closure over raw feature rows plus the epoch count the fit consumed.
pub fn fit_model(spec: &ModelSpec, ds: &Dataset, seed: u64) -> Result<FittedModel> {
    match spec {
        ModelSpec::Nn(s) => Ok(fit_plain_net(ds, s, seed)?.into_fitted()),
        ModelSpec::Pinn(s) => Ok(fit_pinn_net(ds, s, seed)?.into_fitted()),
        ModelSpec::TlNn { settings, source } => {
            Ok(fit_transfer_net(ds, source, settings, seed)?.into_fitted())
        }
        ModelSpec::Gp(s) => fit_gp_model(ds, s),
        ModelSpec::Svr(s) => fit_svr_model(ds, s),
    }
}

// ---------------------------------------------------------------------------
// Benchmark suite
// ---------------------------------------------------------------------------

/// The six benchmark rows, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    TlNn,
    Nn,
    Pinn,
    Gp,
    SvrRandomSearch,
    SvrBayesian,
}

impl ModelKind {
    pub fn all() -> [ModelKind; 6] {
        [
            ModelKind::TlNn,
            ModelKind::Nn,
            ModelKind::Pinn,
            ModelKind::Gp,
            ModelKind::SvrRandomSearch,
            ModelKind::SvrBayesian,
        ]
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::TlNn => "TL-NN",
            ModelKind::Nn => "NN",
            ModelKind::Pinn => "PINN",
            ModelKind::Gp => "GP",
            ModelKind::SvrRandomSearch => "SVR-RS",
            ModelKind::SvrBayesian => "SVR-Bayesian",
        }
    }

    /// Lower-case form used in file names and seed-stream labels.
    pub fn slug(self) -> &'static str {
        match self {
            ModelKind::TlNn => "tl-nn",
            ModelKind::Nn => "nn",
            ModelKind::Pinn => "pinn",
            ModelKind::Gp => "gp",
            ModelKind::SvrRandomSearch => "svr-rs",
            ModelKind::SvrBayesian => "svr-bayes",
        }
    }
}

/// Settings for the full benchmark table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    /// Independent train/holdout resamples; each row reports its median.
    pub n_seeds: usize,
    pub holdout_fraction: f64,
    pub seed: u64,
    pub net: NetSettings,
    pub pinn: PinnSettings,
    pub tl: TlSettings,
    pub gp: GpSettings,
    pub svr_search: SvrSearchSettings,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            n_seeds: 3,
            holdout_fraction: 0.2,
            seed: 0,
            net: NetSettings::default(),
            pinn: PinnSettings::default(),
            tl: TlSettings::default(),
            gp: GpSettings::default(),
            svr_search: SvrSearchSettings::default(),
        }
    }
}

/// One row of the benchmark table: the model's median holdout error over
/// the configured resamples, or its failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub model: ModelKind,
    pub median_mape: Option<f64>,
    /// Resamples that produced a score (failures are dropped per resample).
    pub seeds_ok: usize,
    pub error: Option<String>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Holdout error of one model kind on one resample of the target data.
fn score_once(
    kind: ModelKind,
    ds_source: &Dataset,
    ds_target: &Dataset,
    cfg: &BenchmarkConfig,
    resample: usize,
) -> Result<f64> {
    let split_seed = sub_seed_indexed(cfg.seed, "bench-split", resample as u64);
    let (train_ds, holdout) = split(ds_target, 1.0 - cfg.holdout_fraction, split_seed)?;
    let fit_seed = sub_seed_indexed(cfg.seed, kind.slug(), resample as u64);
    let model = match kind {
        ModelKind::TlNn => {
            let source_seed = sub_seed_indexed(cfg.seed, "bench-source", resample as u64);
            let source = fit_plain_net(ds_source, &cfg.tl.net, source_seed)?.net;
            fit_model(
                &ModelSpec::TlNn { settings: cfg.tl.clone(), source },
                &train_ds,
                fit_seed,
            )?
        }
        ModelKind::Nn => fit_model(&ModelSpec::Nn(cfg.net.clone()), &train_ds, fit_seed)?,
        ModelKind::Pinn => fit_model(&ModelSpec::Pinn(cfg.pinn.clone()), &train_ds, fit_seed)?,
        ModelKind::Gp => fit_model(&ModelSpec::Gp(cfg.gp), &train_ds, fit_seed)?,
        ModelKind::SvrRandomSearch => {
            fit_svr_searched(&train_ds, &cfg.svr_search, SearchMethod::RandomSearch, fit_seed)?
        }
        ModelKind::SvrBayesian => {
            fit_svr_searched(&train_ds, &cfg.svr_search, SearchMethod::Bayesian, fit_seed)?
        }
    };
    let preds: Vec<f64> = holdout.features.iter().map(|r| (model.predict)(r)).collect();
    Ok(mape(&holdout.targets, &preds)?.mape)
}

/// Runs all six models on the target data (the source data pretrains the
/// transfer row) and reports each row's median holdout error. A model that
/// fails on every resample yields a failed row; the suite continues.
pub fn benchmark_suite(
    ds_source: &Dataset,
    ds_target: &Dataset,
    cfg: &BenchmarkConfig,
) -> Result<Vec<BenchmarkRow>> {
    if cfg.n_seeds == 0 {
        return Err(Error::InvalidConfig(
            "benchmark needs at least one resample".into(),
        ));
    }
    ModelKind::all()
        .iter()
        .map(|&kind| {
            let outcomes: Vec<Result<f64>> = (0..cfg.n_seeds)
                .into_par_iter()
                .map(|r| score_once(kind, ds_source, ds_target, cfg, r))
                .collect();
            let mut scores = Vec::new();
            let mut last_error = None;
            for out in outcomes {
                match out {
                    Ok(m) => scores.push(m),
                    Err(e) => last_error = Some(e.to_string()),
                }
            }
            Ok(if scores.is_empty() {
                BenchmarkRow {
                    model: kind,
                    median_mape: None,
                    seeds_ok: 0,
                    error: last_error,
                }
            } else {
                BenchmarkRow {
                    model: kind,
                    median_mape: Some(median(&mut scores)),
                    seeds_ok: scores.len(),
                    error: None,
                }
            })
        })
        .collect()
}

/// Writes the benchmark table as CSV: `model,median_mape,seeds_ok,status`.
/// Failed rows carry an empty error column value of `failed` status and no
/// median.
pub fn write_benchmark_csv(rows: &[BenchmarkRow], path: &Path) -> Result<()> {
    let mut out = String::from("model,median_mape,seeds_ok,status\n");
    for row in rows {
        let mape = row.median_mape.map(|m| format!("{m:?}")).unwrap_or_default();
        let status = if row.median_mape.is_some() { "ok" } else { "failed" };
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.model.label(),
            mape,
            row.seeds_ok,
            status
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
