//! Evaluation metrics, cross-validation, robustness studies, and the
//! statistical tests backing the comparison tables and figures.
//!
//! Model fitting is injected as closures so this module stays agnostic of
//! which learner produced the predictions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{split, Dataset};
use crate::error::{Error, Result};
use crate::seed::sub_seed_indexed;

// ---------------------------------------------------------------------------
// MAPE
// ---------------------------------------------------------------------------

/// Mean absolute percentage error plus the per-point values it averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mape: f64,
    pub per_point: Vec<f64>,
}

/// `(1/N)·Σ |ŷ_i − y_i| / |y_i|`. Fails on any zero ground-truth value.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<MetricSummary> {
    if actual.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            found: predicted.len(),
        });
    }
    let mut per_point = Vec::with_capacity(actual.len());
    for (i, (&y, &yh)) in actual.iter().zip(predicted).enumerate() {
        if y == 0.0 {
            return Err(Error::ZeroTarget { index: i });
        }
        per_point.push((yh - y).abs() / y.abs());
    }
    let mape = per_point.iter().sum::<f64>() / per_point.len() as f64;
    Ok(MetricSummary { mape, per_point })
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Variance with the given delta degrees of freedom (0 = population,
/// 1 = sample).
pub(crate) fn variance(xs: &[f64], ddof: usize) -> f64 {
    let m = mean(xs);
    let denom = (xs.len() - ddof) as f64;
    xs.iter().map(|&x| (x - m).powi(2)).sum::<f64>() / denom
}

/// Linear-interpolation quantile on a sorted slice (the common "type 7"
/// convention: position `(n−1)·p`).
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

/// Prediction function over raw feature rows.
pub type PredictFn = Box<dyn Fn(&[f64]) -> f64>;

/// A model fitted for one trial or fold: a prediction function over raw
/// feature rows plus the epochs the fit consumed (0 for closed-form models).
pub struct FittedModel {
    pub predict: PredictFn,
    pub epochs: usize,
}

/// Shuffle `0..n` and deal it into `k` folds whose sizes differ by at most
/// one.
pub fn kfold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "k-fold needs k ≥ 2, got {k}"
        )));
    }
    if k > n {
        return Err(Error::InvalidConfig(format!(
            "k-fold needs k ≤ N, got k={k} with N={n}"
        )));
    }
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        folds.push(indices[start..start + size].to_vec());
        start += size;
    }
    Ok(folds)
}

/// K-fold cross-validated MAPE: every point is tested exactly once by a model
/// that never saw it. Returns `(mean, sample stddev)` of the per-fold MAPEs.
pub fn kfold_cv(
    ds: &Dataset,
    k: usize,
    seed: u64,
    mut fit: impl FnMut(&Dataset, u64) -> Result<FittedModel>,
) -> Result<(f64, f64)> {
    let folds = kfold_partition(ds.n_rows(), k, seed)?;
    let mut fold_mapes = Vec::with_capacity(k);
    for (f, fold) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let model = fit(&ds.subset(&train_idx), sub_seed_indexed(seed, "fold", f as u64))?;
        let eval = ds.subset(fold);
        let preds: Vec<f64> = eval.features.iter().map(|r| (model.predict)(r)).collect();
        fold_mapes.push(mape(&eval.targets, &preds)?.mape);
    }
    let m = mean(&fold_mapes);
    let s = if fold_mapes.len() > 1 {
        variance(&fold_mapes, 1).sqrt()
    } else {
        0.0
    };
    Ok((m, s))
}

// ---------------------------------------------------------------------------
// Monte Carlo robustness study
// ---------------------------------------------------------------------------

/// Aggregates of a Monte Carlo robustness study.
///
/// Prediction variance is measured across trials at fixed holdout points
/// drawn once per study, then maximized over the points; `mape_variance` is
/// the sample variance of the per-trial MAPEs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub max_pred_variance: f64,
    pub mape_variance: f64,
    pub avg_epochs: f64,
    pub trials: usize,
    pub failed_trials: usize,
}

/// Robustness study with explicit per-trial seeds (the building block;
/// [`monte_carlo_cv`] derives one seed per trial index). Each trial retrains
/// on a fresh random subset of the non-holdout pool and predicts at the fixed
/// holdout points. Failed trials are excluded and counted.
pub fn monte_carlo_cv_with_seeds(
    ds: &Dataset,
    trial_seeds: &[u64],
    holdout_fraction: f64,
    train_fraction: f64,
    seed: u64,
    fit: impl Fn(&Dataset, u64) -> Result<FittedModel> + Sync,
) -> Result<RobustnessReport> {
    if trial_seeds.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "robustness study needs at least 2 trials, got {}",
            trial_seeds.len()
        )));
    }
    let (eval, pool) = split(ds, holdout_fraction, crate::seed::sub_seed(seed, "mc-holdout"))?;

    struct TrialOutcome {
        predictions: Vec<f64>,
        mape: f64,
        epochs: usize,
    }
    let outcomes: Vec<Result<TrialOutcome>> = trial_seeds
        .par_iter()
        .map(|&ts| {
            let (train, _) = split(&pool, train_fraction, ts)?;
            let model = fit(&train, ts)?;
            let predictions: Vec<f64> =
                eval.features.iter().map(|r| (model.predict)(r)).collect();
            if predictions.iter().any(|p| !p.is_finite()) {
                return Err(Error::Other("non-finite prediction".to_string()));
            }
            let m = mape(&eval.targets, &predictions)?.mape;
            Ok(TrialOutcome {
                predictions,
                mape: m,
                epochs: model.epochs,
            })
        })
        .collect();

    let ok: Vec<&TrialOutcome> = outcomes.iter().filter_map(|r| r.as_ref().ok()).collect();
    let failed = outcomes.len() - ok.len();
    if ok.len() < 2 {
        return Err(Error::AllTrialsFailed(trial_seeds.len()));
    }
    let max_pred_variance = (0..eval.n_rows())
        .map(|j| {
            let at_point: Vec<f64> = ok.iter().map(|t| t.predictions[j]).collect();
            variance(&at_point, 1)
        })
        .fold(0.0, f64::max);
    let trial_mapes: Vec<f64> = ok.iter().map(|t| t.mape).collect();
    let epochs: Vec<f64> = ok.iter().map(|t| t.epochs as f64).collect();
    Ok(RobustnessReport {
        max_pred_variance,
        mape_variance: variance(&trial_mapes, 1),
        avg_epochs: mean(&epochs),
        trials: trial_seeds.len(),
        failed_trials: failed,
    })
}

/// Robustness study with seeds derived per trial index from `seed`.
pub fn monte_carlo_cv(
    ds: &Dataset,
    trials: usize,
    holdout_fraction: f64,
    train_fraction: f64,
    seed: u64,
    fit: impl Fn(&Dataset, u64) -> Result<FittedModel> + Sync,
) -> Result<RobustnessReport> {
    let seeds: Vec<u64> = (0..trials as u64)
        .map(|i| sub_seed_indexed(seed, "mc-trial", i))
        .collect();
    monte_carlo_cv_with_seeds(ds, &seeds, holdout_fraction, train_fraction, seed, fit)
}

// ---------------------------------------------------------------------------
// Mann–Whitney U test
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UTestMethod {
    Exact,
    NormalApprox,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UTestResult {
    pub u: f64,
    pub p: f64,
    pub method: UTestMethod,
}

/// Midranks of the pooled sample: tied values share the average of the ranks
/// they occupy (1-based).
fn midranks(pooled: &[f64]) -> Vec<f64> {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && pooled[order[j + 1]] == pooled[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn u_from_rank_sum(rank_sum_a: f64, n1: usize) -> f64 {
    rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0
}

/// Standard normal CDF via the Abramowitz–Stegun 26.2.17 polynomial
/// (absolute error below 7.5e-8).
pub fn standard_normal_cdf(x: f64) -> f64 {
    if x < 0.0 {
        return 1.0 - standard_normal_cdf(-x);
    }
    let t = 1.0 / (1.0 + 0.2316419 * x);
    let poly = t
        * (0.319381530
            + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))));
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    1.0 - pdf * poly
}

/// Exact two-sided permutation p-value: enumerate every way of choosing which
/// pooled positions belong to sample A and count arrangements at least as
/// extreme as the observed `U`.
fn exact_two_sided_p(ranks: &[f64], n1: usize, u_obs: f64) -> f64 {
    let n = ranks.len();
    let mu = (n1 * (n - n1)) as f64 / 2.0;
    let obs_dev = (u_obs - mu).abs();
    let mut extreme: u64 = 0;
    let mut total: u64 = 0;
    // Lexicographic combination walk over index subsets of size n1.
    let mut comb: Vec<usize> = (0..n1).collect();
    loop {
        let rank_sum: f64 = comb.iter().map(|&i| ranks[i]).sum();
        let u = u_from_rank_sum(rank_sum, n1);
        total += 1;
        if (u - mu).abs() >= obs_dev - 1e-9 {
            extreme += 1;
        }
        // Advance to the next combination.
        let mut k = n1;
        loop {
            if k == 0 {
                return extreme as f64 / total as f64;
            }
            k -= 1;
            if comb[k] != k + n - n1 {
                break;
            }
        }
        if comb[n1 - 1] == n - 1 && comb[0] == n - n1 {
            return extreme as f64 / total as f64;
        }
        comb[k] += 1;
        for j in k + 1..n1 {
            comb[j] = comb[j - 1] + 1;
        }
    }
}

const EXACT_LIMIT: usize = 8;

/// Two-sided Mann–Whitney U test. Small samples (`n₁, n₂ ≤ 8`) get the
/// exact permutation distribution; larger ones the normal approximation with
/// tie and continuity corrections.
pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64]) -> Result<UTestResult> {
    let method = if sample_a.len() <= EXACT_LIMIT && sample_b.len() <= EXACT_LIMIT {
        UTestMethod::Exact
    } else {
        UTestMethod::NormalApprox
    };
    mann_whitney_u_method(sample_a, sample_b, method)
}

/// Mann–Whitney U test with the distribution method forced (for comparing
/// the two paths against each other).
pub fn mann_whitney_u_method(
    sample_a: &[f64],
    sample_b: &[f64],
    method: UTestMethod,
) -> Result<UTestResult> {
    if sample_a.is_empty() || sample_b.is_empty() {
        return Err(Error::InvalidConfig(
            "rank test samples must be non-empty".to_string(),
        ));
    }
    let n1 = sample_a.len();
    let n2 = sample_b.len();
    let pooled: Vec<f64> = sample_a.iter().chain(sample_b).copied().collect();
    if pooled.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidConfig(
            "rank test samples must be finite".to_string(),
        ));
    }
    let ranks = midranks(&pooled);
    let rank_sum_a: f64 = ranks[..n1].iter().sum();
    let u = u_from_rank_sum(rank_sum_a, n1);
    let mu = (n1 * n2) as f64 / 2.0;

    let p = match method {
        UTestMethod::Exact => exact_two_sided_p(&ranks, n1, u),
        UTestMethod::NormalApprox => {
            let n = (n1 + n2) as f64;
            // Tie correction over groups of equal pooled values.
            let mut sorted = pooled.clone();
            sorted.sort_by(f64::total_cmp);
            let mut tie_term = 0.0;
            let mut i = 0;
            while i < sorted.len() {
                let mut j = i;
                while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
                    j += 1;
                }
                let t = (j - i + 1) as f64;
                tie_term += t * t * t - t;
                i = j + 1;
            }
            let var = (n1 * n2) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
            if var <= 0.0 {
                1.0
            } else {
                let dev = u - mu;
                // Continuity correction shrinks the deviation by one half.
                let z = (dev.abs() - 0.5).max(0.0) / var.sqrt();
                (2.0 * (1.0 - standard_normal_cdf(z))).clamp(f64::MIN_POSITIVE, 1.0)
            }
        }
    };
    Ok(UTestResult { u, p, method })
}

// ---------------------------------------------------------------------------
// Kernel density estimation
// ---------------------------------------------------------------------------

/// A density estimate evaluated on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KdeCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

/// Silverman's rule of thumb: `h = 0.9·min(σ, IQR/1.34)·n^{−1/5}` with the
/// sample (n−1) stddev; falls back to σ when the interquartile range is
/// degenerate.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    if sample.len() < 2 {
        return Err(Error::InvalidConfig(
            "bandwidth needs at least 2 points".to_string(),
        ));
    }
    let sigma = variance(sample, 1).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::InvalidConfig(
            "bandwidth needs a non-degenerate sample".to_string(),
        ));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let spread = if iqr > 0.0 { sigma.min(iqr / 1.34) } else { sigma };
    Ok(0.9 * spread * (sample.len() as f64).powf(-0.2))
}

/// Gaussian-kernel density estimate on the given grid.
pub fn kde(sample: &[f64], grid: &[f64]) -> Result<KdeCurve> {
    let h = silverman_bandwidth(sample)?;
    let norm = 1.0 / (sample.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let density = grid
        .iter()
        .map(|&x| {
            sample
                .iter()
                .map(|&xi| (-0.5 * ((x - xi) / h).powi(2)).exp())
                .sum::<f64>()
                * norm
        })
        .collect();
    Ok(KdeCurve {
        grid: grid.to_vec(),
        density,
        bandwidth: h,
    })
}

/// Evenly spaced grid spanning the sample range padded by `pad` bandwidths on
/// each side.
pub fn kde_grid(sample: &[f64], n_points: usize, pad: f64) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::InvalidConfig("grid needs at least 2 points".to_string()));
    }
    let h = silverman_bandwidth(sample)?;
    let lo = sample.iter().copied().fold(f64::INFINITY, f64::min) - pad * h;
    let hi = sample.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad * h;
    Ok((0..n_points)
        .map(|i| lo + (hi - lo) * i as f64 / (n_points - 1) as f64)
        .collect())
}

/// Trapezoid integral of a curve (sanity checks on KDE normalization).
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (y[0] + y[1]) * (x[1] - x[0]))
        .sum()
}

// ---------------------------------------------------------------------------
// Histogram of the blending-weight trace
// ---------------------------------------------------------------------------

/// Fixed-range histogram over `[0, 1]` for per-epoch weight traces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` edges from 0 to 1.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

/// Bin a λ-trace into equal-width bins on `[0, 1]`; values on the upper edge
/// land in the last bin.
pub fn lambda_histogram(trace: &[f64], bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram needs at least one bin".to_string()));
    }
    let edges: Vec<f64> = (0..=bins).map(|i| i as f64 / bins as f64).collect();
    let mut counts = vec![0usize; bins];
    for &v in trace {
        let idx = ((v * bins as f64).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram { edges, counts })
}
