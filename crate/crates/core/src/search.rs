//! Hyperparameter search: random search, Bayesian optimization with a
//! Gaussian-process surrogate and expected improvement, and a genetic
//! algorithm over network architectures.
//!
//! All searchers are deterministic for a fixed seed, evaluate exactly their
//! stated budget, and score failed objective evaluations as `+inf` so a
//! failure is recorded in the history but can never be selected as the best.

use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gp::{gp_fit, gp_predict, GpModel};
use crate::mlp::ArchSpec;
use crate::seed::{sub_seed, sub_seed_indexed};
use crate::stats::standard_normal_cdf;

/// Observation noise used when fitting the Bayesian-optimization surrogate.
pub const BO_SURROGATE_NOISE: f64 = 1e-6;
/// Number of random candidates scored by expected improvement per iteration.
pub const BO_N_CANDIDATES: usize = 1024;
/// Per-gene mutation probability for the genetic algorithm.
pub const GA_MUTATION_PROB: f64 = 0.2;
/// Tournament size for genetic-algorithm parent selection.
pub const GA_TOURNAMENT_SIZE: usize = 2;

// ---------------------------------------------------------------------------
// Search space
// ---------------------------------------------------------------------------

/// The kind of a single search dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ParamKind {
    /// Continuous, sampled uniformly in log space. Bounds must be positive.
    LogReal { low: f64, high: f64 },
    /// Continuous, sampled uniformly.
    LinearReal { low: f64, high: f64 },
    /// Integer, inclusive bounds, sampled uniformly.
    Integer { low: i64, high: i64 },
    /// One of a fixed list of named choices, sampled uniformly.
    Categorical { choices: Vec<String> },
}

/// One named dimension of a search space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDim {
    pub name: String,
    pub kind: ParamKind,
}

/// An axis-aligned search space: one [`ParamDim`] per dimension.
///
/// Points are encoded as `Vec<f64>` with one entry per dimension: the raw
/// value for real dimensions, the value as `f64` for integers, and the choice
/// index as `f64` for categoricals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpace {
    pub dims: Vec<ParamDim>,
}

impl ParamSpace {
    pub fn new(dims: Vec<ParamDim>) -> Result<Self> {
        let space = Self { dims };
        space.validate()?;
        Ok(space)
    }

    /// Checks bounds: finite, `low < high`, log bounds positive, choices
    /// non-empty. Every searcher calls this before sampling.
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidConfig(
                "search space must have at least one dimension".into(),
            ));
        }
        for dim in &self.dims {
            match &dim.kind {
                ParamKind::LogReal { low, high } => {
                    if !low.is_finite() || !high.is_finite() || *low <= 0.0 || low >= high {
                        return Err(Error::InvalidConfig(format!(
                            "dimension '{}': log bounds must be finite, positive, low < high (got {low}, {high})",
                            dim.name
                        )));
                    }
                }
                ParamKind::LinearReal { low, high } => {
                    if !low.is_finite() || !high.is_finite() || low >= high {
                        return Err(Error::InvalidConfig(format!(
                            "dimension '{}': bounds must be finite with low < high (got {low}, {high})",
                            dim.name
                        )));
                    }
                }
                ParamKind::Integer { low, high } => {
                    if low >= high {
                        return Err(Error::InvalidConfig(format!(
                            "dimension '{}': integer bounds must satisfy low < high (got {low}, {high})",
                            dim.name
                        )));
                    }
                }
                ParamKind::Categorical { choices } => {
                    if choices.is_empty() {
                        return Err(Error::InvalidConfig(format!(
                            "dimension '{}': categorical choices must be non-empty",
                            dim.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    /// Draws one encoded point uniformly (log-uniform for log dimensions).
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.dims
            .iter()
            .map(|dim| match &dim.kind {
                ParamKind::LogReal { low, high } => {
                    rng.random_range(low.ln()..high.ln()).exp()
                }
                ParamKind::LinearReal { low, high } => rng.random_range(*low..*high),
                ParamKind::Integer { low, high } => rng.random_range(*low..=*high) as f64,
                ParamKind::Categorical { choices } => {
                    rng.random_range(0..choices.len()) as f64
                }
            })
            .collect()
    }

    /// Maps an encoded point into `[0, 1]^D` for the surrogate model:
    /// log dimensions are scaled in log space, categoricals by choice index.
    pub fn scale01(&self, point: &[f64]) -> Result<Vec<f64>> {
        if point.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: point.len(),
            });
        }
        Ok(self
            .dims
            .iter()
            .zip(point)
            .map(|(dim, &v)| match &dim.kind {
                ParamKind::LogReal { low, high } => {
                    (v.ln() - low.ln()) / (high.ln() - low.ln())
                }
                ParamKind::LinearReal { low, high } => (v - low) / (high - low),
                ParamKind::Integer { low, high } => {
                    (v - *low as f64) / (*high as f64 - *low as f64)
                }
                ParamKind::Categorical { choices } => {
                    if choices.len() == 1 {
                        0.5
                    } else {
                        v / (choices.len() - 1) as f64
                    }
                }
            })
            .collect())
    }

    /// Decodes an encoded point into named typed values.
    pub fn decode(&self, point: &[f64]) -> Result<Vec<(String, ParamValue)>> {
        if point.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: point.len(),
            });
        }
        Ok(self
            .dims
            .iter()
            .zip(point)
            .map(|(dim, &v)| {
                let value = match &dim.kind {
                    ParamKind::LogReal { .. } | ParamKind::LinearReal { .. } => {
                        ParamValue::Real(v)
                    }
                    ParamKind::Integer { .. } => ParamValue::Int(v.round() as i64),
                    ParamKind::Categorical { choices } => {
                        ParamValue::Choice(choices[v.round() as usize].clone())
                    }
                };
                (dim.name.clone(), value)
            })
            .collect())
    }
}

/// A decoded parameter value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Int(i64),
    Choice(String),
}

// ---------------------------------------------------------------------------
// Trials and outcomes
// ---------------------------------------------------------------------------

/// One objective evaluation. `objective` is `+inf` iff `failed` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    /// Encoded point in the search space.
    pub point: Vec<f64>,
    /// Objective value (lower is better); `+inf` for failed evaluations.
    pub objective: f64,
    /// Zero-based evaluation index.
    pub iter: usize,
    /// Wall-clock time spent in the objective. Never written to report files.
    pub wall_time_secs: f64,
    /// True if the objective returned an error or a non-finite value.
    pub failed: bool,
}

/// Result of a random or Bayesian search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    /// The best successful trial (lowest objective; earliest on ties).
    pub best: Trial,
    /// Every trial in evaluation order; length equals the budget.
    pub history: Vec<Trial>,
    /// Evaluation indices where the surrogate could not be used and the
    /// point fell back to a random draw. Always empty for random search.
    pub surrogate_fallbacks: Vec<usize>,
}

/// Running minimum of the objective over the history, index by index.
pub fn best_so_far(history: &[Trial]) -> Vec<f64> {
    let mut best = f64::INFINITY;
    history
        .iter()
        .map(|t| {
            best = best.min(t.objective);
            best
        })
        .collect()
}

fn make_trial(point: Vec<f64>, outcome: Result<f64>, iter: usize, secs: f64) -> Trial {
    match outcome {
        Ok(v) if v.is_finite() => Trial {
            point,
            objective: v,
            iter,
            wall_time_secs: secs,
            failed: false,
        },
        _ => Trial {
            point,
            objective: f64::INFINITY,
            iter,
            wall_time_secs: secs,
            failed: true,
        },
    }
}

/// Index of the best successful trial: lowest objective, earliest on ties.
fn best_index(history: &[Trial]) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, t) in history.iter().enumerate() {
        if t.failed {
            continue;
        }
        if best.is_none_or(|b| t.objective < history[b].objective) {
            best = Some(i);
        }
    }
    best.ok_or(Error::AllTrialsFailed(history.len()))
}

// ---------------------------------------------------------------------------
// Random search
// ---------------------------------------------------------------------------

/// Uniform random search: exactly `budget` independent draws from `space`.
///
/// Evaluations may run in parallel; the history is still ordered by draw
/// index and the result is deterministic for a fixed seed. Returns
/// [`Error::AllTrialsFailed`] if no evaluation succeeds.
pub fn random_search<F>(
    space: &ParamSpace,
    objective: F,
    budget: usize,
    seed: u64,
) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    space.validate()?;
    if budget == 0 {
        return Err(Error::InvalidConfig("search budget must be at least 1".into()));
    }
    let points: Vec<Vec<f64>> = (0..budget)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed_indexed(seed, "rs-trial", i as u64));
            space.sample(&mut rng)
        })
        .collect();
    let history: Vec<Trial> = points
        .into_par_iter()
        .enumerate()
        .map(|(i, p)| {
            let t0 = Instant::now();
            let out = objective(&p);
            make_trial(p, out, i, t0.elapsed().as_secs_f64())
        })
        .collect();
    let best = history[best_index(&history)?].clone();
    Ok(SearchOutcome {
        best,
        history,
        surrogate_fallbacks: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// Expected improvement and Bayesian optimization
// ---------------------------------------------------------------------------

/// Expected improvement of a Gaussian posterior `N(mean, sd^2)` over the
/// current best (for minimization):
/// `EI = (best - mean) * Phi(z) + sd * phi(z)` with `z = (best - mean) / sd`.
///
/// At `sd == 0` this degenerates to `max(best - mean, 0)`; the result is
/// always non-negative.
pub fn expected_improvement(mean: f64, sd: f64, best: f64) -> f64 {
    if sd <= 0.0 {
        return (best - mean).max(0.0);
    }
    let z = (best - mean) / sd;
    let phi = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let ei = (best - mean) * standard_normal_cdf(z) + sd * phi;
    ei.max(0.0)
}

fn fit_surrogate(space: &ParamSpace, history: &[Trial]) -> Result<GpModel> {
    let ok: Vec<&Trial> = history.iter().filter(|t| !t.failed).collect();
    if ok.len() < 2 {
        return Err(Error::InvalidConfig(
            "surrogate needs at least two successful trials".into(),
        ));
    }
    let features: Result<Vec<Vec<f64>>> =
        ok.iter().map(|t| space.scale01(&t.point)).collect();
    let names = (0..space.n_dims()).map(|d| format!("x{d}")).collect();
    let ds = Dataset::from_parts(
        features?,
        ok.iter().map(|t| t.objective).collect(),
        names,
        "objective".into(),
    )?;
    let gamma = 1.0 / space.n_dims() as f64;
    gp_fit(&ds, gamma, BO_SURROGATE_NOISE)
}

/// Bayesian optimization: `n_init` uniform draws, then `budget - n_init`
/// iterations that fit a Gaussian-process surrogate on all successful trials
/// (inputs min-max scaled to the unit cube, `gamma = 1/D`) and evaluate the
/// candidate with the highest expected improvement among
/// [`BO_N_CANDIDATES`] fresh uniform candidates (ties break to the lowest
/// candidate index).
///
/// If the surrogate cannot be fitted the iteration falls back to a random
/// draw and its index is recorded in `surrogate_fallbacks`. Requires
/// `budget > n_init >= 2`. Evaluations are strictly sequential.
pub fn bayes_opt<F>(
    space: &ParamSpace,
    objective: F,
    budget: usize,
    n_init: usize,
    seed: u64,
) -> Result<SearchOutcome>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    space.validate()?;
    if n_init < 2 || budget <= n_init {
        return Err(Error::InvalidConfig(format!(
            "bayesian search requires budget > n_init >= 2 (got budget {budget}, n_init {n_init})"
        )));
    }
    let mut history: Vec<Trial> = Vec::with_capacity(budget);
    let mut fallbacks = Vec::new();
    for i in 0..n_init {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed_indexed(seed, "bo-init", i as u64));
        let p = space.sample(&mut rng);
        let t0 = Instant::now();
        let out = objective(&p);
        history.push(make_trial(p, out, i, t0.elapsed().as_secs_f64()));
    }
    for i in n_init..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed_indexed(seed, "bo-cand", i as u64));
        let point = match fit_surrogate(space, &history) {
            Ok(model) => {
                let f_best = history
                    .iter()
                    .filter(|t| !t.failed)
                    .map(|t| t.objective)
                    .fold(f64::INFINITY, f64::min);
                let mut best_ei = f64::NEG_INFINITY;
                let mut best_cand: Option<Vec<f64>> = None;
                for _ in 0..BO_N_CANDIDATES {
                    let cand = space.sample(&mut rng);
                    let scaled = space.scale01(&cand)?;
                    let (mean, var) = gp_predict(&model, &scaled)?;
                    let ei = expected_improvement(mean, var.sqrt(), f_best);
                    // Strict comparison keeps the lowest-index candidate on ties.
                    if ei > best_ei {
                        best_ei = ei;
                        best_cand = Some(cand);
                    }
                }
                best_cand.expect("candidate loop ran at least once")
            }
            Err(_) => {
                fallbacks.push(i);
                space.sample(&mut rng)
            }
        };
        let t0 = Instant::now();
        let out = objective(&point);
        history.push(make_trial(point, out, i, t0.elapsed().as_secs_f64()));
    }
    let best = history[best_index(&history)?].clone();
    Ok(SearchOutcome {
        best,
        history,
        surrogate_fallbacks: fallbacks,
    })
}

// ---------------------------------------------------------------------------
// Genetic algorithm over architectures
// ---------------------------------------------------------------------------

/// Bounds for the architecture genome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeSpace {
    /// Inclusive range for the number of hidden layers.
    pub layer_range: (usize, usize),
    /// Inclusive range for each hidden-layer width.
    pub width_range: (usize, usize),
    /// Range for the base-10 learning-rate exponent.
    pub lr_exp_range: (f64, f64),
}

impl Default for GenomeSpace {
    /// 1-4 hidden layers, widths 1-64, learning rate `10^e` with `e` in [-4, 0).
    fn default() -> Self {
        Self {
            layer_range: (1, 4),
            width_range: (1, 64),
            lr_exp_range: (-4.0, 0.0),
        }
    }
}

impl GenomeSpace {
    pub fn validate(&self) -> Result<()> {
        let (lmin, lmax) = self.layer_range;
        let (wmin, wmax) = self.width_range;
        let (emin, emax) = self.lr_exp_range;
        if lmin < 1 || lmin > lmax {
            return Err(Error::InvalidConfig(format!(
                "layer range must satisfy 1 <= min <= max (got {lmin}..={lmax})"
            )));
        }
        if wmin < 1 || wmin > wmax {
            return Err(Error::InvalidConfig(format!(
                "width range must satisfy 1 <= min <= max (got {wmin}..={wmax})"
            )));
        }
        if !emin.is_finite() || !emax.is_finite() || emin >= emax {
            return Err(Error::InvalidConfig(format!(
                "learning-rate exponent range must be finite with min < max (got {emin}, {emax})"
            )));
        }
        Ok(())
    }

    fn random_genome(&self, rng: &mut ChaCha8Rng) -> Genome {
        let n_layers = rng.random_range(self.layer_range.0..=self.layer_range.1);
        let hidden = (0..n_layers)
            .map(|_| rng.random_range(self.width_range.0..=self.width_range.1))
            .collect();
        let lr_exponent = rng.random_range(self.lr_exp_range.0..self.lr_exp_range.1);
        Genome { hidden, lr_exponent }
    }
}

/// An architecture candidate: hidden-layer widths plus a learning-rate
/// exponent. Decodes to a valid network shape for any input width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub hidden: Vec<usize>,
    pub lr_exponent: f64,
}

impl Genome {
    /// Network shape for `n_inputs` features and a single output.
    pub fn arch(&self, n_inputs: usize) -> ArchSpec {
        ArchSpec {
            n_inputs,
            hidden: self.hidden.clone(),
            n_outputs: 1,
        }
    }

    /// Learning rate `10^lr_exponent`.
    pub fn learning_rate(&self) -> f64 {
        10f64.powf(self.lr_exponent)
    }
}

/// Result of a genetic-algorithm search.
#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Genome,
    /// Fitness of `best`; `+inf` only if every evaluation ever made failed.
    pub best_fitness: f64,
    /// Best fitness within each generation, in order. Non-increasing because
    /// the best genome is carried over unchanged (elitism of one).
    pub generation_best: Vec<f64>,
    /// Total objective evaluations: `population * generations`.
    pub evaluations: usize,
}

/// One-point crossover on the width lists: the child takes the first parent's
/// widths up to the cut, the second parent's widths from the cut on, and one
/// parent's learning-rate exponent at random.
fn crossover(a: &Genome, b: &Genome, rng: &mut ChaCha8Rng) -> Genome {
    let cut = rng.random_range(0..=a.hidden.len().min(b.hidden.len()));
    let mut hidden: Vec<usize> = a.hidden[..cut].to_vec();
    hidden.extend_from_slice(&b.hidden[cut..]);
    let lr_exponent = if rng.random_bool(0.5) { a.lr_exponent } else { b.lr_exponent };
    Genome { hidden, lr_exponent }
}

/// Mutates each gene independently with probability `prob`: every width may
/// change (half the time by a small +/-1..3 step for local refinement, half
/// by a fresh uniform draw for global exploration), the layer count may be
/// resampled (truncating or appending random widths), and the learning-rate
/// exponent may be resampled.
fn mutate(genome: &mut Genome, space: &GenomeSpace, prob: f64, rng: &mut ChaCha8Rng) {
    for w in &mut genome.hidden {
        if rng.random_bool(prob) {
            if rng.random_bool(0.5) {
                let step = rng.random_range(1..=3i64);
                let sign = if rng.random_bool(0.5) { 1 } else { -1 };
                let moved = (*w as i64 + sign * step)
                    .clamp(space.width_range.0 as i64, space.width_range.1 as i64);
                *w = moved as usize;
            } else {
                *w = rng.random_range(space.width_range.0..=space.width_range.1);
            }
        }
    }
    if rng.random_bool(prob) {
        let new_len = rng.random_range(space.layer_range.0..=space.layer_range.1);
        while genome.hidden.len() > new_len {
            genome.hidden.pop();
        }
        // Growing duplicates the last layer's width so deepening preserves
        // whatever width the search has already settled on.
        while genome.hidden.len() < new_len {
            let last = *genome.hidden.last().expect("genome has at least one layer");
            genome.hidden.push(last);
        }
    }
    if rng.random_bool(prob) {
        genome.lr_exponent = rng.random_range(space.lr_exp_range.0..space.lr_exp_range.1);
    }
}

/// Tournament of [`GA_TOURNAMENT_SIZE`]: draws indices uniformly (with
/// replacement) and keeps the fittest; ties break to the earlier draw.
fn tournament(fitness: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.random_range(0..fitness.len());
    for _ in 1..GA_TOURNAMENT_SIZE {
        let challenger = rng.random_range(0..fitness.len());
        if fitness[challenger] < fitness[winner] {
            winner = challenger;
        }
    }
    winner
}

/// Genetic-algorithm search over [`Genome`]s with the pinned mutation rate
/// [`GA_MUTATION_PROB`]. See [`ga_search_with_rates`].
pub fn ga_search<F>(
    space: &GenomeSpace,
    objective: F,
    population: usize,
    generations: usize,
    seed: u64,
) -> Result<GaOutcome>
where
    F: Fn(&Genome) -> Result<f64> + Sync,
{
    ga_search_with_rates(space, objective, population, generations, seed, GA_MUTATION_PROB)
}

/// Genetic-algorithm search with an explicit per-gene mutation probability.
///
/// Each generation evaluates the whole population (failures score `+inf`),
/// carries the single best genome over unchanged, and fills the rest of the
/// next generation with mutated crossovers of tournament-selected parents.
/// Requires `population >= 4` and `generations >= 1`. Evaluations within a
/// generation may run in parallel; the result is deterministic per seed.
pub fn ga_search_with_rates<F>(
    space: &GenomeSpace,
    objective: F,
    population: usize,
    generations: usize,
    seed: u64,
    mutation_prob: f64,
) -> Result<GaOutcome>
where
    F: Fn(&Genome) -> Result<f64> + Sync,
{
    space.validate()?;
    if population < 4 {
        return Err(Error::InvalidConfig(format!(
            "population must be at least 4 (got {population})"
        )));
    }
    if generations == 0 {
        return Err(Error::InvalidConfig("generations must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&mutation_prob) {
        return Err(Error::InvalidConfig(format!(
            "mutation probability must be in [0, 1] (got {mutation_prob})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "ga"));
    let mut pop: Vec<Genome> = (0..population).map(|_| space.random_genome(&mut rng)).collect();
    let mut generation_best = Vec::with_capacity(generations);
    let mut best: Option<(Genome, f64)> = None;
    let mut evaluations = 0;
    for _ in 0..generations {
        let fitness: Vec<f64> = pop
            .par_iter()
            .map(|g| match objective(g) {
                Ok(v) if v.is_finite() => v,
                _ => f64::INFINITY,
            })
            .collect();
        evaluations += population;
        let gen_best = (0..population)
            .min_by(|&a, &b| fitness[a].total_cmp(&fitness[b]))
            .expect("population is non-empty");
        generation_best.push(fitness[gen_best]);
        if best.as_ref().is_none_or(|(_, f)| fitness[gen_best] < *f) {
            best = Some((pop[gen_best].clone(), fitness[gen_best]));
        }
        let mut next = Vec::with_capacity(population);
        next.push(pop[gen_best].clone());
        while next.len() < population {
            let pa = tournament(&fitness, &mut rng);
            let pb = tournament(&fitness, &mut rng);
            let mut child = crossover(&pop[pa], &pop[pb], &mut rng);
            mutate(&mut child, space, mutation_prob, &mut rng);
            next.push(child);
        }
        pop = next;
    }
    let (best, best_fitness) = best.expect("at least one generation ran");
    Ok(GaOutcome {
        best,
        best_fitness,
        generation_best,
        evaluations,
    })
}

// ---------------------------------------------------------------------------
// Report files
// ---------------------------------------------------------------------------

/// Writes the trial history as CSV: `iter,objective,<dim names...>`.
/// Floats use their shortest round-trippable form; failed trials appear with
/// objective `inf`.
pub fn write_history_csv(space: &ParamSpace, history: &[Trial], path: &Path) -> Result<()> {
    let mut out = String::from("iter,objective");
    for dim in &space.dims {
        out.push(',');
        out.push_str(&dim.name);
    }
    out.push('\n');
    for t in history {
        out.push_str(&format!("{},{:?}", t.iter, t.objective));
        for v in &t.point {
            out.push_str(&format!(",{v:?}"));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Writes the best point as a JSON object mapping dimension names to decoded
/// values (numbers for real/integer dimensions, the choice string for
/// categoricals), suitable as a training-config fragment.
pub fn write_best_json(space: &ParamSpace, best: &Trial, path: &Path) -> Result<()> {
    let mut map = serde_json::Map::new();
    for (name, value) in space.decode(&best.point)? {
        let v = match value {
            ParamValue::Real(x) => serde_json::json!(x),
            ParamValue::Int(x) => serde_json::json!(x),
            ParamValue::Choice(s) => serde_json::json!(s),
        };
        map.insert(name, v);
    }
    map.insert("objective".into(), serde_json::json!(best.objective));
    let text = serde_json::to_string_pretty(&serde_json::Value::Object(map))
        .map_err(|e| Error::InvalidConfig(format!("failed to serialize best config: {e}")))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
