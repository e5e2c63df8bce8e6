//! Dataset loading, synthesis, normalization, and splitting.
//!
//! Targets are Nusselt numbers (dimensionless). Since the original CFD tables
//! are not public, [`synthesize`] generates stand-in datasets from published
//! forced-convection correlations: Dittus–Boelter for the water-like source
//! domain and Seban–Shimazaki for the sodium-like (liquid metal) target
//! domain. Both domains expose two features so that a network trained on one
//! can be transplanted onto the other unchanged.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column affine normalization statistics (population convention).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub stddev: Vec<f64>,
}

impl NormStats {
    /// Map one raw feature row into normalized coordinates.
    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(&x, (&m, &s))| (x - m) / s)
            .collect()
    }

    /// Inverse of [`NormStats::apply`].
    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.stddev))
            .map(|(&z, (&m, &s))| z * s + m)
            .collect()
    }
}

/// An in-memory tabular dataset: `N × D` features plus an `N`-vector of
/// targets.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub feature_names: Vec<String>,
    pub target_name: String,
    /// Statistics under which `features` are expressed, if normalized.
    pub norm: Option<NormStats>,
}

impl Dataset {
    pub fn from_parts(
        features: Vec<Vec<f64>>,
        targets: Vec<f64>,
        feature_names: Vec<String>,
        target_name: String,
    ) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if features.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                found: targets.len(),
            });
        }
        let d = features[0].len();
        if d == 0 || feature_names.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d.max(1),
                found: feature_names.len(),
            });
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            if row.iter().any(|x| !x.is_finite()) || !targets[i].is_finite() {
                return Err(Error::Other(format!("non-finite entry in row {}", i + 1)));
            }
        }
        Ok(Dataset {
            features,
            targets,
            feature_names,
            target_name,
            norm: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.targets.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows selected by index, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i]).collect(),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            norm: self.norm.clone(),
        }
    }

    /// Write the dataset as a headered CSV file.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Other(format!("csv write failed: {other:?}")),
        })?;
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.target_name);
        w.write_record(&header)
            .map_err(|e| Error::Other(format!("csv write failed: {e}")))?;
        for (row, &t) in self.features.iter().zip(&self.targets) {
            let mut rec: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            rec.push(format!("{t:?}"));
            w.write_record(&rec)
                .map_err(|e| Error::Other(format!("csv write failed: {e}")))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Read a headered CSV file. The target column is `target_column` if given,
/// otherwise the last column; all other columns become features.
pub fn load_csv(path: &Path, target_column: Option<&str>) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Other(format!("unreadable csv header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 {
        return Err(Error::TooFewColumns { found: header.len() });
    }
    let target_idx = match target_column {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingTargetColumn(name.to_string()))?,
        None => header.len() - 1,
    };
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Other(format!("csv parse failed: {e}")))?;
        let mut row = Vec::with_capacity(header.len() - 1);
        let mut target = None;
        for (c, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::CsvCell {
                row: r + 1,
                column: header.get(c).cloned().unwrap_or_else(|| format!("#{c}")),
                message: format!("not a number: `{cell}`"),
            })?;
            if c == target_idx {
                target = Some(value);
            } else {
                row.push(value);
            }
        }
        let target = target.ok_or(Error::CsvCell {
            row: r + 1,
            column: header[target_idx].clone(),
            message: "missing target cell".to_string(),
        })?;
        features.push(row);
        targets.push(target);
    }
    if features.is_empty() {
        return Err(Error::NoRows);
    }
    Dataset::from_parts(
        features,
        targets,
        feature_names,
        header[target_idx].clone(),
    )
}

/// Which physical analog a synthetic dataset imitates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    /// Source domain: ordinary fluid, Dittus–Boelter `Nu = 0.023·Re^0.8·Pr^0.4`.
    WaterAnalog,
    /// Target domain: liquid metal, Seban–Shimazaki `Nu = 5.0 + 0.025·Pe^0.8`.
    SodiumAnalog,
}

impl Domain {
    pub fn feature_names(self) -> Vec<String> {
        match self {
            Domain::WaterAnalog => vec!["re".to_string(), "pr".to_string()],
            Domain::SodiumAnalog => vec!["pe".to_string(), "ar".to_string()],
        }
    }
}

/// Noise-free Nusselt number from the domain's correlation.
pub fn correlation_truth(domain: Domain, features: &[f64]) -> f64 {
    match domain {
        Domain::WaterAnalog => 0.023 * features[0].powf(0.8) * features[1].powf(0.4),
        // The aspect-ratio feature is a deliberate nuisance input: the
        // correlation depends on Peclet number only.
        Domain::SodiumAnalog => 5.0 + 0.025 * features[0].powf(0.8),
    }
}

/// Recipe for a synthetic dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub domain: Domain,
    pub n_points: usize,
    /// Sampling range per feature, `(low, high)` with `low < high`.
    pub ranges: Vec<(f64, f64)>,
    /// Relative stddev of multiplicative Gaussian noise on the targets.
    pub noise_stddev: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// Water-analog preset: `Re ∈ [5e3, 5e4]`, `Pr ∈ [2, 7]`.
    pub fn water(n_points: usize, noise_stddev: f64, seed: u64) -> Self {
        SynthSpec {
            domain: Domain::WaterAnalog,
            n_points,
            ranges: vec![(5.0e3, 5.0e4), (2.0, 7.0)],
            noise_stddev,
            seed,
        }
    }

    /// Sodium-analog preset: `Pe ∈ [100, 2000]`, aspect ratio `∈ [1, 8]`.
    pub fn sodium(n_points: usize, noise_stddev: f64, seed: u64) -> Self {
        SynthSpec {
            domain: Domain::SodiumAnalog,
            n_points,
            ranges: vec![(100.0, 2000.0), (1.0, 8.0)],
            noise_stddev,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidConfig(
                "synthetic dataset needs at least 2 points".to_string(),
            ));
        }
        if self.ranges.len() != self.domain.feature_names().len() {
            return Err(Error::InvalidConfig(format!(
                "expected {} feature ranges, got {}",
                self.domain.feature_names().len(),
                self.ranges.len()
            )));
        }
        if self.ranges.iter().any(|&(lo, hi)| !(lo < hi)) {
            return Err(Error::InvalidConfig(
                "feature ranges must satisfy low < high".to_string(),
            ));
        }
        if !(self.noise_stddev >= 0.0) {
            return Err(Error::InvalidConfig(
                "noise_stddev must be non-negative".to_string(),
            ));
        }
        Ok(())
    }
}

/// Draw a dataset from a [`SynthSpec`]: features uniform per range, targets
/// from the domain correlation with multiplicative Gaussian noise.
/// Deterministic for a fixed spec.
pub fn synthesize(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_stddev)
        .map_err(|e| Error::InvalidConfig(format!("bad noise stddev: {e}")))?;
    let mut features = Vec::with_capacity(spec.n_points);
    let mut targets = Vec::with_capacity(spec.n_points);
    for _ in 0..spec.n_points {
        let row: Vec<f64> = spec
            .ranges
            .iter()
            .map(|&(lo, hi)| rng.random_range(lo..hi))
            .collect();
        let clean = correlation_truth(spec.domain, &row);
        // Clamp keeps Nusselt targets strictly positive even under extreme
        // noise draws.
        let factor = (1.0 + noise.sample(&mut rng)).max(0.05);
        features.push(row);
        targets.push(clean * factor);
    }
    Dataset::from_parts(
        features,
        targets,
        spec.domain.feature_names(),
        "nu".to_string(),
    )
}

/// Synthetic 1-D convection–diffusion dataset: `x` uniform in `[0, 1]`,
/// targets `1 + (e^{Pe·x} − 1)/(e^{Pe} − 1)` with multiplicative Gaussian
/// noise. The unit offset keeps every target nonzero so relative errors are
/// defined everywhere; the offset field satisfies the same source-free
/// residual, with boundary values `(1, 2)`.
pub fn synthesize_convdiff(
    peclet: f64,
    n_points: usize,
    noise_stddev: f64,
    seed: u64,
) -> Result<Dataset> {
    if !(peclet.is_finite() && peclet > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "Peclet number must be positive and finite, got {peclet}"
        )));
    }
    if n_points < 2 {
        return Err(Error::InvalidConfig(
            "synthetic dataset needs at least 2 points".to_string(),
        ));
    }
    if !(noise_stddev >= 0.0) {
        return Err(Error::InvalidConfig(
            "noise_stddev must be non-negative".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_stddev)
        .map_err(|e| Error::InvalidConfig(format!("bad noise stddev: {e}")))?;
    let mut features = Vec::with_capacity(n_points);
    let mut targets = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let x = rng.random_range(0.0..1.0);
        let clean = 1.0 + crate::pde::convdiff_exact(peclet, x);
        let factor = (1.0 + noise.sample(&mut rng)).max(0.05);
        features.push(vec![x]);
        targets.push(clean * factor);
    }
    Dataset::from_parts(features, targets, vec!["x".to_string()], "t".to_string())
}

/// Standardize each feature column to mean 0, stddev 1 (population
/// convention). Targets are untouched.
pub fn normalize(ds: &Dataset) -> Result<(Dataset, NormStats)> {
    let n = ds.n_rows() as f64;
    let d = ds.n_features();
    let mut mean = vec![0.0; d];
    let mut stddev = vec![0.0; d];
    for j in 0..d {
        let m: f64 = ds.features.iter().map(|r| r[j]).sum::<f64>() / n;
        let var: f64 = ds.features.iter().map(|r| (r[j] - m).powi(2)).sum::<f64>() / n;
        let s = var.sqrt();
        if s == 0.0 {
            return Err(Error::ConstantColumn(ds.feature_names[j].clone()));
        }
        mean[j] = m;
        stddev[j] = s;
    }
    let stats = NormStats { mean, stddev };
    let mut out = ds.clone();
    for row in &mut out.features {
        *row = stats.apply(row);
    }
    out.norm = Some(stats.clone());
    Ok((out, stats))
}

/// Undo [`normalize`] with the given statistics.
pub fn denormalize(ds: &Dataset, stats: &NormStats) -> Dataset {
    let mut out = ds.clone();
    for row in &mut out.features {
        *row = stats.invert(row);
    }
    out.norm = None;
    out
}

/// Number of rows the first split part receives: `fraction·N`, rounded half
/// up.
pub fn split_size(n: usize, fraction: f64) -> usize {
    (fraction * n as f64 + 0.5).floor() as usize
}

/// Random disjoint split into `(⌊fraction·N⌉, rest)` rows; deterministic per
/// seed.
pub fn split(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "split fraction must lie in (0,1), got {fraction}"
        )));
    }
    let n = ds.n_rows();
    let n_a = split_size(n, fraction);
    if n_a == 0 || n_a == n {
        return Err(Error::EmptySplit { fraction, n });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    Ok((ds.subset(&indices[..n_a]), ds.subset(&indices[n_a..])))
}
