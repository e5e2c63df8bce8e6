//! Shared command plumbing: atomic report writing, config-file loading and
//! flag merging, seed resolution, and dataset sourcing.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use adaptive_pinn::data::{load_csv, synthesize, synthesize_convdiff, Dataset, SynthSpec};
use adaptive_pinn::error::{Error, Result};
use adaptive_pinn::seed::sub_seed;

/// Run-wide context assembled in `main`: where reports go and what the
/// config file (if any) contained.
pub struct Ctx {
    pub out: PathBuf,
    pub seed_flag: Option<u64>,
    pub config: serde_json::Value,
}

impl Ctx {
    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

// ---------------------------------------------------------------------------
// Atomic writes
// ---------------------------------------------------------------------------

/// Writes through a sibling temp file and renames it into place, so readers
/// never observe a partially written report.
pub fn atomic_write_with(path: &Path, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    write(&tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn atomic_write_str(path: &Path, content: &str) -> Result<()> {
    atomic_write_with(path, |tmp| {
        std::fs::write(tmp, content).map_err(|e| Error::io(tmp, e))
    })
}

/// Pretty-printed JSON with a trailing newline, written atomically.
pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Other(format!("failed to serialize {}: {e}", path.display())))?;
    atomic_write_str(path, &(text + "\n"))
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

/// Loads a JSON config file, or an empty object when none was given.
pub fn load_config_value(path: Option<&Path>) -> Result<serde_json::Value> {
    match path {
        None => Ok(serde_json::Value::Object(Default::default())),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::InvalidConfig(format!("config {}: {e}", p.display())))
        }
    }
}

/// Deserializes a command's resolved-config struct from the config file,
/// filling every missing field with its default. Rejects a config whose
/// `command` field names a different command.
pub fn resolved_from_config<T: DeserializeOwned>(
    config: &serde_json::Value,
    command: &str,
) -> Result<T> {
    if let Some(found) = config.get("command").and_then(|v| v.as_str()) {
        if found != command {
            return Err(Error::InvalidConfig(format!(
                "config file is for command `{found}`, not `{command}`"
            )));
        }
    }
    serde_json::from_value(config.clone())
        .map_err(|e| Error::InvalidConfig(format!("config: {e}")))
}

/// Root seed: flag beats config file beats the `ADAPTIVE_PINN_SEED`
/// environment variable beats 0.
pub fn resolve_seed(flag: Option<u64>, file: u64, file_had_seed: bool) -> u64 {
    if let Some(s) = flag {
        return s;
    }
    if file_had_seed {
        return file;
    }
    std::env::var("ADAPTIVE_PINN_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

pub fn config_has_seed(config: &serde_json::Value) -> bool {
    config.get("seed").is_some()
}

// ---------------------------------------------------------------------------
// Dataset sourcing
// ---------------------------------------------------------------------------

/// Where a command's dataset comes from: a CSV file, or one of the synthetic
/// generators.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSource {
    /// CSV file with feature columns and a trailing target column.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
    /// Synthetic generator when no file is given: `water`, `sodium`, or
    /// `convdiff`.
    pub synth: String,
    pub n: usize,
    pub noise: f64,
    /// Peclet number for the `convdiff` generator (and physics problems).
    pub peclet: f64,
}

impl Default for DataSource {
    fn default() -> Self {
        Self {
            data: None,
            synth: "sodium".into(),
            n: 87,
            noise: 0.05,
            peclet: 5.0,
        }
    }
}

impl DataSource {
    /// Loads or synthesizes the dataset; synthetic draws use the `data`
    /// sub-stream of the root seed.
    pub fn load(&self, root_seed: u64) -> Result<Dataset> {
        if let Some(p) = &self.data {
            return load_csv(Path::new(p), None);
        }
        let seed = sub_seed(root_seed, "data");
        match self.synth.as_str() {
            "water" => synthesize(&SynthSpec::water(self.n, self.noise, seed)),
            "sodium" => synthesize(&SynthSpec::sodium(self.n, self.noise, seed)),
            "convdiff" => synthesize_convdiff(self.peclet, self.n, self.noise, seed),
            other => Err(Error::InvalidConfig(format!(
                "unknown synthetic domain `{other}` (expected water, sodium, or convdiff)"
            ))),
        }
    }
}

/// Shared dataset flags; `None` means "use the config file or default".
#[derive(Debug, Clone, clap::Args)]
pub struct DataArgs {
    /// CSV dataset (features..., target); overrides --synth
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Synthetic generator: water, sodium, or convdiff
    #[arg(long)]
    pub synth: Option<String>,
    /// Synthetic dataset size
    #[arg(long)]
    pub n: Option<usize>,
    /// Relative noise level of synthetic targets
    #[arg(long)]
    pub noise: Option<f64>,
    /// Peclet number for the convdiff generator and physics problems
    #[arg(long)]
    pub peclet: Option<f64>,
}

impl DataArgs {
    /// Overlays present flags onto a config-derived source.
    pub fn overlay(&self, mut src: DataSource) -> DataSource {
        if let Some(p) = &self.data {
            src.data = Some(p.display().to_string());
        }
        if let Some(s) = &self.synth {
            src.synth = s.clone();
            // An explicit generator choice overrides a config-file path.
            if self.data.is_none() {
                src.data = None;
            }
        }
        if let Some(n) = self.n {
            src.n = n;
        }
        if let Some(x) = self.noise {
            src.noise = x;
        }
        if let Some(x) = self.peclet {
            src.peclet = x;
        }
        src
    }
}

/// Writes a dataset as CSV atomically.
pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    atomic_write_with(path, |tmp| ds.save_csv(tmp))
}

/// Reads one named column from a CSV file written by this toolkit.
pub fn read_csv_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or(Error::NoRows)?;
    let idx = header
        .split(',')
        .position(|name| name.trim() == column)
        .ok_or_else(|| Error::MissingTargetColumn(column.to_string()))?;
    let mut out = Vec::new();
    for (row, line) in lines.enumerate() {
        let field = line.split(',').nth(idx).ok_or_else(|| Error::CsvCell {
            row,
            column: column.to_string(),
            message: "missing field".into(),
        })?;
        let value: f64 = field.trim().parse().map_err(|e| Error::CsvCell {
            row,
            column: column.to_string(),
            message: format!("{e}"),
        })?;
        out.push(value);
    }
    if out.is_empty() {
        return Err(Error::NoRows);
    }
    Ok(out)
}
