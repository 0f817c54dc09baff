//! Sweep configuration files and cover corpora on disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use stegcost_core::eval::{desk_corpus, train_oracle_on_hill, CostMethod, Split, SweepConfig};
use stegcost_core::logistic::SgdOptions;
use stegcost_core::{FilterLogitOracle, GrayImage, Oracle, Rule};
use thiserror::Error;

use crate::oracle_file::read_oracle;
use crate::pgm::{load_pgm, PgmFileError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Image(#[from] PgmFileError),
    #[error("{0}")]
    Numeric(String),
}

impl ConfigError {
    fn invalid(msg: impl Into<String>) -> Self {
        ConfigError::Invalid(msg.into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoverSource {
    /// The built-in synthetic desk corpus.
    Synthetic { count: usize, size: usize, seed: u64 },
    /// Every `.pgm` file in a directory, in file-name order.
    Directory { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleSource {
    FilterLogit {
        #[serde(default = "default_gain")]
        gain: f64,
        #[serde(default = "default_bias")]
        bias: f64,
    },
    /// An oracle weights file written by `train-oracle`.
    Weights { path: PathBuf },
    /// Train a residual oracle on HILL stegos of a fresh synthetic corpus.
    TrainOnHill {
        count: usize,
        size: usize,
        corpus_seed: u64,
        payload: f64,
        #[serde(default)]
        train: DetectorSettings,
    },
}

fn default_gain() -> f64 {
    FilterLogitOracle::default().gain
}

fn default_bias() -> f64 {
    FilterLogitOracle::default().bias
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSettings {
    pub epochs: usize,
    pub rate: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for DetectorSettings {
    fn default() -> Self {
        let d = SgdOptions::default();
        Self { epochs: d.epochs, rate: d.rate, l2: d.l2, seed: d.seed }
    }
}

impl DetectorSettings {
    fn options(&self) -> SgdOptions {
        SgdOptions { epochs: self.epochs, rate: self.rate, l2: self.l2, seed: self.seed }
    }
}

fn default_methods() -> Vec<String> {
    vec!["proposed".into(), "hill".into()]
}

fn default_filter_sizes() -> Vec<usize> {
    vec![stegcost_core::DEFAULT_FILTER_SIZE]
}

fn default_rule() -> String {
    "gibbs".into()
}

/// The JSON sweep configuration. Relative paths resolve against the
/// directory holding the file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub covers: CoverSource,
    pub oracle: OracleSource,
    #[serde(default)]
    pub oracle_id: Option<String>,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_filter_sizes")]
    pub filter_sizes: Vec<usize>,
    pub payloads: Vec<f64>,
    /// Falls back to the command's `--seed` when absent.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    /// Defaults to half of the covers.
    #[serde(default)]
    pub train_count: Option<usize>,
    #[serde(default = "default_rule")]
    pub rule: String,
    #[serde(default)]
    pub detector: DetectorSettings,
    /// Record wall time per configuration. Reports are then no longer
    /// byte-reproducible.
    #[serde(default)]
    pub timing: bool,
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::invalid(format!("sweep config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Sorted `.pgm` file names in `dir`.
pub fn pgm_names(dir: &Path) -> Result<Vec<String>, ConfigError> {
    let entries = fs::read_dir(dir).map_err(|source| ConfigError::Io { path: dir.display().to_string(), source })?;
    let mut names = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| ConfigError::Io { path: dir.display().to_string(), source })?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.to_ascii_lowercase().ends_with(".pgm") && entry.path().is_file() {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

pub fn load_corpus(dir: &Path) -> Result<Vec<GrayImage>, ConfigError> {
    let names = pgm_names(dir)?;
    if names.is_empty() {
        return Err(ConfigError::invalid(format!("{}: no .pgm files", dir.display())));
    }
    names.iter().map(|n| load_pgm(&dir.join(n)).map_err(ConfigError::from)).collect()
}

pub fn load_oracle_file(path: &Path) -> Result<Oracle, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::invalid(format!("cannot read oracle weights {}: {e}", path.display())))?;
    read_oracle(&text).map_err(|e| ConfigError::invalid(format!("{}: {e}", path.display())))
}

impl SweepFile {
    /// Validates the file and materializes covers and oracle.
    pub fn build(&self, base: &Path, seed: u64) -> Result<SweepConfig, ConfigError> {
        if self.payloads.is_empty() {
            return Err(ConfigError::invalid("payloads must not be empty"));
        }
        if self.methods.is_empty() {
            return Err(ConfigError::invalid("methods must not be empty"));
        }
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse::<CostMethod>().map_err(|e| ConfigError::invalid(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if methods.contains(&CostMethod::Proposed) && self.filter_sizes.is_empty() {
            return Err(ConfigError::invalid("filter_sizes must not be empty"));
        }
        if let Some(k) = self.filter_sizes.iter().find(|&&k| k.is_multiple_of(2)) {
            return Err(ConfigError::invalid(format!("filter size {k} is not odd")));
        }
        if let Some(a) = self.payloads.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(ConfigError::invalid(format!("payload {a} is not a nonnegative number")));
        }
        let rule: Rule = self.rule.parse().map_err(|_| ConfigError::invalid(format!("unknown rule `{}`", self.rule)))?;
        let seeds = self.seeds.clone().unwrap_or_else(|| vec![seed]);
        if seeds.is_empty() {
            return Err(ConfigError::invalid("seeds must not be empty"));
        }

        let covers = match &self.covers {
            CoverSource::Synthetic { count, size, seed } => {
                desk_corpus(*count, *size, *seed).map_err(|e| ConfigError::invalid(format!("covers: {e}")))?
            }
            CoverSource::Directory { path } => load_corpus(&resolve(base, path))?,
        };
        let train_count = self.train_count.unwrap_or(covers.len() / 2);

        let (oracle, default_id): (Oracle, String) = match &self.oracle {
            OracleSource::FilterLogit { gain, bias } => {
                (FilterLogitOracle::new(*gain, *bias).into(), format!("filter-logit(gain={gain:?},bias={bias:?})"))
            }
            OracleSource::Weights { path } => {
                let full = resolve(base, path);
                (load_oracle_file(&full)?, path.display().to_string())
            }
            OracleSource::TrainOnHill { count, size, corpus_seed, payload, train } => {
                let corpus =
                    desk_corpus(*count, *size, *corpus_seed).map_err(|e| ConfigError::invalid(format!("oracle corpus: {e}")))?;
                let trained = train_oracle_on_hill(&corpus, *payload, rule, &train.options())
                    .map_err(|e| ConfigError::Numeric(format!("oracle training: {e}")))?;
                let id = format!("hill-trained(n={count},size={size},seed={corpus_seed},alpha={payload:?})");
                (trained.oracle.into(), id)
            }
        };

        Ok(SweepConfig {
            covers,
            oracle,
            oracle_id: self.oracle_id.clone().unwrap_or(default_id),
            methods,
            filter_sizes: self.filter_sizes.clone(),
            payloads: self.payloads.clone(),
            seeds,
            split: Split::Random { train_count },
            rule,
            detector: self.detector.options(),
            clock: if self.timing { Some(monotonic_seconds) } else { None },
        })
    }
}

fn monotonic_seconds() -> f64 {
    use std::sync::OnceLock;
    use std::time::Instant;
    static START: OnceLock<Instant> = OnceLock::new();
    START.get_or_init(Instant::now).elapsed().as_secs_f64()
}
