//! Flat `key = value` configuration files.
//!
//! One setting per line; `#` starts a comment line. Unknown and repeated
//! keys are rejected. Relative paths resolve against the config's directory.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use gcae::{Hyperparameters, SynthParams};

use crate::{CliError, CliResult};

/// Settings for `fit` and `benchmark`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub hyper: Hyperparameters,
    pub manifest: PathBuf,
    pub output: PathBuf,
    /// Benchmark only the baseline; no graphs are built.
    pub baseline_only: bool,
    /// The file as read, echoed into reports.
    pub echo: String,
}

/// Settings for `synth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub params: SynthParams,
    pub output: PathBuf,
    pub echo: String,
}

pub fn read_config(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Splits the file into `(key, value)` pairs in file order.
pub fn parse_pairs(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Validation(format!("config line {}: expected key = value", no + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(CliError::Validation(format!("config line {}: empty key", no + 1)));
        }
        if pairs.iter().any(|(k, _)| k == key) {
            return Err(CliError::Validation(format!("config key {key} given twice")));
        }
        pairs.push((key.to_string(), value.to_string()));
    }
    Ok(pairs)
}

fn number<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Validation(format!("config key {key}: cannot parse {value:?}")))
}

fn boolean(key: &str, value: &str) -> CliResult<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Validation(format!("config key {key}: expected true or false, got {value:?}"))),
    }
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = Path::new(value);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn unknown(key: &str) -> CliError {
    CliError::Validation(format!("unknown config key {key}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_config(path)?, &base_dir(path))
    }

    /// Parses and validates; paths are resolved against `base` and the
    /// manifest must exist.
    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let mut hyper = Hyperparameters::default();
        let mut manifest = None;
        let mut output = None;
        let mut baseline_only = false;
        for (key, value) in parse_pairs(text)? {
            let (k, v) = (key.as_str(), value.as_str());
            match k {
                "manifest" => manifest = Some(resolve(base, v)),
                "output" => output = Some(resolve(base, v)),
                "baseline_only" => baseline_only = boolean(k, v)?,
                "lambda" => hyper.lambda = number(k, v)?,
                "k" => hyper.k = number(k, v)?,
                "anchors" => hyper.anchors = number(k, v)?,
                "eta" => hyper.eta = if v == "auto" { None } else { Some(number(k, v)?) },
                "theta" => hyper.theta = number(k, v)?,
                "bits" => hyper.bits = number(k, v)?,
                "rank" => hyper.rank = number(k, v)?,
                "clusters" => hyper.clusters = number(k, v)?,
                "inner_iter" => hyper.inner_iter = number(k, v)?,
                "outer_iter" => hyper.outer_iter = number(k, v)?,
                "width_pairs" => hyper.width_pairs = number(k, v)?,
                "seed" => hyper.seed = number(k, v)?,
                "rho_start" => hyper.cluster.rho_start = number(k, v)?,
                "rho_max" => hyper.cluster.rho_max = number(k, v)?,
                "mu" => hyper.cluster.mu = number(k, v)?,
                "max_inner" => hyper.cluster.max_inner = number(k, v)?,
                "restarts" => hyper.cluster.restarts = number(k, v)?,
                _ => return Err(unknown(k)),
            }
        }
        hyper.validate()?;
        let manifest = manifest.ok_or_else(|| CliError::Validation("config key manifest is required".into()))?;
        let output = output.ok_or_else(|| CliError::Validation("config key output is required".into()))?;
        if !manifest.is_file() {
            return Err(CliError::Io(format!("manifest {} not found", manifest.display())));
        }
        Ok(Self {
            hyper,
            manifest,
            output,
            baseline_only,
            echo: text.to_string(),
        })
    }
}

impl SynthConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        Self::parse(&read_config(path)?, &base_dir(path))
    }

    pub fn parse(text: &str, base: &Path) -> CliResult<Self> {
        let mut params = SynthParams {
            n_samples: 100,
            n_clusters: 3,
            dims: vec![10, 10],
            separation: 8.0,
            noise: 1.0,
            seed: 0,
        };
        let mut output = None;
        for (key, value) in parse_pairs(text)? {
            let (k, v) = (key.as_str(), value.as_str());
            match k {
                "output" => output = Some(resolve(base, v)),
                "n_samples" => params.n_samples = number(k, v)?,
                "n_clusters" => params.n_clusters = number(k, v)?,
                "dims" => {
                    params.dims = v.split(',').map(|d| number(k, d.trim())).collect::<CliResult<_>>()?;
                }
                "separation" => params.separation = number(k, v)?,
                "noise" => params.noise = number(k, v)?,
                "seed" => params.seed = number(k, v)?,
                _ => return Err(unknown(k)),
            }
        }
        let output = output.ok_or_else(|| CliError::Validation("config key output is required".into()))?;
        Ok(Self {
            params,
            output,
            echo: text.to_string(),
        })
    }
}
