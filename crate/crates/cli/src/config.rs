//! Command-line definitions and the `--config` file layer.
//!
//! Every flag of every subcommand may also appear as a top-level key of a
//! TOML file passed with `--config`. Keys use the long flag name, with `-`
//! or `_` as separator. Precedence is flag, then file, then the
//! `ORACLE_DIM_MAX` environment variable (cutoff cap only), then defaults.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coherent_core::oracle::OracleConfig;
use coherent_core::C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "coherent", version, about = "Matrix elements of coherent and generalized coherent operators")]
pub struct Cli {
    /// TOML file whose keys mirror the long flags; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one matrix element <n| X(z, t) |m>.
    Element(ElementArgs),
    /// Tabulate elements over a rectangular z grid and index ranges.
    Sweep(SweepArgs),
    /// Run seeded verification suites and report residuals.
    Verify(VerifyArgs),
    /// Check a single identity at one parameter point.
    Identities(IdentityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Closed,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IdentityName {
    Exchange,
    Disentangling,
    Bch,
    GroupLaw,
    Factorization,
    ZetaSeries,
}

/// Complex number written `re,im` (or just `re`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexArg(pub C64);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |p: &str| p.trim().parse::<f64>().map_err(|_| format!("cannot read {s:?} as re,im"));
        let (re, im) = match s.split_once(',') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => (parse(s)?, 0.0),
        };
        if re.is_finite() && im.is_finite() {
            Ok(ComplexArg(C64::new(re, im)))
        } else {
            Err(format!("complex value {s:?} must be finite"))
        }
    }
}

impl fmt::Display for ComplexArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.re, self.0.im)
    }
}

impl Serialize for ComplexArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ComplexArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Real(f64),
            Pair([f64; 2]),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Real(x) => Ok(ComplexArg(C64::new(x, 0.0))),
            Raw::Pair([re, im]) => Ok(ComplexArg(C64::new(re, im))),
        }
    }
}

/// Inclusive index range written `lo:hi`, or a single index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexRange {
    pub lo: usize,
    pub hi: usize,
}

impl FromStr for IndexRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("cannot read {s:?} as an index range lo:hi"));
        let (lo, hi) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty index range {s:?}"));
        }
        Ok(IndexRange { lo, hi })
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl Serialize for IndexRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IndexRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Index(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Index(v) => Ok(IndexRange { lo: v, hi: v }),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct OracleArgs {
    /// Oracle agreement tolerance between successive cutoffs.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest cutoff dimension the oracle may use.
    #[arg(long)]
    pub dim_max: Option<usize>,
}

impl OracleArgs {
    pub fn oracle_config(&self) -> Result<OracleConfig, CliError> {
        let mut cfg = OracleConfig::from_env();
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return Err(CliError::usage(format!("--tol must be positive, got {tol}")));
            }
            cfg.tol = tol;
        }
        if let Some(d) = self.dim_max {
            if d < 2 {
                return Err(CliError::usage(format!("--dim-max must be at least 2, got {d}")));
            }
            cfg.dim_max = d;
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct AlgebraArgs {
    /// Operator family: hw, su11 or su2.
    #[arg(long)]
    pub algebra: Option<String>,
    /// K for su11, J for su2 (half-integers allowed).
    #[arg(long)]
    pub spin: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ElementArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub algebra: AlgebraArgs,
    /// Bra index.
    #[arg(short = 'n')]
    pub n: Option<usize>,
    /// Ket index.
    #[arg(short = 'm')]
    pub m: Option<usize>,
    /// Displacement `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<ComplexArg>,
    /// Phase parameter of the extended operators; nonzero uses the oracle only.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Also evaluate the truncated-exponential oracle.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub oracle_args: OracleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub algebra: AlgebraArgs,
    /// Bra indices, `lo:hi` inclusive.
    #[arg(short = 'n')]
    pub n: Option<IndexRange>,
    /// Ket indices, `lo:hi` inclusive.
    #[arg(short = 'm')]
    pub m: Option<IndexRange>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub re_max: Option<f64>,
    /// Number of grid points along Re z.
    #[arg(long)]
    pub re_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub im_max: Option<f64>,
    /// Number of grid points along Im z.
    #[arg(long)]
    pub im_steps: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Evaluator for the table values.
    #[arg(long, value_enum)]
    pub source: Option<Source>,
    #[command(flatten)]
    #[serde(flatten)]
    pub oracle_args: OracleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// Suite to run; repeat for several. All suites when omitted.
    #[arg(long = "suite")]
    pub suite: Vec<String>,
    /// Seed for the randomized parameter points.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on every index range inside the suites.
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Record wall-clock seconds per suite (makes reports non-reproducible).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub oracle_args: OracleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct IdentityArgs {
    /// Which identity to check.
    #[arg(long, value_enum)]
    pub identity: Option<IdentityName>,
    #[command(flatten)]
    #[serde(flatten)]
    pub algebra: AlgebraArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<ComplexArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<ComplexArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<ComplexArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<ComplexArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub w: Option<ComplexArg>,
    #[arg(short = 'n')]
    pub n: Option<usize>,
    #[arg(short = 'm')]
    pub m: Option<usize>,
    /// Order N of the Laguerre factorization.
    #[arg(long)]
    pub big_n: Option<usize>,
    /// Series truncation; adaptive when omitted.
    #[arg(long)]
    pub kmax: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub oracle_args: OracleArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

fn field_names<T: Serialize + Default>() -> Vec<String> {
    match serde_json::to_value(T::default()) {
        Ok(Value::Object(map)) => map.into_iter().map(|(k, _)| k).collect(),
        _ => Vec::new(),
    }
}

fn known_keys() -> BTreeSet<String> {
    let mut keys = BTreeSet::new();
    keys.extend(field_names::<ElementArgs>());
    keys.extend(field_names::<SweepArgs>());
    keys.extend(field_names::<VerifyArgs>());
    keys.extend(field_names::<IdentityArgs>());
    keys
}

/// Read a config file into a flat key/value map with normalized keys.
pub fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))?;
    let known = known_keys();
    let mut out = Map::new();
    for (key, value) in table {
        let key = key.replace('_', "-");
        if !known.contains(&key) {
            return Err(CliError::usage(format!("unknown config key {key:?} in {}", path.display())));
        }
        let value = serde_json::to_value(value).map_err(|e| CliError::usage(e.to_string()))?;
        out.insert(key, value);
    }
    Ok(out)
}

/// Overlay the flags that were actually given on top of the config values.
///
/// A flag counts as given when it is not null, not `false`, and not an
/// empty list; switches therefore can only be turned on from the command
/// line.
pub fn layered<T: Serialize + DeserializeOwned>(flags: &T, file: Option<&Map<String, Value>>) -> Result<T, CliError> {
    let own = field_names_of(flags);
    let mut merged: Map<String, Value> = match file {
        Some(map) => map.iter().filter(|(k, _)| own.contains(*k)).map(|(k, v)| (k.clone(), v.clone())).collect(),
        None => Map::new(),
    };
    if let Ok(Value::Object(given)) = serde_json::to_value(flags) {
        for (key, value) in given {
            let absent = match &value {
                Value::Null | Value::Bool(false) => true,
                Value::Array(items) => items.is_empty(),
                _ => false,
            };
            if !absent {
                merged.insert(key, value);
            }
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::usage(format!("config: {e}")))
}

fn field_names_of<T: Serialize>(value: &T) -> BTreeSet<String> {
    match serde_json::to_value(value) {
        Ok(Value::Object(map)) => map.into_iter().map(|(k, _)| k).collect(),
        _ => BTreeSet::new(),
    }
}
