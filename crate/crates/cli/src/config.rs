//! Run configuration: flags over an optional `key = value` file over defaults.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use cuntz_core::operators::DEFAULT_MAX_DIM;
use cuntz_core::{Alphabet, Variant};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(CliError::Config(format!("unknown format `{s}` (expected json or csv)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Structural,
    Paper,
    Fit,
}

impl FromStr for Suite {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "structural" => Ok(Suite::Structural),
            "paper" => Ok(Suite::Paper),
            "fit" => Ok(Suite::Fit),
            _ => Err(CliError::Config(format!("unknown suite `{s}` (expected structural, paper or fit)"))),
        }
    }
}

/// Flags shared by every subcommand. Everything is optional so that a config
/// file can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Alphabet size N.
    #[arg(long = "n", global = true)]
    pub n: Option<u32>,
    /// Largest total grade n + 2k.
    #[arg(long, global = true)]
    pub max_grade: Option<usize>,
    /// Heat parameters, comma separated.
    #[arg(long = "t", global = true, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// d_kappa, d_tilde, d_paper or d_oracle.
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// json or csv.
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Directory for persisted exact blocks.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Largest block dimension handled by exact inertia.
    #[arg(long, global = true)]
    pub exact_cap: Option<usize>,
    /// Largest block dimension built at all; larger blocks exit with status 3.
    #[arg(long, global = true)]
    pub max_dim: Option<usize>,
    /// Suites for `adjudicate`, comma separated.
    #[arg(long = "suite", global = true, value_delimiter = ',')]
    pub suite: Option<Vec<String>>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alphabet: Alphabet,
    pub max_grade: usize,
    pub t_grid: Vec<f64>,
    pub variant: Variant,
    /// `None` lets the command pick its natural format.
    pub format: Option<Format>,
    pub cache_dir: Option<PathBuf>,
    pub exact_cap: usize,
    pub max_dim: usize,
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
}

fn parse_file(path: &Path) -> Result<Flags, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut f = Flags::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = |what: &str| CliError::Config(format!("{}:{}: bad {what} `{value}`", path.display(), i + 1));
        let list = || value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
        match key {
            "n" | "N" => f.n = Some(value.parse().map_err(|_| bad("N"))?),
            "max_grade" => f.max_grade = Some(value.parse().map_err(|_| bad("max_grade"))?),
            "t" | "t_grid" => f.t = Some(list().map(|s| s.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad("t"))?),
            "variant" => f.variant = Some(value.to_string()),
            "format" => f.format = Some(value.to_string()),
            "cache_dir" => f.cache_dir = Some(PathBuf::from(value)),
            "exact_cap" => f.exact_cap = Some(value.parse().map_err(|_| bad("exact_cap"))?),
            "max_dim" => f.max_dim = Some(value.parse().map_err(|_| bad("max_dim"))?),
            "suite" | "suites" => f.suite = Some(list().collect()),
            "out" => f.out = Some(PathBuf::from(value)),
            _ => return Err(CliError::Config(format!("{}:{}: unknown key `{key}`", path.display(), i + 1))),
        }
    }
    Ok(f)
}

impl RunConfig {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => parse_file(p)?,
            None => Flags::default(),
        };
        macro_rules! pick {
            ($field:ident) => {
                flags.$field.clone().or(file.$field.clone())
            };
        }
        let n = pick!(n).unwrap_or(2);
        let alphabet = Alphabet::new(n).map_err(|e| CliError::Config(e.to_string()))?;
        let t_grid = pick!(t).unwrap_or_else(|| vec![1.0, 0.5, 0.25]);
        if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(CliError::Config(format!("heat parameter t must be positive and finite, got {t}")));
        }
        let variant = match pick!(variant) {
            Some(v) => v.parse().map_err(|_| CliError::Config(format!("unknown variant `{v}`")))?,
            None => Variant::DTilde,
        };
        let format = pick!(format).map(|s| s.parse()).transpose()?;
        let exact_cap = pick!(exact_cap).unwrap_or(729);
        if exact_cap < 1 {
            return Err(CliError::Config("exact_cap must be at least 1".into()));
        }
        let max_dim = pick!(max_dim).unwrap_or(DEFAULT_MAX_DIM);
        let mut suites = match pick!(suite) {
            Some(list) => list.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>, _>>()?,
            None => vec![Suite::Structural, Suite::Paper],
        };
        suites.sort();
        suites.dedup();
        if suites.is_empty() {
            return Err(CliError::Config("no suite selected".into()));
        }
        Ok(RunConfig {
            alphabet,
            max_grade: pick!(max_grade).unwrap_or(4),
            t_grid,
            variant,
            format,
            cache_dir: pick!(cache_dir),
            exact_cap,
            max_dim,
            suites,
            out: pick!(out),
        })
    }
}
