//! Experiment configs: an optional TOML file plus command-line overrides.
//!
//! ```toml
//! command = "trotter"
//! seed = 7
//! n_schedule = [64, 128, 256]
//! t_values = [1.0]
//! inputs = ["a.txt", "b.txt"]
//! out = "trotter.csv"
//! ```
//!
//! Relative paths in the file are taken relative to the file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;
use mvnlab::suites::SuiteParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    OpsCheck,
    TopologyCompare,
    Trotter,
    Nelson,
    LieClosure,
    TensorLaws,
    ExpInjectivity,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::OpsCheck,
        Command::TopologyCompare,
        Command::Trotter,
        Command::Nelson,
        Command::LieClosure,
        Command::TensorLaws,
        Command::ExpInjectivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::OpsCheck => "ops-check",
            Command::TopologyCompare => "topology-compare",
            Command::Trotter => "trotter",
            Command::Nelson => "nelson",
            Command::LieClosure => "lie-closure",
            Command::TensorLaws => "tensor-laws",
            Command::ExpInjectivity => "exp-injectivity",
        }
    }
}

/// Flags shared by every command; each one overrides the config file.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// TOML experiment config
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// CSV destination; stdout if absent
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Comma-separated step counts
    #[arg(long, value_delimiter = ',', value_name = "N,N,...")]
    pub n_schedule: Option<Vec<u64>>,
    /// Comma-separated times
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, value_name = "T,T,...")]
    pub t_values: Option<Vec<f64>>,
    /// Restrict to these library suites (repeatable)
    #[arg(long = "suite", value_name = "NAME")]
    pub suites: Vec<String>,
    /// Bundled operator family for topology-compare
    #[arg(long)]
    pub family: Option<String>,
    /// Operator or algebra files (repeatable)
    #[arg(long = "input", value_name = "PATH")]
    pub inputs: Vec<PathBuf>,
    /// Subgroup for lie-closure: full_unitary, commutant_fixed, block_determinant_one, diagonal_unitaries
    #[arg(long)]
    pub subgroup: Option<String>,
    /// Operators fixed by the commutant subgroup (repeatable)
    #[arg(long = "commutant", value_name = "PATH")]
    pub commutant: Vec<PathBuf>,
    /// Scalar used in the lie-closure linear combination
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub n_schedule: Option<Vec<u64>>,
    pub t_values: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub suites: Vec<String>,
    pub family: Option<String>,
    pub subgroup: Option<String>,
    #[serde(default)]
    pub commutant: Vec<PathBuf>,
    pub alpha: Option<f64>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.out.as_mut().map(rebase);
        cfg.inputs.iter_mut().for_each(rebase);
        cfg.commutant.iter_mut().for_each(rebase);
        Ok(cfg)
    }
}

/// Fully resolved settings for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub tol: Option<f64>,
    pub n_schedule: Option<Vec<u64>>,
    pub t_values: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
    pub inputs: Vec<PathBuf>,
    pub suites: Vec<String>,
    pub family: Option<String>,
    pub subgroup: Option<String>,
    pub commutant: Vec<PathBuf>,
    pub alpha: Option<f64>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        ExperimentConfig {
            command,
            seed: 0,
            tol: None,
            n_schedule: None,
            t_values: None,
            out: None,
            inputs: Vec::new(),
            suites: Vec::new(),
            family: None,
            subgroup: None,
            commutant: Vec::new(),
            alpha: None,
        }
    }

    /// Merges the config file named by `--config` (if any) with the flags.
    /// `command` is the subcommand given on the command line, if any.
    pub fn resolve(command: Option<Command>, flags: Overrides) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let command = match (command, file.command) {
            (Some(a), Some(b)) if a != b => {
                return Err(CliError::Config(format!("config is for `{}`, not `{}`", b.name(), a.name())));
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => return Err(CliError::Config("no command given and the config names none".into())),
        };
        let pick = |flag: Vec<PathBuf>, file: Vec<PathBuf>| if flag.is_empty() { file } else { flag };
        let cfg = ExperimentConfig {
            command,
            seed: flags.seed.or(file.seed).unwrap_or(0),
            tol: flags.tol.or(file.tol),
            n_schedule: flags.n_schedule.or(file.n_schedule),
            t_values: flags.t_values.or(file.t_values),
            out: flags.out.or(file.out),
            inputs: pick(flags.inputs, file.inputs),
            suites: if flags.suites.is_empty() { file.suites } else { flags.suites },
            family: flags.family.or(file.family),
            subgroup: flags.subgroup.or(file.subgroup),
            commutant: pick(flags.commutant, file.commutant),
            alpha: flags.alpha.or(file.alpha),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(t) = self.tol {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::Config(format!("tolerance must be positive, got {t}")));
            }
        }
        if let Some(s) = &self.n_schedule {
            if s.is_empty() || s.contains(&0) {
                return Err(CliError::Config("n schedule must be nonempty with positive entries".into()));
            }
        }
        if let Some(t) = &self.t_values {
            if t.is_empty() || t.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Config("t values must be nonempty and finite".into()));
            }
        }
        Ok(())
    }

    pub fn suite_params(&self) -> SuiteParams {
        SuiteParams { seed: self.seed, tol: self.tol, n_schedule: self.n_schedule.clone(), t_values: self.t_values.clone() }
    }
}
