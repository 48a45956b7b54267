//! Batch runner behind the `mvnlab` binary: experiment configs, the command
//! dispatch table and atomic CSV output.

pub mod config;
pub mod experiments;
pub mod output;

use std::io;

use thiserror::Error;

use mvnlab::blockvn::io::FileError;
use mvnlab::blockvn::BlockError;
use mvnlab::liealg::LieError;
use mvnlab::suites::SuiteError;
use mvnlab::tensorcat::TensorError;

pub use config::{Command, ExperimentConfig, FileConfig, Overrides};
pub use experiments::{Experiment, ExperimentRegistry, RunOutcome, Table};

/// Exit status for a run whose properties all held.
pub const EXIT_PASS: u8 = 0;
/// Some checked property failed.
pub const EXIT_FAILURE: u8 = 1;
/// Bad config, unreadable or malformed input, or an I/O error.
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Input { path: String, source: FileError },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

impl CliError {
    fn lie(&self) -> Option<&LieError> {
        match self {
            CliError::Lie(e) | CliError::Suite(SuiteError::Lie(e)) => Some(e),
            _ => None,
        }
    }

    /// A generator outside the requested Lie algebra is a failed property;
    /// everything else is an input problem.
    pub fn exit_code(&self) -> u8 {
        match self.lie() {
            Some(LieError::PreconditionFailed(_)) => EXIT_FAILURE,
            _ => EXIT_INPUT,
        }
    }

    /// Module name for the `LEVEL: module: message` line.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Input { .. } => "blockvn",
            CliError::Io(_) | CliError::Csv(_) => "output",
            CliError::Block(_) | CliError::Suite(SuiteError::Block(_)) => "blockvn",
            CliError::Suite(SuiteError::Topology(_)) => "topologies",
            CliError::Tensor(_) | CliError::Suite(SuiteError::Tensor(_)) => "tensorcat",
            CliError::Suite(SuiteError::BadParameter(_)) => "suites",
            CliError::Lie(_) | CliError::Suite(SuiteError::Lie(_)) => "liealg",
        }
    }
}
