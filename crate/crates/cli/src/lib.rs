//! Config-driven experiments on reduced Bergman kernels.
//!
//! One TOML file describes an experiment; the `rbk` binary runs it as one of
//! `kernel`, `verify`, `adjoint` or `recover` and writes CSV tables plus a
//! `summary.toml` record into `<out>/<name>-<hash8>/`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod commands;
pub mod config;
pub mod oracles;
pub mod output;
pub mod presets;

pub use commands::{run, Outcome};
pub use config::{Command, ExperimentConfig};
pub use output::Status;

/// Exit code for a run whose gated residual missed the threshold.
pub const EXIT_GATE_FAILED: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl RunError {
    /// Bad parameters become config errors; everything else is numerical.
    pub fn from_core(context: &str, e: reduced_bergman::Error) -> Self {
        use reduced_bergman::Error as E;
        match e {
            E::InvalidArgument(_) | E::NonFinite(_) | E::EmptyDomain => RunError::Config(format!("{context}: {e}")),
            _ => RunError::Numerical(format!("{context}: {e}")),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numerical(_) | RunError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

impl Outcome {
    pub fn exit_code(&self) -> u8 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => EXIT_GATE_FAILED,
            Status::Error => EXIT_NUMERICAL,
        }
    }
}
