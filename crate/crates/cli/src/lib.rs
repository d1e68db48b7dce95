//! Scenario files, experiment orchestration and CSV output for the
//! `hetnet-icic` binary.

pub mod config;
pub mod output;
pub mod run;

use thiserror::Error;

pub use config::{parse_config, Assignments, DbRange, Experiment, ScenarioConfig, StpSetting};
pub use output::{fmt_sig, write_atomic};
pub use run::{run_experiment, RunReport};

/// Environment variable that replaces the configured seed.
pub const SEED_ENV: &str = "HETNET_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),

    #[error("no S_tp bracket: {0}")]
    NoBracket(String),

    #[error(transparent)]
    Compute(#[from] hetnet_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit code: 2 for anything the user can fix in the scenario,
    /// 1 for I/O and numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Invalid(_) | CliError::NoBracket(_) => 2,
            CliError::Compute(hetnet_core::Error::InvalidParams(_) | hetnet_core::Error::Config(_)) => 2,
            CliError::Compute(_) | CliError::Io { .. } => 1,
        }
    }
}

/// Parses config text, then applies the seed from the environment, then the
/// command-line overrides, in that order.
pub fn load_scenario(
    text: &str,
    env_seed: Option<&str>,
    overrides: &[String],
) -> Result<ScenarioConfig, CliError> {
    let mut a = Assignments::parse(text)?;
    if let Some(seed) = env_seed {
        a.set("seed", seed, 0)?;
    }
    for o in overrides {
        a.apply_override(o)?;
    }
    a.build()
}
