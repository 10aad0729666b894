use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("simulation error: {0}")]
    Simulation(sip_hydro::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Simulation(_) => 1,
        }
    }
}

impl From<sip_hydro::Error> for CliError {
    fn from(e: sip_hydro::Error) -> Self {
        use sip_hydro::Error as E;
        match e {
            E::NonPositiveParameter { .. }
            | E::UnsupportedBeta(_)
            | E::LatticeTooSmall(_)
            | E::InconsistentRates { .. }
            | E::InvalidArgument(_)
            | E::WrongRegime(_)
            | E::GridTooCoarse(_)
            | E::NegativeProfile { .. } => CliError::Config(e.to_string()),
            other => CliError::Simulation(other),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
