use thiserror::Error;

/// Failure of a CLI run, classified by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad names, invalid combinations, unwritable output. Exit status 2.
    #[error("configuration error: {0}")]
    Config(String),
    /// Newton failure, singular systems, violated certificates. Exit status 3.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<cqlab_core::Error> for CliError {
    fn from(e: cqlab_core::Error) -> Self {
        use cqlab_core::Error as E;
        match e {
            E::UnknownMethod(_)
            | E::UnknownImpedance(_)
            | E::UnknownProblem(_)
            | E::DimensionMismatch { .. }
            | E::ZetaOutOfDomain(_)
            | E::InvalidParameter(_)
            | E::Mismatch(_)
            | E::NonPositiveWeights
            | E::OrderBarrier { .. }
            | E::Unsupported(_) => CliError::Config(e.to_string()),
            E::ZetaNearOne(_)
            | E::ContourEvaluation { .. }
            | E::Domain(_)
            | E::Linalg(_)
            | E::NewtonFailed { .. }
            | E::SingularJacobian { .. }
            | E::Precondition(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("output: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
