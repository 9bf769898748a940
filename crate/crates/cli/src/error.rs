//! Error classification and exit codes: 0 ok, 1 domain error, 2 I/O,
//! 3 solver failure.

use chsh_core::eval::EvalError;
use chsh_core::io::IoError;
use chsh_core::ml::MlError;
use chsh_core::npa::NpaError;
use chsh_core::sampling::SamplingError;
use chsh_core::seesaw::SeesawError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn domain(msg: impl Into<String>) -> Self {
        CliError::Domain(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Io(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<NpaError> for CliError {
    fn from(e: NpaError) -> Self {
        match e {
            NpaError::Sdp(_) | NpaError::Sdp2(_) => CliError::Solver(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<SeesawError> for CliError {
    fn from(e: SeesawError) -> Self {
        match e {
            SeesawError::Sdp(_) | SeesawError::SdpProblem(_) => CliError::Solver(e.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<SamplingError> for CliError {
    fn from(e: SamplingError) -> Self {
        match e {
            SamplingError::Npa(inner) => inner.into(),
            SamplingError::Oracle(inner) => CliError::Solver(inner.to_string()),
            other => CliError::Domain(other.to_string()),
        }
    }
}

impl From<chsh_core::sampling::OracleError> for CliError {
    fn from(e: chsh_core::sampling::OracleError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<MlError> for CliError {
    fn from(e: MlError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Sampling(inner) => inner.into(),
            EvalError::Oracle(inner) => CliError::Solver(inner.to_string()),
            EvalError::Ml(inner) => inner.into(),
            other => CliError::Domain(other.to_string()),
        }
    }
}
