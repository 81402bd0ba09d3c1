use std::process::ExitCode;

use hinf_pi::network::NetworkError;
use hinf_pi::synthesis::SynthesisError;
use hinf_pi::verification::VerificationError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Admissibility(String),
    #[error("{0}")]
    Internal(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Internal(_) | CliError::Io { .. } => 1,
            CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Admissibility(_) => 3,
        })
    }
}

impl From<SynthesisError> for CliError {
    fn from(e: SynthesisError) -> Self {
        match e {
            SynthesisError::Linalg(_) | SynthesisError::Lti(_) => CliError::Internal(e.to_string()),
            _ => CliError::Admissibility(e.to_string()),
        }
    }
}

impl From<NetworkError> for CliError {
    fn from(e: NetworkError) -> Self {
        CliError::Admissibility(e.to_string())
    }
}

impl From<VerificationError> for CliError {
    fn from(e: VerificationError) -> Self {
        match e {
            VerificationError::Synthesis(s) => s.into(),
            VerificationError::Network(n) => n.into(),
            VerificationError::InvalidFactor(_) => CliError::Usage(e.to_string()),
            VerificationError::Lti(_) => CliError::Internal(e.to_string()),
        }
    }
}

impl From<hinf_pi::lti::LtiError> for CliError {
    fn from(e: hinf_pi::lti::LtiError) -> Self {
        CliError::Internal(e.to_string())
    }
}
