use std::fmt;

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    VerificationFailed = 1,
    Config = 2,
    Domain = 3,
    Singularity = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::Config,
            message: message.into(),
        }
    }

    pub fn missing(parameter: &str) -> Self {
        Self::config(format!("missing required parameter '{parameter}'"))
    }

    pub fn verification(message: impl Into<String>) -> Self {
        CliError {
            status: ExitStatus::VerificationFailed,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<fracdim::Error> for CliError {
    fn from(e: fracdim::Error) -> Self {
        use fracdim::Error;
        let status = match e {
            Error::Parse { .. } | Error::Input(_) | Error::Io(_) => ExitStatus::Config,
            Error::Domain(_) | Error::Range { .. } | Error::Dimension { .. } => ExitStatus::Domain,
            Error::Singularity { .. } => ExitStatus::Singularity,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
