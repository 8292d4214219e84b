use derham_core::{Error, Violation};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("ParseError: {0}")]
    Parse(String),
    #[error("IOError: {0}")]
    Io(String),
    #[error("{name}: {message}")]
    Precondition { name: &'static str, message: String },
    #[error("ValidationError: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

impl CliError {
    /// 1 for analysis preconditions and validation, 2 for parse errors, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Precondition { .. } | CliError::Invalid(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(m) => CliError::Parse(m),
            Error::Validation(v) => CliError::Invalid(v),
            other => CliError::Precondition {
                name: other.name(),
                message: other.to_string(),
            },
        }
    }
}
