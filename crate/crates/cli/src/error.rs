use std::fmt;

/// Failure of a subcommand, carrying the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, config file, infeasible plan or unwritable output.
    Config(String),
    /// Unreadable or malformed input data.
    Data(String),
    /// A numerical quantity could not be certified.
    Precision(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Precision(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Precision(m) => write!(f, "precision error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<locmem::Error> for CliError {
    fn from(e: locmem::Error) -> Self {
        match e {
            locmem::Error::Data(m) => CliError::Data(m),
            locmem::Error::Precision { msg, suggestion } => CliError::Precision(match suggestion {
                Some(n) => format!("{msg} (suggested value {n})"),
                None => msg,
            }),
            locmem::Error::Config(m) => CliError::Config(m),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
