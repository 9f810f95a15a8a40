use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A scenario or model fails validation. `key` names the offending field
    /// (for example `metric.c`) and `line` is the 1-based line in the source
    /// file when one is known.
    #[error("{}", config_message(.key, .line, .message))]
    Config {
        key: String,
        line: Option<usize>,
        message: String,
    },

    #[error("enumeration budget exceeded: {required} {what} requested, budget is {budget}; lower the depth or raise the budget")]
    Budget {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    #[error("power iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("exp overflow: potential value {value} at prefix {prefix:?} has no finite exponential")]
    ExpOverflow { value: f64, prefix: Vec<usize> },

    #[error("expression error at column {column}: {message}")]
    Expression { column: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn config_message(key: &str, line: &Option<usize>, message: &str) -> String {
    match line {
        Some(l) => format!("config error at line {l} ({key}): {message}"),
        None => format!("config error ({key}): {message}"),
    }
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            line: None,
            message: message.into(),
        }
    }

    /// True for errors caused by a malformed or inconsistent scenario.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::Expression { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
