use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The input text is not valid case/overlay/scenario JSON.
    #[error("schema error at line {line}, column {column}: {message}")]
    Schema {
        line: usize,
        column: usize,
        message: String,
    },

    /// The input parsed but violates a structural rule. `location` points at
    /// the offending record, e.g. `buses[3]` or `branches[7]`.
    #[error("invalid case at {location}: {message}")]
    Semantic { location: String, message: String },

    #[error("unknown built-in {what} `{name}`")]
    UnknownBuiltin { what: &'static str, name: String },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("power flow did not converge after {iterations} iterations (max mismatch {mismatch:.3e} p.u.)")]
    NonConvergence { iterations: usize, mismatch: f64 },

    #[error("non-finite state at t = {t} s: {detail}")]
    NonFinite { t: f64, detail: String },

    #[error("window ending at t = {t_end} s is not settled: {quantity} varies {peak_to_peak:.3e} p.u. peak-to-peak")]
    NotSettled {
        t_end: f64,
        quantity: String,
        peak_to_peak: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn semantic(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Semantic {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        Error::Schema {
            line: err.line(),
            column: err.column(),
            message: err.to_string(),
        }
    }

    /// True for errors caused by bad user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. } | Error::Semantic { .. } | Error::UnknownBuiltin { .. } | Error::InvalidInput(_)
        )
    }
}
