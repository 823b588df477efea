use std::io;
use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] atomgrid::Error),

    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },

    #[error("cannot write to stdout: {0}")]
    Stdout(io::Error),

    #[error("{0}")]
    Input(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Core(_) => 3,
            CliError::Usage(_) | CliError::Read { .. } | CliError::Write { .. } | CliError::Input(_) => 2,
            CliError::Stdout(_) | CliError::Internal(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        use atomgrid::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Read { .. } => "read",
            CliError::Write { .. } | CliError::Stdout(_) => "write",
            CliError::Input(_) => "input",
            CliError::Internal(_) => "internal",
            CliError::Core(e) => match e {
                E::Schema { .. } => "schema",
                E::Semantic { .. } => "semantic",
                E::UnknownBuiltin { .. } => "unknown_builtin",
                E::InvalidInput(_) => "input",
                E::Singular(_) => "singular",
                E::NonConvergence { .. } => "non_convergence",
                E::NonFinite { .. } => "non_finite",
                E::NotSettled { .. } => "not_settled",
            },
        }
    }

    fn details(&self) -> Value {
        use atomgrid::Error as E;
        match self {
            CliError::Core(E::Schema { line, column, .. }) => json!({ "line": line, "column": column }),
            CliError::Core(E::Semantic { location, .. }) => json!({ "location": location }),
            CliError::Core(E::UnknownBuiltin { what, name }) => json!({ "what": what, "name": name }),
            CliError::Core(E::NonConvergence { iterations, mismatch }) => {
                json!({ "iterations": iterations, "mismatch": mismatch })
            }
            CliError::Core(E::NonFinite { t, .. }) => json!({ "t": t }),
            CliError::Core(E::NotSettled {
                t_end,
                quantity,
                peak_to_peak,
            }) => json!({ "t_end": t_end, "quantity": quantity, "peak_to_peak": peak_to_peak }),
            CliError::Read { path, .. } | CliError::Write { path, .. } => json!({ "path": path }),
            _ => json!({}),
        }
    }

    /// `{"error": {"kind", "exit_code", "message", ...details}}` on one line.
    pub fn to_json(&self) -> String {
        let mut body = json!({
            "kind": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string().trim_end(),
        });
        if let (Value::Object(b), Value::Object(d)) = (&mut body, self.details()) {
            b.extend(d);
        }
        json!({ "error": body }).to_string()
    }
}
