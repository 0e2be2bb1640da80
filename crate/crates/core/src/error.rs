use thiserror::Error;

use crate::measurement::Context;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("all mode amplitudes are zero; a mode cannot be normalized")]
    ZeroMode,

    #[error("degenerate intensity record at alpha={alpha}, beta={beta}: total intensity is zero")]
    DegenerateRecord { alpha: f64, beta: f64 },

    #[error("malformed data: {0}")]
    MalformedData(String),

    #[error("experiment table is missing context {0}")]
    IncompleteTable(Context),

    #[error("experiment table already holds context {0}")]
    DuplicateContext(Context),

    #[error("record angles ({alpha}, {beta}) are not a context of the angle set")]
    UnknownContext { alpha: f64, beta: f64 },

    #[error("linear feasibility solver failed: {reason} (max residual {max_residual:e})")]
    SolverFailure { reason: String, max_residual: f64 },
}
