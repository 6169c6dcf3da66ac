use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("interval [{lo}, {hi}] is not contained in the grid span [{span_lo}, {span_hi}]")]
    IntervalOutsideGrid {
        lo: f64,
        hi: f64,
        span_lo: f64,
        span_hi: f64,
    },

    #[error("block spectra overlap: block {index} starts at {next_min} but the previous block ends at {prev_max}")]
    Overlap {
        index: usize,
        prev_max: f64,
        next_min: f64,
    },

    #[error("linear constraints are inconsistent (residual {residual:.3e})")]
    Infeasible { residual: f64 },

    #[error("solver did not converge within {iterations} iterations (last change {last_change:.3e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("block conditions failed: {0}")]
    ConditionFailure(String),

    #[error("construction step {step} failed: {reason}")]
    StepFailure { step: usize, reason: String },

    #[error("missing artifact files: {}", .0.join(", "))]
    MissingFiles(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
