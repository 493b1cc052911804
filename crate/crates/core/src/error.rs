use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("csv parse error at line {line}: {reason}")]
    CsvParse { line: usize, reason: String },

    #[error("label {label} out of range for {classes} classes at line {line}")]
    LabelOutOfRange {
        line: usize,
        label: i64,
        classes: usize,
    },

    #[error("solver did not converge within {iterations} iterations (gradient norm {grad_norm:.3e})")]
    NoConvergence { iterations: usize, grad_norm: f64 },

    #[error("degenerate variance inputs")]
    DegenerateVariance,

    #[error("bound precondition violated: {0}")]
    BoundPrecondition(String),

    #[error("non-finite parameters encountered at round {round}")]
    Diverged { round: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
