use thiserror::Error;

pub type Result<T, E = AlsError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AlsError {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error(
        "rank-deficient least-squares operand ({rows}x{cols}, numerical rank {rank}); \
         use stabilized mode with the pseudoinverse fallback for rank-deficient inputs"
    )]
    RankDeficient { rows: usize, cols: usize, rank: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("memory budget exceeded: {required} bytes required, budget is {budget} bytes")]
    BudgetExceeded { required: u64, budget: u64 },

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl AlsError {
    pub fn config(msg: impl Into<String>) -> Self {
        AlsError::Config(msg.into())
    }
}
