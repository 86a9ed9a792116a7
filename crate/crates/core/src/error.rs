use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed line in a text input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally invalid document (model file, CSV, COO tensor).
    #[error("format error: {0}")]
    Format(String),

    /// Invalid user configuration (ranks, eps, dims, thresholds).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violates a precondition (negative entries, shape mismatch).
    #[error("input error: {0}")]
    Input(String),

    /// Dykstra's cyclic projection hit its cycle cap.
    #[error("projection did not converge after {cycles} cycles (last change {residual:.3e})")]
    Projection { best: Vec<f64>, residual: f64, cycles: usize },

    /// An iterative numerical routine hit its iteration cap.
    #[error("{routine} did not converge after {iterations} iterations")]
    Convergence { routine: &'static str, iterations: usize },

    /// A fixed factor does not match the target tensor.
    #[error("transfer error: {mode} factor has {found} rows but target mode has {expected}")]
    Transfer { mode: &'static str, expected: usize, found: usize },

    /// Explicit Kronecker system would exceed the memory budget.
    #[error(
        "Kronecker system needs {needed} bytes, budget is {budget}; use smaller dims or raise ROLEKIT_KRON_BUDGET"
    )]
    Size { needed: usize, budget: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
