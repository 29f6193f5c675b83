use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("linear solve failed after regularization (condition estimate {condition:.3e})")]
    Singular { condition: f64 },

    #[error("dense construction needs {n_qubits} qubits, cap is {cap}")]
    CapExceeded { n_qubits: usize, cap: usize },

    #[error("operator annihilates the state (norm {norm:.3e})")]
    DegenerateOperator { norm: f64 },

    #[error("time grid is not uniform: {0}")]
    NonUniformGrid(String),

    #[error("integration drift {drift:.3e} exceeds tolerance; refine the time step")]
    RefinementRequired { drift: f64 },

    #[error("coincident positions for monomers {0} and {1}")]
    ZeroSeparation(usize, usize),
}
