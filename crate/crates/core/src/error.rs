use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("index {index} out of range for {len} spins")]
    Index { index: usize, len: usize },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("problem has {n} spins, exhaustive search is capped at {cap}")]
    ExhaustiveCap { n: usize, cap: usize },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("degenerate schedule at s = {s}: A(s) = B(s) = 0")]
    DegenerateSchedule { s: f64 },

    #[error("uncertainty is not strictly decreasing in s for this schedule; inversion unsupported")]
    InversionUnsupported,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("no candidate has energy below the elite threshold {threshold}")]
    EmptyEliteSet { threshold: f64 },

    #[error("identical candidates carry different energies ({a} vs {b})")]
    InconsistentEnergy { a: f64, b: f64 },

    #[error("total weight is zero for cluster {cluster}")]
    DegenerateWeight { cluster: usize },

    #[error("arity error: {0}")]
    Arity(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("ground state is degenerate ({count} configurations)")]
    DegenerateGroundState { count: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("protocol validation failed at {node}: {msg}")]
    Validation { node: String, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
