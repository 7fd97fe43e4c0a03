use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1} qubits")]
    Dimension(usize, usize),
    #[error("component kind `{0}` is not a unitary")]
    UnsupportedComponent(String),
    #[error("invalid initial state `{0}`")]
    BadState(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("fault-tolerance violation: {0}")]
    FaultTolerance(String),
    #[error("event `{0}` is not deterministic in the error-free circuit")]
    NonDeterministicEvent(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("hyperedge {0} already included")]
    DoubleInclusion(usize),
    #[error("hyperedge {0} touches frozen event {1}")]
    FrozenPrefix(usize, usize),
    #[error("observed syndrome has zero probability")]
    ImpossibleSyndrome,
    #[error("fit did not converge: {0}")]
    Fit(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
