use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("sample space must contain at least one element")]
    EmptySpace,
    #[error("sample space of size {0} exceeds the supported maximum of {max}", max = crate::Subset::MAX_ELEMENTS)]
    SpaceTooLarge(usize),
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("invalid rational {0:?}: expected \"p/q\" in lowest terms or \"p\"")]
    ParseRational(String),
    #[error("sample space mismatch: expected n = {expected}, found n = {found}")]
    SpaceMismatch { expected: usize, found: usize },
    #[error("invalid mechanism: {0}")]
    InvalidMechanism(String),
    #[error("invalid mixture: {0}")]
    InvalidMixture(String),
    #[error("not a partition: {0}")]
    NotPartition(String),
    #[error("invalid multicover: {0}")]
    InvalidMulticover(String),
    #[error("invalid incidence system: {0}")]
    InvalidSystem(String),
    #[error("n = {n} exceeds the enumeration bound {bound}; pass the override flag to raise it")]
    BoundExceeded { n: usize, bound: usize },
    #[error("malformed input: {0}")]
    Format(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("undersized sample: element {x} has {count} records, at least {required} required")]
    UndersizedSample { x: usize, count: u64, required: u64 },
    #[error("internal consistency fault: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
