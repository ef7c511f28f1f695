use thiserror::Error;

use crate::genus::GenusEnumeration;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gram matrix is not square")]
    NotSquare,
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("dimension {0} outside the supported range {1}..={2}")]
    DimensionOutOfRange(usize, usize, usize),
    #[error("entry {0} exceeds the supported magnitude")]
    EntryTooLarge(i128),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("bad prime {0}: {1}")]
    BadPrime(u64, &'static str),
    #[error("genus enumeration stopped after {} classes (class budget exhausted)", .0.classes.len())]
    BudgetExhausted(Box<GenusEnumeration>),
    #[error("unsupported arithmetic case: {0}")]
    Unsupported(String),
    #[error("inconsistent spinor data: {0}")]
    InconsistentSpinorData(String),
    #[error("degenerate basis: all maximal minors vanish")]
    DegenerateBasis,
    #[error("lattice point count exceeds the cap of {0}")]
    RadiusTooLarge(u64),
    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),
    #[error("oracle window exceeded: {0}")]
    OracleOutOfRange(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
