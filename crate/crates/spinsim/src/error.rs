//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown isotope `{0}`")]
    UnknownIsotope(String),

    #[error("isotope `{0}` has no reference frequency in the frame")]
    MissingFrameReference(String),

    #[error("spin system is empty")]
    EmptySystem,

    #[error("magnetic field must be positive, got {0} T")]
    NonPositiveField(f64),

    #[error("spin index {index} out of range for {n} spins")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("J coupling for pair ({i}, {j}) is inconsistent: {a} Hz vs {b} Hz")]
    AsymmetricCoupling { i: usize, j: usize, a: f64, b: f64 },

    #[error("self-coupling on spin {0} is not allowed")]
    SelfCoupling(usize),

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("operator dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("capacity exceeded: required dimension {dim} > limit {max}")]
    CapacityExceeded { dim: usize, max: usize },

    #[error("cluster {cluster:?} has {size} spins, exceeding the exact-solver capacity of {max}")]
    ClusterTooLarge { cluster: Vec<usize>, size: usize, max: usize },

    #[error("equivalence group invalid: {0}")]
    InvalidEquivalenceGroup(String),

    #[error("frequency grids do not match")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid excludes stick lines carrying {0:.4}% of the total amplitude")]
    GridExcludesLines(f64),

    #[error("sample count must be positive")]
    ZeroSamples,

    #[error("exhaustive sampling limited to {max} spins, system has {n}")]
    ExhaustiveTooLarge { n: usize, max: usize },

    #[error("no detectable lines for isotope `{0}`")]
    NoDetectableLines(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
