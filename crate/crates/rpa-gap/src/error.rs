//! Error type for the radical gap pipeline.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RpaError {
    #[error("integral file: {0}")]
    Parse(String),

    #[error("orbital count must be positive, got {0}")]
    NonPositiveOrbitalCount(i64),

    #[error("the active space needs two orbitals, file has {0}")]
    TooFewOrbitals(usize),

    #[error("missing occupation list for the {0} environment orbitals")]
    MissingOccupations(usize),

    #[error(
        "integral ({p} {q} {r} {s}) violates permutation symmetry: deviation {deviation:.3e}"
    )]
    SymmetryViolation {
        p: usize,
        q: usize,
        r: usize,
        s: usize,
        deviation: f64,
    },

    #[error("orbital index {0} out of range for {1} orbitals")]
    OrbitalOutOfRange(usize, usize),

    #[error("RPA construction rejected: {0}")]
    Instability(String),

    #[error("environment has no (empty, occupied) orbital pair")]
    NoModes,

    #[error("brute-force dimension {dim} exceeds the capacity {max}")]
    DimensionOverflow { dim: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, RpaError>;
