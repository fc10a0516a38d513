//! Singlet–triplet gaps of diradicals from a two-electron, two-orbital
//! active space coupled to a bosonized environment.
//!
//! The pipeline parses electron-integral files, separates the active pair
//! from the environment, replaces occupied→empty environment excitations by
//! harmonic oscillators, and computes the singlet–triplet gap either in the
//! static limit (oscillators eliminated analytically) or by brute-force
//! diagonalization with truncated boson numbers.

pub mod error;
pub mod fermion;
pub mod gap;
pub mod integrals;
pub mod model;
pub mod synthetic;

pub use error::{Result, RpaError};
