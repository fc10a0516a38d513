//! Liquid-state NMR spin-dynamics simulation.
//!
//! The crate builds rotating-frame spin Hamiltonians from chemical shifts and
//! J-couplings and produces spectra through four routes: exact
//! diagonalization, an overlapping-cluster approximation, composite-spin
//! (local SU(2)) symmetry reduction, and a classical emulation of the
//! eigenstate-sampling protocol. Stick spectra are turned into broadened
//! spectra, FIDs and peak tables by the `spectrum` module.

pub mod cluster;
pub mod eigen;
pub mod error;
pub mod evolve;
pub mod operators;
pub mod solver;
pub mod spectrum;
pub mod symmetry;
pub mod system;

pub use error::{Error, Result};
