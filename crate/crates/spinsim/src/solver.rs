//! Production spectrum drivers.
//!
//! The rotating-frame Hamiltonian conserves total magnetization, so the
//! solvers diagonalize one m-sector at a time and assemble detection
//! amplitudes from the raising blocks between adjacent sectors. In the
//! computational basis every block is real, and the receiver-phased
//! amplitudes come out real and non-negative.
//!
//! Spectra are normalized so that the integrated intensity equals the number
//! of detected spins, and phased so the broadened spectrum is in absorption
//! mode. The raw trace-form amplitudes are recovered by undoing the −i
//! receiver phase and the 4/dim scale.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::eigen::{eigendecompose, eigendecompose_real, RealEigen};
use crate::error::{Error, Result};
use crate::evolve::{stick_spectrum, SampleMode, StickLine, StickSpectrum};
use crate::operators::{
    build_hamiltonian, collective_operator, collective_raising, Axis, SiteSystem, MAX_DENSE_DIM,
};
use crate::system::{Frame, SpinSystem};

/// Receiver phase: rotates the raw correlation amplitudes into absorption
/// mode (a π/2 receiver phase on complex detection).
pub fn receiver_phase() -> Complex64 {
    Complex64::new(0.0, -1.0)
}

/// Normalization making the integrated spectrum count detected spins.
pub fn per_spin_norm(dim: usize) -> f64 {
    4.0 / dim as f64
}

/// Stick spectrum of a site system with complex detection on the selected
/// sites and the collective transverse excitation, receiver-phased and
/// scaled by `norm`. Works sector by sector; every eigenproblem is real.
pub fn site_spectrum(
    sys: &SiteSystem,
    detect_sites: &[usize],
    norm: f64,
) -> Result<StickSpectrum> {
    let sectors: Vec<Vec<usize>> = sys.m_sectors();
    for basis in &sectors {
        if basis.len() > MAX_DENSE_DIM {
            return Err(Error::CapacityExceeded {
                dim: basis.len(),
                max: MAX_DENSE_DIM,
            });
        }
    }
    let eigens: Vec<RealEigen> = sectors
        .par_iter()
        .map(|basis| eigendecompose_real(&sys.sector_matrix(basis)))
        .collect();

    let all_sites: Vec<usize> = (0..sys.n_sites()).collect();
    let pair_lines: Vec<Vec<StickLine>> = (0..sectors.len().saturating_sub(1))
        .into_par_iter()
        .map(|s| {
            let (high, low) = (&sectors[s], &sectors[s + 1]);
            let p_det = sys.raising_block(detect_sites, high, low);
            let p_all = sys.raising_block(&all_sites, high, low);
            let (vh, vl) = (&eigens[s].vectors, &eigens[s + 1].vectors);
            let d_eig = vh.transpose() * p_det * vl;
            let a_eig = vh.transpose() * p_all * vl;
            let mut lines = Vec::new();
            for i in 0..high.len() {
                for j in 0..low.len() {
                    let amp = 0.5 * norm * d_eig[(i, j)] * a_eig[(i, j)];
                    if amp != 0.0 {
                        lines.push(StickLine {
                            hz: (eigens[s].energies[i] - eigens[s + 1].energies[j]) / TAU,
                            amp: Complex64::new(amp, 0.0),
                        });
                    }
                }
            }
            lines
        })
        .collect();

    let mut spectrum = StickSpectrum::empty();
    for lines in pair_lines {
        spectrum.lines.extend(lines);
    }
    spectrum.normalize_lines();
    Ok(spectrum)
}

fn detected_sites(sys: &SiteSystem, detect_isotope: &str) -> Result<Vec<usize>> {
    let sites = sys.sites_of_isotope(detect_isotope);
    if sites.is_empty() {
        return Err(Error::NoDetectableLines(detect_isotope.to_string()));
    }
    Ok(sites)
}

/// Exact spectrum through the sector-blocked path.
pub fn exact_spectrum(
    system: &SpinSystem,
    frame: &Frame,
    detect_isotope: &str,
) -> Result<StickSpectrum> {
    let sites = SiteSystem::from_spin_system(system, frame)?;
    let dim = sites.dim();
    if dim > MAX_DENSE_DIM {
        return Err(Error::CapacityExceeded {
            dim,
            max: MAX_DENSE_DIM,
        });
    }
    let detect = detected_sites(&sites, detect_isotope)?;
    Ok(site_spectrum(&sites, &detect, per_spin_norm(dim))?.with_isotope(detect_isotope))
}

/// Exact spectrum through the dense complex route: full Hamiltonian,
/// full eigendecomposition, trace-form amplitudes. Slower than
/// [`exact_spectrum`]; kept as the independent cross-check path.
pub fn exact_spectrum_dense(
    system: &SpinSystem,
    frame: &Frame,
    detect_isotope: &str,
) -> Result<StickSpectrum> {
    let h = build_hamiltonian(system, frame)?;
    let es = eigendecompose(&h)?;
    let detected: Vec<usize> = (0..system.n_spins())
        .filter(|&k| system.isotope(k).symbol == detect_isotope)
        .collect();
    if detected.is_empty() {
        return Err(Error::NoDetectableLines(detect_isotope.to_string()));
    }
    let detect = collective_raising(system, &detected)?;
    let excite = collective_operator(system, Axis::Y, None)?;
    let mut sticks = stick_spectrum(&es, &detect, &excite)?;
    sticks.scale(receiver_phase() * per_spin_norm(h.dimension()));
    sticks.normalize_lines();
    Ok(sticks.with_isotope(detect_isotope))
}

/// Spectrum through the eigenstate-sampling protocol: both transverse
/// quadratures of the detected isotope are estimated separately (they are
/// Hermitian observables) and combined into complex detection.
pub fn sampled_spectrum(
    system: &SpinSystem,
    frame: &Frame,
    detect_isotope: &str,
    mode: SampleMode,
    seed: u64,
) -> Result<StickSpectrum> {
    let h = build_hamiltonian(system, frame)?;
    let es = eigendecompose(&h)?;
    let detected: Vec<usize> = (0..system.n_spins())
        .filter(|&k| system.isotope(k).symbol == detect_isotope)
        .collect();
    if detected.is_empty() {
        return Err(Error::NoDetectableLines(detect_isotope.to_string()));
    }
    let dx = collective_operator(system, Axis::X, Some(&detected))?;
    let dy = collective_operator(system, Axis::Y, Some(&detected))?;
    let sx = crate::evolve::sampled_expectation(&es, &dx, mode, seed)?;
    let mut sy = crate::evolve::sampled_expectation(&es, &dy, mode, seed)?;
    sy.scale(Complex64::new(0.0, 1.0));

    let mut combined = StickSpectrum::empty();
    combined.lines.extend(sx.lines);
    combined.lines.extend(sy.lines);
    combined.scale(receiver_phase() * per_spin_norm(h.dimension()));
    combined.normalize_lines();
    Ok(combined.with_isotope(detect_isotope))
}
