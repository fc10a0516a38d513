//! Shared helpers and independent oracles for the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use spinsim::evolve::StickSpectrum;
use spinsim::spectrum::{broaden, FreqGrid, Spectrum};
use spinsim::system::{Isotope, SpinSystem};

pub fn proton_system(shifts: &[f64], couplings: &[(usize, usize, f64)]) -> SpinSystem {
    let h = Isotope::lookup("1H").unwrap();
    SpinSystem::new(
        9.4,
        shifts.iter().map(|&s| (h.clone(), s)).collect(),
        couplings,
    )
    .unwrap()
}

/// Proton system with spin offsets placed at the requested Hz values
/// (through equivalent ppm shifts at 9.4 T).
pub fn proton_system_at_offsets(offsets_hz: &[f64], couplings: &[(usize, usize, f64)]) -> SpinSystem {
    let nu = Isotope::lookup("1H").unwrap().gamma * 9.4 / std::f64::consts::TAU;
    let shifts: Vec<f64> = offsets_hz.iter().map(|&w| -w / nu * 1e6).collect();
    proton_system(&shifts, couplings)
}

/// Deterministic random connected proton system for property suites.
pub fn random_connected_system(seed: u64, n: usize) -> SpinSystem {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let shifts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..3.0)).collect();
    let mut couplings = Vec::new();
    // Spanning tree keeps the coupling graph connected.
    for k in 1..n {
        let other = rng.random_range(0..k);
        couplings.push((other, k, rng.random_range(2.0..15.0)));
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if couplings.iter().any(|&(x, y, _)| (x, y) == (a, b)) {
                continue;
            }
            if rng.random::<f64>() < 0.25 {
                let j: f64 = rng.random_range(-8.0..8.0);
                if j.abs() > 0.1 {
                    couplings.push((a, b, j));
                }
            }
        }
    }
    proton_system(&shifts, &couplings)
}

/// Closed-form AB spectrum: four (frequency, amplitude) lines for two
/// coupled spins at offsets `wa`, `wb` with coupling `j`, in units where the
/// two-spin spectrum integrates to 2.
pub fn ab_lines(wa: f64, wb: f64, j: f64) -> Vec<(f64, f64)> {
    let center = 0.5 * (wa + wb);
    let dv = wa - wb;
    let q = (dv * dv + j * j).sqrt() / 2.0;
    let s = j / (2.0 * q);
    vec![
        (center + j / 2.0 - q, (1.0 + s) / 2.0),
        (center + j / 2.0 + q, (1.0 - s) / 2.0),
        (center - j / 2.0 + q, (1.0 + s) / 2.0),
        (center - j / 2.0 - q, (1.0 - s) / 2.0),
    ]
}

/// Merge coincident oracle lines and drop the empty ones.
pub fn merge_oracle_lines(mut lines: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    lines.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (hz, amp) in lines {
        match out.last_mut() {
            Some(last) if (hz - last.0).abs() <= 1e-9 => last.1 += amp,
            _ => out.push((hz, amp)),
        }
    }
    out.retain(|&(_, a)| a.abs() > 1e-12);
    out
}

/// Assert two stick spectra agree line by line within `tol` on amplitudes.
pub fn assert_sticks_close(a: &StickSpectrum, b: &StickSpectrum, tol: f64) {
    assert_eq!(a.lines.len(), b.lines.len(), "line counts differ");
    for (x, y) in a.lines.iter().zip(&b.lines) {
        assert!(
            (x.hz - y.hz).abs() < 1e-8 * (1.0 + x.hz.abs()),
            "frequency {} vs {}",
            x.hz,
            y.hz
        );
        assert!(
            (x.amp - y.amp).norm() < tol,
            "amplitude {} vs {} at {} Hz",
            x.amp,
            y.amp,
            x.hz
        );
    }
}

/// Broaden two stick spectra on a shared auto grid and return their maximum
/// pointwise intensity difference.
pub fn broadened_linf(a: &StickSpectrum, b: &StickSpectrum, fwhm: f64) -> f64 {
    let (sa, sb) = broadened_pair(a, b, fwhm);
    sa.intensity
        .iter()
        .zip(&sb.intensity)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Broaden two stick spectra on one grid spanning both line sets.
pub fn broadened_pair(a: &StickSpectrum, b: &StickSpectrum, fwhm: f64) -> (Spectrum, Spectrum) {
    let lo = a
        .lines
        .iter()
        .chain(&b.lines)
        .map(|l| l.hz)
        .fold(f64::INFINITY, f64::min);
    let hi = a
        .lines
        .iter()
        .chain(&b.lines)
        .map(|l| l.hz)
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = 30.0 * fwhm + 1.0;
    let grid = FreqGrid::new(lo - margin, hi + margin, 8001).unwrap();
    (
        broaden(a, grid, fwhm, false).unwrap(),
        broaden(b, grid, fwhm, false).unwrap(),
    )
}
