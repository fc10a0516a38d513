//! Broadened spectra and spectrum processing: Lorentzian lineshapes, FFT of
//! FIDs, peak tables, and the CSV/JSON output formats.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::evolve::{Fid, StickSpectrum};

/// A uniform frequency grid with inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqGrid {
    pub start_hz: f64,
    pub step_hz: f64,
    pub points: usize,
}

impl FreqGrid {
    pub fn new(start_hz: f64, stop_hz: f64, points: usize) -> Result<FreqGrid> {
        if points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points, got {points}"
            )));
        }
        if !(stop_hz > start_hz) {
            return Err(Error::InvalidGrid(format!(
                "stop ({stop_hz}) must exceed start ({start_hz})"
            )));
        }
        Ok(FreqGrid {
            start_hz,
            step_hz: (stop_hz - start_hz) / (points - 1) as f64,
            points,
        })
    }

    pub fn stop_hz(&self) -> f64 {
        self.start_hz + self.step_hz * (self.points - 1) as f64
    }

    pub fn value(&self, k: usize) -> f64 {
        self.start_hz + self.step_hz * k as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }

    pub fn matches(&self, other: &FreqGrid) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
        self.points == other.points
            && close(self.start_hz, other.start_hz)
            && close(self.step_hz, other.step_hz)
    }
}

/// Provenance recorded alongside a spectrum.
#[derive(Debug, Clone, Default)]
pub struct SpectrumMeta {
    /// Rotating-frame carrier of the detected isotope, in Hz (signed).
    pub reference_hz: f64,
    pub broadening_fwhm_hz: f64,
    pub solver: String,
}

/// A broadened spectrum on a uniform grid.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub grid: FreqGrid,
    pub intensity: Vec<f64>,
    pub meta: SpectrumMeta,
    pub warnings: Vec<String>,
}

impl Spectrum {
    /// Trapezoid integral over the grid.
    pub fn integral(&self) -> f64 {
        if self.intensity.len() < 2 {
            return 0.0;
        }
        let inner: f64 = self.intensity[1..self.intensity.len() - 1].iter().sum();
        (inner + 0.5 * (self.intensity[0] + *self.intensity.last().unwrap())) * self.grid.step_hz
    }

    pub fn max_intensity(&self) -> f64 {
        self.intensity.iter().copied().fold(f64::MIN, f64::max)
    }
}

/// Unit-area Lorentzian with full width at half maximum `fwhm`.
fn lorentzian(delta: f64, fwhm: f64) -> f64 {
    let hwhm = fwhm / 2.0;
    (fwhm / (2.0 * PI)) / (delta * delta + hwhm * hwhm)
}

/// Convolve a stick spectrum with a unit-area Lorentzian of the given FWHM.
/// Lines outside the grid carrying more than 0.1% of the total amplitude
/// produce a warning, escalated to an error when `strict` is set.
pub fn broaden(
    sticks: &StickSpectrum,
    grid: FreqGrid,
    fwhm_hz: f64,
    strict: bool,
) -> Result<Spectrum> {
    if fwhm_hz <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "broadening fwhm must be positive, got {fwhm_hz}"
        )));
    }
    let mut warnings = Vec::new();
    let total: f64 = sticks.lines.iter().map(|l| l.amp.re.abs()).sum();
    if total > 0.0 {
        let outside: f64 = sticks
            .lines
            .iter()
            .filter(|l| l.hz < grid.start_hz || l.hz > grid.stop_hz())
            .map(|l| l.amp.re.abs())
            .sum();
        let fraction = outside / total;
        if fraction > 1e-3 {
            if strict {
                return Err(Error::GridExcludesLines(fraction * 100.0));
            }
            warnings.push(format!(
                "grid excludes stick lines carrying {:.4}% of the total amplitude",
                fraction * 100.0
            ));
        }
    }
    let intensity: Vec<f64> = (0..grid.points)
        .into_par_iter()
        .map(|k| {
            let nu = grid.value(k);
            sticks
                .lines
                .iter()
                .map(|l| l.amp.re * lorentzian(nu - l.hz, fwhm_hz))
                .sum()
        })
        .collect();
    Ok(Spectrum {
        grid,
        intensity,
        meta: SpectrumMeta {
            broadening_fwhm_hz: fwhm_hz,
            ..SpectrumMeta::default()
        },
        warnings,
    })
}

/// Plain DFT of a complex FID with the frequency axis centered on zero.
/// Returns `dwell`-scaled bins approximating the continuous transform.
pub fn fft_complex(fid: &Fid) -> Result<(FreqGrid, Vec<Complex64>)> {
    fft_impl(fid, false)
}

fn fft_impl(fid: &Fid, halve_first: bool) -> Result<(FreqGrid, Vec<Complex64>)> {
    if fid.signal.is_empty() {
        return Err(Error::InvalidInput("empty FID".into()));
    }
    let n = fid.signal.len().next_power_of_two();
    let mut buf: Vec<Complex64> = fid.signal.clone();
    buf.resize(n, Complex64::new(0.0, 0.0));
    if halve_first {
        buf[0] *= 0.5;
    }
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    // Shift so the axis ascends from −bandwidth/2.
    let mut shifted = vec![Complex64::new(0.0, 0.0); n];
    for (p, slot) in shifted.iter_mut().enumerate() {
        *slot = buf[(p + n / 2) % n] * fid.dwell;
    }
    let step = 1.0 / (n as f64 * fid.dwell);
    let grid = FreqGrid {
        start_hz: -0.5 / fid.dwell,
        step_hz: step,
        points: n,
    };
    Ok((grid, shifted))
}

/// Spectrum from a FID: first point halved (one-sided transform convention),
/// zero-filled to a power of two, intensity = 2·Re of the scaled DFT. With
/// matching linewidth this reproduces [`broaden`] up to aliasing tails.
pub fn fft_spectrum(fid: &Fid) -> Result<Spectrum> {
    let (grid, bins) = fft_impl(fid, true)?;
    Ok(Spectrum {
        grid,
        intensity: bins.iter().map(|z| 2.0 * z.re).collect(),
        meta: SpectrumMeta::default(),
        warnings: Vec::new(),
    })
}

/// A detected peak: position, height and a local area estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Peak {
    pub hz: f64,
    pub height: f64,
    pub area: f64,
}

/// Local maxima above `min_height_fraction` of the global maximum, with areas
/// integrated between the flanking local minima.
pub fn peak_table(spectrum: &Spectrum, min_height_fraction: f64) -> Result<Vec<Peak>> {
    if !(min_height_fraction > 0.0 && min_height_fraction <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "min_height_fraction must be in (0, 1], got {min_height_fraction}"
        )));
    }
    let y = &spectrum.intensity;
    let n = y.len();
    let max = spectrum.max_intensity();
    if n < 3 || max <= 0.0 {
        return Ok(Vec::new());
    }
    let threshold = min_height_fraction * max;
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if y[i] > threshold && y[i] > y[i - 1] && y[i] >= y[i + 1] {
            // Walk to the flanking minima.
            let mut lo = i;
            while lo > 0 && y[lo - 1] <= y[lo] {
                lo -= 1;
            }
            let mut hi = i;
            while hi + 1 < n && y[hi + 1] <= y[hi] {
                hi += 1;
            }
            let mut area = 0.0;
            for k in lo..hi {
                area += 0.5 * (y[k] + y[k + 1]) * spectrum.grid.step_hz;
            }
            peaks.push(Peak {
                hz: spectrum.grid.value(i),
                height: y[i],
                area,
            });
        }
    }
    Ok(peaks)
}

#[derive(Serialize)]
struct PresentedPeak {
    ppm: f64,
    hz: f64,
    height: f64,
    area: f64,
}

#[derive(Serialize)]
struct PeakFile {
    format_version: u32,
    reference_mhz: f64,
    peaks: Vec<PresentedPeak>,
}

/// Peak table as versioned JSON on the presentation axis, ppm descending.
pub fn peaks_to_json(peaks: &[Peak], reference_hz: f64) -> String {
    let sign = if reference_hz < 0.0 { -1.0 } else { 1.0 };
    let ref_mhz_abs = (reference_hz / 1e6).abs();
    let mut presented: Vec<PresentedPeak> = peaks
        .iter()
        .map(|p| {
            let hz = -sign * p.hz;
            PresentedPeak {
                ppm: if ref_mhz_abs > 0.0 { hz / ref_mhz_abs } else { 0.0 },
                hz,
                height: p.height,
                area: p.area,
            }
        })
        .collect();
    presented.sort_by(|a, b| b.ppm.total_cmp(&a.ppm));
    serde_json::to_string_pretty(&PeakFile {
        format_version: 1,
        reference_mhz: reference_hz / 1e6,
        peaks: presented,
    })
    .expect("peak serialization cannot fail")
}

/// Spectrum CSV on the presentation axis. The internal axis is mirrored so
/// that a positive chemical shift appears at positive ppm, and rows are
/// written in descending ppm order. `config_echo` records the effective
/// run options as an extra comment line.
pub fn spectrum_to_csv(spectrum: &Spectrum, config_echo: Option<&str>) -> String {
    let reference_hz = spectrum.meta.reference_hz;
    let mut out = String::new();
    out.push_str(&format!(
        "# reference_mhz={}, broadening_hz={}, solver={}, format_version=1\n",
        reference_hz / 1e6,
        spectrum.meta.broadening_fwhm_hz,
        spectrum.meta.solver
    ));
    if let Some(echo) = config_echo {
        out.push_str(&format!("# config: {echo}\n"));
    }
    out.push_str("ppm,hz,intensity\n");
    let sign = if reference_hz < 0.0 { -1.0 } else { 1.0 };
    let ref_mhz_abs = (reference_hz / 1e6).abs();
    // Presentation frequency is −sign(ν_ref)·ν; iterate so ppm descends.
    let indices: Box<dyn Iterator<Item = usize>> = if sign > 0.0 {
        Box::new(0..spectrum.grid.points)
    } else {
        Box::new((0..spectrum.grid.points).rev())
    };
    for k in indices {
        let hz_pres = -sign * spectrum.grid.value(k);
        let ppm = if ref_mhz_abs > 0.0 {
            hz_pres / ref_mhz_abs
        } else {
            0.0
        };
        out.push_str(&format!("{},{},{}\n", ppm, hz_pres, spectrum.intensity[k]));
    }
    out
}
