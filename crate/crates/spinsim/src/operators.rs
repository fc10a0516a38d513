//! Hamiltonian and spin-operator assembly.
//!
//! Solvers work on a [`SiteSystem`]: a list of sites carrying arbitrary spin
//! quantum numbers. Ordinary spin systems lower to sites with j = 1/2; the
//! symmetry solver lowers equivalence groups to composite spin-j sites. The
//! basis is the computational z-basis, site 0 being the leftmost (most
//! significant) tensor factor and m descending within each site.
//!
//! The rotating-frame Hamiltonian conserves total magnetization, so besides
//! the dense form this module exposes the total-m sector decomposition used
//! by the production solvers. In the computational basis all Hamiltonian
//! matrix elements are real.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::system::{offset_hz, Frame, SpinSystem};

/// Largest dimension the dense solvers will diagonalize (14 spins).
pub const MAX_DENSE_DIM: usize = 1 << 14;

/// Coupling coefficient √(j(j+1) − m(m+1)) for the step d → d−1, where
/// d = j − m counts lowering steps from the top of the multiplet.
pub fn raise_coeff(two_j: u32, d: u32) -> f64 {
    debug_assert!(d >= 1 && d <= two_j);
    (d as f64 * (two_j - d + 1) as f64).sqrt()
}

/// One site of a generalized spin system.
#[derive(Debug, Clone)]
pub struct Site {
    /// Twice the spin quantum number; dimension is `two_j + 1`.
    pub two_j: u32,
    /// Rotating-frame offset in Hz.
    pub offset_hz: f64,
    pub isotope: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// Isotropic Î·Î coupling.
    Full,
    /// Secular z·z truncation for heteronuclear pairs.
    Secular,
}

#[derive(Debug, Clone)]
pub struct SiteCoupling {
    pub a: usize,
    pub b: usize,
    pub hz: f64,
    pub kind: CouplingKind,
}

/// A spin system lowered to solver form.
#[derive(Debug, Clone)]
pub struct SiteSystem {
    pub sites: Vec<Site>,
    pub couplings: Vec<SiteCoupling>,
}

impl SiteSystem {
    /// Lower a spin-1/2 system into solver form. Couplings between unlike
    /// isotopes are truncated to their secular z·z part.
    pub fn from_spin_system(system: &SpinSystem, frame: &Frame) -> Result<SiteSystem> {
        let n = system.n_spins();
        let mut sites = Vec::with_capacity(n);
        for k in 0..n {
            sites.push(Site {
                two_j: 1,
                offset_hz: offset_hz(system, k, frame)?,
                isotope: system.isotope(k).symbol.clone(),
            });
        }
        let mut couplings = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                let hz = system.j(a, b);
                if hz != 0.0 {
                    let kind = if system.isotope(a).symbol == system.isotope(b).symbol {
                        CouplingKind::Full
                    } else {
                        CouplingKind::Secular
                    };
                    couplings.push(SiteCoupling { a, b, hz, kind });
                }
            }
        }
        Ok(SiteSystem { sites, couplings })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn dim(&self) -> usize {
        self.sites
            .iter()
            .map(|s| s.two_j as usize + 1)
            .product::<usize>()
    }

    /// Mixed-radix strides; site 0 is the most significant digit.
    pub fn strides(&self) -> Vec<usize> {
        let n = self.n_sites();
        let mut strides = vec![1usize; n];
        for k in (0..n.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (self.sites[k + 1].two_j as usize + 1);
        }
        strides
    }

    /// Digit (lowering count from m = +j) of `index` at site `k`.
    fn digit(&self, index: usize, k: usize, strides: &[usize]) -> u32 {
        ((index / strides[k]) % (self.sites[k].two_j as usize + 1)) as u32
    }

    /// Total lowering count Σ_k d_k; total magnetization is Jmax − this.
    fn descent(&self, index: usize, strides: &[usize]) -> usize {
        (0..self.n_sites())
            .map(|k| self.digit(index, k, strides) as usize)
            .sum()
    }

    /// Basis indices grouped into total-magnetization sectors, ordered from
    /// highest m (descent 0) downwards. Indices within a sector ascend.
    pub fn m_sectors(&self) -> Vec<Vec<usize>> {
        let strides = self.strides();
        let max_descent: usize = self.sites.iter().map(|s| s.two_j as usize).sum();
        let mut sectors = vec![Vec::new(); max_descent + 1];
        for index in 0..self.dim() {
            sectors[self.descent(index, &strides)].push(index);
        }
        sectors
    }

    /// Dense Hamiltonian in angular-frequency units. Real symmetric in the
    /// computational basis.
    pub fn assemble_real(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::CapacityExceeded {
                dim,
                max: MAX_DENSE_DIM,
            });
        }
        let strides = self.strides();
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        let m_of = |index: usize, k: usize| -> f64 {
            let site = &self.sites[k];
            site.two_j as f64 / 2.0 - self.digit(index, k, &strides) as f64
        };
        for index in 0..dim {
            let mut diag = 0.0;
            for (k, site) in self.sites.iter().enumerate() {
                diag += TAU * site.offset_hz * m_of(index, k);
            }
            for c in &self.couplings {
                diag += TAU * c.hz * m_of(index, c.a) * m_of(index, c.b);
            }
            h[(index, index)] += diag;

            // Flip-flop part J/2 (J⁺_a J⁻_b + J⁻_a J⁺_b): raise a, lower b.
            for c in &self.couplings {
                if c.kind != CouplingKind::Full {
                    continue;
                }
                let da = self.digit(index, c.a, &strides);
                let db = self.digit(index, c.b, &strides);
                if da >= 1 && db < self.sites[c.b].two_j {
                    let target = index - strides[c.a] + strides[c.b];
                    let coeff = 0.5
                        * TAU
                        * c.hz
                        * raise_coeff(self.sites[c.a].two_j, da)
                        * raise_coeff(self.sites[c.b].two_j, db + 1);
                    h[(target, index)] += coeff;
                    h[(index, target)] += coeff;
                }
            }
        }
        Ok(h)
    }

    /// Hamiltonian restricted to one m-sector basis.
    pub fn sector_matrix(&self, basis: &[usize]) -> DMatrix<f64> {
        let strides = self.strides();
        let nb = basis.len();
        let mut h = DMatrix::<f64>::zeros(nb, nb);
        let m_of = |index: usize, k: usize| -> f64 {
            self.sites[k].two_j as f64 / 2.0 - self.digit(index, k, &strides) as f64
        };
        for (col, &index) in basis.iter().enumerate() {
            let mut diag = 0.0;
            for (k, site) in self.sites.iter().enumerate() {
                diag += TAU * site.offset_hz * m_of(index, k);
            }
            for c in &self.couplings {
                diag += TAU * c.hz * m_of(index, c.a) * m_of(index, c.b);
            }
            h[(col, col)] += diag;

            for c in &self.couplings {
                if c.kind != CouplingKind::Full {
                    continue;
                }
                let da = self.digit(index, c.a, &strides);
                let db = self.digit(index, c.b, &strides);
                if da >= 1 && db < self.sites[c.b].two_j {
                    let target = index - strides[c.a] + strides[c.b];
                    // Flip-flop conserves m, so the target is in this sector.
                    let row = basis
                        .binary_search(&target)
                        .expect("flip-flop target must stay within the m sector");
                    let coeff = 0.5
                        * TAU
                        * c.hz
                        * raise_coeff(self.sites[c.a].two_j, da)
                        * raise_coeff(self.sites[c.b].two_j, db + 1);
                    h[(row, col)] += coeff;
                    h[(col, row)] += coeff;
                }
            }
        }
        h
    }

    /// Matrix block ⟨high| Σ_{k∈sites} J⁺_k |low⟩ between adjacent m sectors.
    pub fn raising_block(
        &self,
        selected: &[usize],
        high: &[usize],
        low: &[usize],
    ) -> DMatrix<f64> {
        let strides = self.strides();
        let mut block = DMatrix::<f64>::zeros(high.len(), low.len());
        for (col, &index) in low.iter().enumerate() {
            for &k in selected {
                let d = self.digit(index, k, &strides);
                if d >= 1 {
                    let target = index - strides[k];
                    if let Ok(row) = high.binary_search(&target) {
                        block[(row, col)] += raise_coeff(self.sites[k].two_j, d);
                    }
                }
            }
        }
        block
    }

    /// Site indices whose isotope matches `symbol`.
    pub fn sites_of_isotope(&self, symbol: &str) -> Vec<usize> {
        (0..self.n_sites())
            .filter(|&k| self.sites[k].isotope == symbol)
            .collect()
    }
}

/// Observable axis for collective operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A dense operator on the 2^N computational basis of a spin system.
#[derive(Debug, Clone)]
pub struct SpinOperator {
    pub matrix: DMatrix<Complex64>,
}

impl SpinOperator {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    /// Max-norm deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let m = &self.matrix;
        let mut dev: f64 = 0.0;
        for i in 0..m.nrows() {
            for j in 0..=i {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

/// Rotating-frame Hamiltonian of Zeeman offsets plus J couplings, in angular
/// frequency units. Same-isotope couplings keep the full Î·Î form;
/// heteronuclear couplings are truncated to 2πJ I^z I^z.
pub fn build_hamiltonian(system: &SpinSystem, frame: &Frame) -> Result<SpinOperator> {
    let sites = SiteSystem::from_spin_system(system, frame)?;
    let real = sites.assemble_real()?;
    Ok(SpinOperator {
        matrix: real.map(|x| Complex64::new(x, 0.0)),
    })
}

/// Collective operator Σ_{k∈subset} I^axis_k over a spin-1/2 system.
pub fn collective_operator(
    system: &SpinSystem,
    axis: Axis,
    subset: Option<&[usize]>,
) -> Result<SpinOperator> {
    let n = system.n_spins();
    let all: Vec<usize> = (0..n).collect();
    let selected = subset.unwrap_or(&all);
    for &k in selected {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
    }
    let dim = 1usize
        .checked_shl(n as u32)
        .filter(|&d| d <= MAX_DENSE_DIM)
        .ok_or(Error::CapacityExceeded {
            dim: usize::MAX,
            max: MAX_DENSE_DIM,
        })?;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for index in 0..dim {
        for &k in selected {
            // Bit 0 of the digit: 0 = spin up (m = +1/2), 1 = down.
            let stride = 1usize << (n - 1 - k);
            let down = (index / stride) % 2 == 1;
            match axis {
                Axis::Z => {
                    out[(index, index)] += Complex64::new(if down { -0.5 } else { 0.5 }, 0.0);
                }
                Axis::X => {
                    let partner = if down { index - stride } else { index + stride };
                    out[(partner, index)] += Complex64::new(0.5, 0.0);
                }
                Axis::Y => {
                    // ⟨↓|I^y|↑⟩ = i/2 and ⟨↑|I^y|↓⟩ = −i/2.
                    let partner = if down { index - stride } else { index + stride };
                    let val = if down { -0.5 } else { 0.5 };
                    out[(partner, index)] += Complex64::new(0.0, val);
                }
            }
        }
    }
    Ok(SpinOperator { matrix: out })
}

/// Collective raising operator Σ_{k∈subset} I⁺_k.
pub fn collective_raising(system: &SpinSystem, subset: &[usize]) -> Result<SpinOperator> {
    let n = system.n_spins();
    for &k in subset {
        if k >= n {
            return Err(Error::IndexOutOfRange { index: k, n });
        }
    }
    let dim = 1usize << n;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for index in 0..dim {
        for &k in subset {
            let stride = 1usize << (n - 1 - k);
            if (index / stride) % 2 == 1 {
                out[(index - stride, index)] += Complex64::new(1.0, 0.0);
            }
        }
    }
    Ok(SpinOperator { matrix: out })
}

/// Dense collective operator over selected sites of a generalized system.
pub fn collective_site_operator(
    sys: &SiteSystem,
    axis: Axis,
    selected: &[usize],
) -> DMatrix<Complex64> {
    let dim = sys.dim();
    let strides = sys.strides();
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for index in 0..dim {
        for &k in selected {
            let two_j = sys.sites[k].two_j;
            let d = ((index / strides[k]) % (two_j as usize + 1)) as u32;
            match axis {
                Axis::Z => {
                    out[(index, index)] += Complex64::new(two_j as f64 / 2.0 - d as f64, 0.0);
                }
                Axis::X | Axis::Y => {
                    if d >= 1 {
                        let up = index - strides[k];
                        let c = 0.5 * raise_coeff(two_j, d);
                        match axis {
                            Axis::X => {
                                out[(up, index)] += Complex64::new(c, 0.0);
                                out[(index, up)] += Complex64::new(c, 0.0);
                            }
                            Axis::Y => {
                                out[(up, index)] += Complex64::new(0.0, -c);
                                out[(index, up)] += Complex64::new(0.0, c);
                            }
                            Axis::Z => unreachable!(),
                        }
                    }
                }
            }
        }
    }
    out
}
