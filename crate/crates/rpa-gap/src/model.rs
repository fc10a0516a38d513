//! Bosonization of the environment: effective hoppings, oscillator
//! frequencies, the environment mean-field energy, and assembly of the
//! coupled fermion–boson model.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, RpaError};
use crate::fermion::TwoOrbitalSpace;
use crate::integrals::IntegralSet;

/// Hopping amplitudes dressed by the mean field of the occupied environment:
/// t̃_pq = t_pq + Σ_k (2h_pqkk − h_pkkq)·n_k over environment orbitals k.
pub fn effective_hoppings(ints: &IntegralSet) -> DMatrix<f64> {
    let n = ints.n_orbitals();
    let mut t_eff = ints.t_matrix().clone();
    for p in 0..n {
        for q in 0..n {
            let mut shift = 0.0;
            for k in ints.occupied_env() {
                shift += 2.0 * ints.h(p, q, k, k) - ints.h(p, k, k, q);
            }
            t_eff[(p, q)] += shift;
        }
    }
    t_eff
}

/// One oscillator per excitation from an occupied environment orbital to an
/// empty one.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Mode {
    /// Empty orbital m (0-based).
    pub empty: usize,
    /// Occupied orbital α (0-based).
    pub occupied: usize,
    /// ħω in Hartree.
    pub omega: f64,
}

/// Oscillator frequencies ħω_mα = t̃_mm − t̃_αα − h_mmαα + h_mαmα for every
/// (empty m, occupied α) environment pair. Any non-positive frequency
/// rejects the construction.
pub fn mode_frequencies(ints: &IntegralSet, t_eff: &DMatrix<f64>) -> Result<Vec<Mode>> {
    let occupied = ints.occupied_env();
    let empty = ints.empty_env();
    if occupied.is_empty() || empty.is_empty() {
        return Err(RpaError::NoModes);
    }
    let mut modes = Vec::with_capacity(empty.len() * occupied.len());
    for &m in &empty {
        for &a in &occupied {
            let omega =
                t_eff[(m, m)] - t_eff[(a, a)] - ints.h(m, m, a, a) + ints.h(m, a, m, a);
            if omega <= 0.0 {
                return Err(RpaError::Instability(format!(
                    "oscillator ({}, {}) has non-positive frequency {omega:.6e} Hartree",
                    m + 1,
                    a + 1
                )));
            }
            modes.push(Mode {
                empty: m,
                occupied: a,
                omega,
            });
        }
    }
    Ok(modes)
}

/// Mean-field energy of the environment:
/// E = 2Σ_q t_qq n_q + Σ_pq (2h_ppqq − h_pqqp) n_p n_q.
pub fn env_hf_energy(ints: &IntegralSet) -> f64 {
    let occupied = ints.occupied_env();
    let mut e = 0.0;
    for &q in &occupied {
        e += 2.0 * ints.t(q, q);
    }
    for &p in &occupied {
        for &q in &occupied {
            e += 2.0 * ints.h(p, p, q, q) - ints.h(p, q, q, p);
        }
    }
    e
}

/// Weak-coupling ratios of the bosonization, per mode:
/// r1 = h_mαmα/ħω and r2 = (h_mmmm + h_αααα − 2h_mmαα)/ħω.
#[derive(Debug, Clone, Serialize)]
pub struct ModeValidity {
    pub empty: usize,
    pub occupied: usize,
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidityReport {
    pub per_mode: Vec<ModeValidity>,
    pub max_r1: f64,
    pub max_r2: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Default validity threshold: the weak-coupling ratios must stay below 1
/// for the oscillator picture to make sense at all.
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 1.0;

/// The active 4-level system coupled to the environment oscillators.
#[derive(Debug, Clone)]
pub struct RpaModel {
    /// Two-electron active Hamiltonian in the 6-dimensional sector.
    pub h12: DMatrix<f64>,
    pub modes: Vec<Mode>,
    /// Per-mode symmetric 2×2 coupling g_pq = √2·h_pq,mα.
    pub couplings: Vec<DMatrix<f64>>,
    /// Mode-mode matrix h_mα,nβ (diagonal included).
    pub mode_mode: DMatrix<f64>,
    pub env_hf_energy: f64,
    pub core_energy: f64,
    pub space: TwoOrbitalSpace,
}

impl RpaModel {
    /// The 4×4 covalent block of the active Hamiltonian in the basis
    /// |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩.
    pub fn covalent_block(&self) -> DMatrix<f64> {
        let idx = self.space.covalent_indices();
        DMatrix::from_fn(4, 4, |i, j| self.h12[(idx[i], idx[j])])
    }

    /// Coupling operators O_mα = Σ_pq g_pq,mα Σ_σ c†_pσ c_qσ in the sector.
    pub fn coupling_operators(&self) -> Vec<DMatrix<f64>> {
        self.couplings
            .iter()
            .map(|g| {
                let mut o = DMatrix::zeros(self.space.dim(), self.space.dim());
                for p in 0..2 {
                    for q in 0..2 {
                        if g[(p, q)] != 0.0 {
                            o += self.space.e_op(p, q).scale(g[(p, q)]);
                        }
                    }
                }
                o
            })
            .collect()
    }

    /// Largest |g_pq|/ω over modes; the expansion parameter of the model.
    pub fn max_coupling_ratio(&self) -> f64 {
        self.modes
            .iter()
            .zip(&self.couplings)
            .map(|(m, g)| g.iter().map(|x| x.abs()).fold(0.0f64, f64::max) / m.omega)
            .fold(0.0, f64::max)
    }
}

/// Assemble the bosonized model and its validity report.
pub fn build_rpa_model(
    ints: &IntegralSet,
    validity_threshold: f64,
) -> Result<(RpaModel, ValidityReport)> {
    let space = TwoOrbitalSpace::new();
    let mut t_active = DMatrix::zeros(2, 2);
    for p in 0..2 {
        for q in 0..2 {
            t_active[(p, q)] = ints.t(p, q);
        }
    }
    let h12 = space.active_hamiltonian(&t_active, |p, q, r, s| ints.h(p, q, r, s));

    let t_eff = effective_hoppings(ints);
    let modes = mode_frequencies(ints, &t_eff)?;

    let couplings: Vec<DMatrix<f64>> = modes
        .iter()
        .map(|m| {
            DMatrix::from_fn(2, 2, |p, q| {
                std::f64::consts::SQRT_2 * ints.h(p, q, m.empty, m.occupied)
            })
        })
        .collect();

    let k = modes.len();
    let mode_mode = DMatrix::from_fn(k, k, |i, j| {
        ints.h(
            modes[i].empty,
            modes[i].occupied,
            modes[j].empty,
            modes[j].occupied,
        )
    });

    let per_mode: Vec<ModeValidity> = modes
        .iter()
        .map(|m| {
            let (em, oc) = (m.empty, m.occupied);
            ModeValidity {
                empty: em,
                occupied: oc,
                r1: ints.h(em, oc, em, oc) / m.omega,
                r2: (ints.h(em, em, em, em) + ints.h(oc, oc, oc, oc)
                    - 2.0 * ints.h(em, em, oc, oc))
                    / m.omega,
            }
        })
        .collect();
    let max_r1 = per_mode.iter().map(|v| v.r1.abs()).fold(0.0f64, f64::max);
    let max_r2 = per_mode.iter().map(|v| v.r2.abs()).fold(0.0f64, f64::max);
    let report = ValidityReport {
        pass: max_r1 < validity_threshold && max_r2 < validity_threshold,
        per_mode,
        max_r1,
        max_r2,
        threshold: validity_threshold,
    };

    Ok((
        RpaModel {
            h12,
            modes,
            couplings,
            mode_mode,
            env_hf_energy: env_hf_energy(ints),
            core_energy: ints.core_energy(),
            space,
        },
        report,
    ))
}
