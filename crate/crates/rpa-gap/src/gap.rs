//! Singlet–triplet gaps of the coupled fermion–boson model: the static
//! boson-elimination route and the truncated-boson brute-force oracle.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Result, RpaError};
use crate::fermion::spin_resolved_minima;
use crate::model::{RpaModel, ValidityReport};

pub const HARTREE_TO_KCAL_PER_MOL: f64 = 627.509;

/// Brute-force capacity for the truncated-boson diagonalization.
pub const ORACLE_MAX_DIM: usize = 16384;

/// Result of the static-limit gap computation. Energies are eigenvalues of
/// the renormalized active Hamiltonian; additive constants common to both
/// spin states are omitted.
#[derive(Debug, Clone)]
pub struct GapResult {
    /// ΔE_ST = E(lowest triplet) − E(lowest singlet); positive means the
    /// singlet is the ground state.
    pub gap_hartree: f64,
    pub bare_gap_hartree: f64,
    pub singlet_energy: f64,
    pub triplet_energy: f64,
    /// Renormalized two-electron active Hamiltonian (6×6 sector).
    pub corrected_h12: DMatrix<f64>,
}

/// Stiffness matrix of the boson quadratic form in position coordinates:
/// M = diag(ω)/2 + 2·h_modemode. The static ground-state shift for frozen
/// fermion operators O is −½ Oᵀ M⁻¹ O.
fn stiffness_inverse(model: &RpaModel) -> Result<DMatrix<f64>> {
    let k = model.modes.len();
    let mut m = model.mode_mode.scale(2.0);
    for i in 0..k {
        m[(i, i)] += 0.5 * model.modes[i].omega;
    }
    let eig = m.symmetric_eigen();
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(RpaError::Instability(format!(
            "mode-mode coupling destabilizes the boson potential (minimum stiffness {min:.3e})"
        )));
    }
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x));
    Ok(&eig.eigenvectors * inv_diag * eig.eigenvectors.transpose())
}

/// Integrate the oscillators out in the static limit: normal modes of the
/// quadratic boson form are eliminated exactly for commuting couplings,
/// producing ΔH = −½ Σ_ij (M⁻¹)_ij O_i O_j on the active space. The gap is
/// then read from the spin-resolved spectrum of the corrected Hamiltonian.
pub fn static_gap(model: &RpaModel) -> Result<GapResult> {
    let (bare_s, bare_t) = spin_resolved_minima(&model.space, &model.h12)?;
    let ops = model.coupling_operators();
    let m_inv = stiffness_inverse(model)?;
    let dim = model.space.dim();
    let mut correction = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..ops.len() {
        for j in 0..ops.len() {
            if m_inv[(i, j)] != 0.0 {
                correction += (&ops[i] * &ops[j]).scale(-0.5 * m_inv[(i, j)]);
            }
        }
    }
    let corrected = &model.h12 + correction;
    let (es, et) = spin_resolved_minima(&model.space, &corrected)?;
    Ok(GapResult {
        gap_hartree: et - es,
        bare_gap_hartree: bare_t - bare_s,
        singlet_energy: es,
        triplet_energy: et,
        corrected_h12: corrected,
    })
}

/// Matrix of x = a + a† for a truncated oscillator.
fn position_matrix(dim: usize) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        let v = (n as f64).sqrt();
        x[(n - 1, n)] = v;
        x[(n, n - 1)] = v;
    }
    x
}

/// Boson-space Hamiltonian with every oscillator truncated at n_max quanta:
/// Σ ω a†a + Σ h_mα,nβ x x plus the constant −Σ h_mαmα.
fn boson_hamiltonian(model: &RpaModel, per_mode_dim: usize) -> DMatrix<f64> {
    let k = model.modes.len();
    let bdim = per_mode_dim.pow(k as u32);
    let mut h = DMatrix::<f64>::zeros(bdim, bdim);

    let embed = |site: usize, local: &DMatrix<f64>| -> DMatrix<f64> {
        let left = per_mode_dim.pow(site as u32);
        let right = per_mode_dim.pow((k - site - 1) as u32);
        DMatrix::<f64>::identity(left, left)
            .kronecker(local)
            .kronecker(&DMatrix::<f64>::identity(right, right))
    };

    let x_ops: Vec<DMatrix<f64>> = (0..k)
        .map(|i| embed(i, &position_matrix(per_mode_dim)))
        .collect();
    for (i, mode) in model.modes.iter().enumerate() {
        let number = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            per_mode_dim,
            (0..per_mode_dim).map(|n| n as f64),
        ));
        h += embed(i, &number).scale(mode.omega);
        h -= DMatrix::identity(bdim, bdim).scale(model.mode_mode[(i, i)]);
        for j in 0..k {
            if model.mode_mode[(i, j)] != 0.0 {
                h += (&x_ops[i] * &x_ops[j]).scale(model.mode_mode[(i, j)]);
            }
        }
    }
    h
}

/// Brute-force gap: dense diagonalization of H_12 + H_env + V_RPA in the
/// S_z = 0 sector with truncated oscillators, spin-resolved through the
/// total-S² eigenbasis of the active fermions.
pub fn oracle_gap(model: &RpaModel, n_boson_max: usize) -> Result<f64> {
    let per_mode_dim = n_boson_max + 1;
    let k = model.modes.len() as u32;
    let bdim = per_mode_dim
        .checked_pow(k)
        .ok_or(RpaError::DimensionOverflow {
            dim: usize::MAX,
            max: ORACLE_MAX_DIM,
        })?;
    let total = 4 * bdim;
    if total > ORACLE_MAX_DIM {
        return Err(RpaError::DimensionOverflow {
            dim: total,
            max: ORACLE_MAX_DIM,
        });
    }

    let sz0 = model.space.sz0_indices();
    let (vs, vt) = model.space.spin_adapted_bases(&sz0);
    let restrict = |full: &DMatrix<f64>| -> DMatrix<f64> {
        DMatrix::from_fn(sz0.len(), sz0.len(), |i, j| full[(sz0[i], sz0[j])])
    };
    let h12 = restrict(&model.h12);
    let ops: Vec<DMatrix<f64>> = model.coupling_operators().iter().map(&restrict).collect();

    let h_bos = boson_hamiltonian(model, per_mode_dim);
    let x_single: Vec<DMatrix<f64>> = {
        let embed = |site: usize, local: &DMatrix<f64>| -> DMatrix<f64> {
            let left = per_mode_dim.pow(site as u32);
            let right = per_mode_dim.pow(model.modes.len() as u32 - site as u32 - 1);
            DMatrix::<f64>::identity(left, left)
                .kronecker(local)
                .kronecker(&DMatrix::<f64>::identity(right, right))
        };
        (0..model.modes.len())
            .map(|i| embed(i, &position_matrix(per_mode_dim)))
            .collect()
    };

    let block_minimum = |basis: &DMatrix<f64>| -> f64 {
        let fdim = basis.ncols();
        let hf = basis.transpose() * &h12 * basis;
        let ib = DMatrix::<f64>::identity(bdim, bdim);
        let iff = DMatrix::<f64>::identity(fdim, fdim);
        let mut h = hf.kronecker(&ib) + iff.kronecker(&h_bos);
        for (o, x) in ops.iter().zip(&x_single) {
            let of = basis.transpose() * o * basis;
            h += of.kronecker(x);
        }
        let eig = h.symmetric_eigen();
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    };

    let e_singlet = block_minimum(&vs);
    let e_triplet = block_minimum(&vt);
    Ok(e_triplet - e_singlet)
}

/// Full eigenvalue list of the truncated model over all S_z sectors, for
/// degeneracy diagnostics. Constants (environment mean field, core) are
/// included so the values are the eigenvalues of the bosonized Hamiltonian.
pub fn oracle_full_spectrum(model: &RpaModel, n_boson_max: usize) -> Result<Vec<f64>> {
    let per_mode_dim = n_boson_max + 1;
    let k = model.modes.len() as u32;
    let bdim = per_mode_dim
        .checked_pow(k)
        .ok_or(RpaError::DimensionOverflow {
            dim: usize::MAX,
            max: ORACLE_MAX_DIM,
        })?;
    let total = model.space.dim() * bdim;
    if total > ORACLE_MAX_DIM {
        return Err(RpaError::DimensionOverflow {
            dim: total,
            max: ORACLE_MAX_DIM,
        });
    }
    let fdim = model.space.dim();
    let h_bos = boson_hamiltonian(model, per_mode_dim);
    let ib = DMatrix::<f64>::identity(bdim, bdim);
    let iff = DMatrix::<f64>::identity(fdim, fdim);
    let mut h = model.h12.kronecker(&ib) + iff.kronecker(&h_bos);
    let embed = |site: usize, local: &DMatrix<f64>| -> DMatrix<f64> {
        let left = per_mode_dim.pow(site as u32);
        let right = per_mode_dim.pow(model.modes.len() as u32 - site as u32 - 1);
        DMatrix::<f64>::identity(left, left)
            .kronecker(local)
            .kronecker(&DMatrix::<f64>::identity(right, right))
    };
    for (i, o) in model.coupling_operators().iter().enumerate() {
        h += o.kronecker(&embed(i, &position_matrix(per_mode_dim)));
    }
    let shift = model.env_hf_energy + model.core_energy;
    let mut values: Vec<f64> = h
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&e| e + shift)
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Aitken Δ² extrapolation for a geometrically converging sequence; returns
/// the last value when the differences are at noise level.
pub fn extrapolate_geometric(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    if values.len() < 3 {
        return *values.last().unwrap();
    }
    let n = values.len();
    let (x0, x1, x2) = (values[n - 3], values[n - 2], values[n - 1]);
    let denom = (x2 - x1) - (x1 - x0);
    if denom.abs() < 1e-14 * (1.0 + x2.abs()) {
        return x2;
    }
    x2 - (x2 - x1).powi(2) / denom
}

/// Companion brute-force value included in the report on request.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleInfo {
    pub n_boson_max: usize,
    pub gap_hartree: f64,
}

#[derive(Serialize)]
struct GapReport<'a> {
    format_version: u32,
    gap_hartree: f64,
    gap_kcal_mol: f64,
    bare_gap_hartree: f64,
    validity: &'a ValidityReport,
    n_modes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleInfo>,
}

/// Gap report as versioned JSON.
pub fn gap_report_json(
    gap: &GapResult,
    validity: &ValidityReport,
    n_modes: usize,
    oracle: Option<OracleInfo>,
) -> String {
    serde_json::to_string_pretty(&GapReport {
        format_version: 1,
        gap_hartree: gap.gap_hartree,
        gap_kcal_mol: gap.gap_hartree * HARTREE_TO_KCAL_PER_MOL,
        bare_gap_hartree: gap.bare_gap_hartree,
        validity,
        n_modes,
        oracle,
    })
    .expect("report serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_rpa_model;
    use crate::synthetic;

    #[test]
    fn zero_coupling_recovers_the_bare_gap() {
        let ints = synthetic::toy_integrals(0.0);
        let (model, _) = build_rpa_model(&ints, 1.0).unwrap();
        let gap = static_gap(&model).unwrap();
        assert!(
            (gap.gap_hartree - gap.bare_gap_hartree).abs() < 1e-12,
            "{} vs {}",
            gap.gap_hartree,
            gap.bare_gap_hartree
        );
        // The oracle agrees exactly for any truncation.
        for n in [0, 2, 5] {
            let oracle = oracle_gap(&model, n).unwrap();
            assert!((oracle - gap.bare_gap_hartree).abs() < 1e-10);
        }
    }

    #[test]
    fn truncation_zero_oracle_equals_the_bare_gap() {
        // Without virtual quanta the coupling cannot act: x has no diagonal.
        let ints = synthetic::toy_integrals(1.0);
        let (model, _) = build_rpa_model(&ints, 1.0).unwrap();
        let gap = static_gap(&model).unwrap();
        let oracle0 = oracle_gap(&model, 0).unwrap();
        assert!((oracle0 - gap.bare_gap_hartree).abs() < 1e-11);
    }

    #[test]
    fn oracle_converges_monotonically_on_a_strong_coupling() {
        let scale = synthetic::toy_scale_for_ratio(0.3);
        let ints = synthetic::toy_integrals(scale);
        let (model, _) = build_rpa_model(&ints, 10.0).unwrap();
        let g: Vec<f64> = [2usize, 4, 8]
            .iter()
            .map(|&n| oracle_gap(&model, n).unwrap())
            .collect();
        let limit = extrapolate_geometric(&g);
        let d1 = (g[0] - limit).abs();
        let d2 = (g[1] - limit).abs();
        let d3 = (g[2] - limit).abs();
        assert!(d1 > d2 && d2 > d3, "|err| = {d1:.3e}, {d2:.3e}, {d3:.3e}");
    }

    #[test]
    fn static_gap_matches_the_oracle_on_the_toy() {
        for ratio in [0.01, 0.05, 0.1] {
            let ints = synthetic::toy_integrals(synthetic::toy_scale_for_ratio(ratio));
            let (model, _) = build_rpa_model(&ints, 1.0).unwrap();
            assert!((model.max_coupling_ratio() - ratio).abs() < 1e-12);
            let gap = static_gap(&model).unwrap();
            let oracle: Vec<f64> = [2usize, 4, 8]
                .iter()
                .map(|&n| oracle_gap(&model, n).unwrap())
                .collect();
            let reference = extrapolate_geometric(&oracle);
            let correction = reference - gap.bare_gap_hartree;
            let tolerance = (0.05 * correction.abs()).max(1e-6);
            assert!(
                (gap.gap_hartree - reference).abs() < tolerance,
                "ratio {ratio}: static {} vs oracle {} (corr {correction:.3e})",
                gap.gap_hartree,
                reference
            );
        }
    }

    #[test]
    fn weak_coupling_shift_matches_second_order_perturbation_theory() {
        // Single mode, no mode-mode stiffness, g²/ω² = 1e−3.
        let ratio = (1e-3f64).sqrt();
        let ints = synthetic::pt_weak_coupling_fixture(synthetic::toy_scale_for_ratio(ratio));
        let (model, _) = build_rpa_model(&ints, 1.0).unwrap();
        let omega = model.modes[0].omega;
        let o = &model.coupling_operators()[0];

        // Perturbative shifts of the lowest singlet and triplet in the
        // S_z = 0 sector: ΔE_n = Σ_m |O_mn|²/(E_n − E_m − ω).
        let sz0 = model.space.sz0_indices();
        let h0 = DMatrix::from_fn(4, 4, |i, j| model.h12[(sz0[i], sz0[j])]);
        let o0 = DMatrix::from_fn(4, 4, |i, j| o[(sz0[i], sz0[j])]);
        let eig = h0.symmetric_eigen();
        // Order the eigenpairs by energy; nalgebra returns them unsorted.
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vecs = DMatrix::<f64>::zeros(4, 4);
        for (col, &i) in order.iter().enumerate() {
            vecs.set_column(col, &eig.eigenvectors.column(i));
        }
        let o_eig = vecs.transpose() * &o0 * &vecs;
        let s2_shift = |n: usize| -> f64 {
            (0..4)
                .map(|m| o_eig[(m, n)].powi(2) / (energies[n] - energies[m] - omega))
                .sum()
        };
        // Identify the lowest singlet/triplet states of h0.
        let s2 = {
            let full = model.space.s_squared();
            DMatrix::from_fn(4, 4, |i, j| full[(sz0[i], sz0[j])])
        };
        let mut lowest_singlet = None;
        let mut lowest_triplet = None;
        for n in 0..4 {
            let v = vecs.column(n);
            let s_val = (v.transpose() * &s2 * v)[(0, 0)];
            if s_val < 0.5 {
                if lowest_singlet.is_none() {
                    lowest_singlet = Some(n);
                }
            } else if lowest_triplet.is_none() {
                lowest_triplet = Some(n);
            }
        }
        let (ns, nt) = (lowest_singlet.unwrap(), lowest_triplet.unwrap());
        let pt_gap_shift = s2_shift(nt) - s2_shift(ns);

        let gap = static_gap(&model).unwrap();
        let static_shift = gap.gap_hartree - gap.bare_gap_hartree;
        assert!(
            (static_shift - pt_gap_shift).abs() < 0.05 * pt_gap_shift.abs(),
            "static {static_shift:.6e} vs PT {pt_gap_shift:.6e}"
        );
    }

    #[test]
    fn correction_shrinks_monotonically_with_coupling() {
        let mut last = f64::INFINITY;
        for ratio in [0.08, 0.04, 0.02, 0.01, 0.005] {
            let ints = synthetic::toy_integrals(synthetic::toy_scale_for_ratio(ratio));
            let (model, _) = build_rpa_model(&ints, 1.0).unwrap();
            let gap = static_gap(&model).unwrap();
            let correction = (gap.gap_hartree - gap.bare_gap_hartree).abs();
            assert!(correction < last, "correction grew at ratio {ratio}");
            last = correction;
        }
    }

    #[test]
    fn environment_constants_do_not_move_the_gap() {
        // Shift every environment t_qq by a constant: E_env changes, the
        // gap does not.
        let base = synthetic::toy_integrals(1.0);
        let shifted = {
            let mut one = vec![
                (0usize, 0usize, -1.00),
                (1, 1, -0.98),
                (0, 1, 0.02),
                (2, 2, -2.00 + 0.37),
                (3, 3, 2.60 + 0.37),
            ];
            one.swap(0, 1);
            crate::integrals::IntegralSet::new(
                4,
                0.0,
                &one,
                &[
                    (0, 0, 0, 0, 0.22),
                    (1, 1, 1, 1, 0.21),
                    (0, 0, 1, 1, 0.16),
                    (0, 1, 0, 1, 0.008),
                    (0, 0, 0, 1, 0.004),
                    (1, 1, 0, 1, 0.003),
                    (2, 2, 2, 2, 0.50),
                    (3, 3, 3, 3, 0.45),
                    (2, 2, 3, 3, 0.30),
                    (2, 3, 2, 3, 0.03),
                    (0, 0, 2, 2, 0.12),
                    (1, 1, 2, 2, 0.11),
                    (0, 0, 3, 3, 0.08),
                    (1, 1, 3, 3, 0.07),
                    (0, 0, 3, 2, 0.03),
                    (1, 1, 3, 2, -0.03),
                    (0, 1, 3, 2, 0.012),
                ],
                vec![
                    crate::integrals::Occupation::Occupied,
                    crate::integrals::Occupation::Empty,
                ],
            )
            .unwrap()
        };
        let (ma, _) = build_rpa_model(&base, 1.0).unwrap();
        let (mb, _) = build_rpa_model(&shifted, 1.0).unwrap();
        // ω is unchanged (the shift cancels in t̃_mm − t̃_αα) and so is the
        // gap; the environment energy moves by 2·0.37 per occupied orbital.
        let ga = static_gap(&ma).unwrap();
        let gb = static_gap(&mb).unwrap();
        assert!((ga.gap_hartree - gb.gap_hartree).abs() < 1e-10);
        assert!((mb.env_hf_energy - ma.env_hf_energy - 2.0 * 0.37).abs() < 1e-12);
        let oa = oracle_gap(&ma, 6).unwrap();
        let ob = oracle_gap(&mb, 6).unwrap();
        assert!((oa - ob).abs() < 1e-10);
    }

    #[test]
    fn oracle_capacity_is_enforced() {
        let ints = synthetic::five_orbital_two_occupied();
        let (model, _) = build_rpa_model(&ints, 1.0).unwrap();
        assert_eq!(model.modes.len(), 2);
        // 4·(n+1)² ≤ 16384 ⇒ n ≤ 63.
        assert!(matches!(
            oracle_gap(&model, 70),
            Err(RpaError::DimensionOverflow { .. })
        ));
        assert!(oracle_gap(&model, 6).is_ok());
    }

    #[test]
    fn triplet_states_are_triply_degenerate_in_the_full_space() {
        let ints = synthetic::toy_integrals(synthetic::toy_scale_for_ratio(0.05));
        let (model, _) = build_rpa_model(&ints, 1.0).unwrap();
        let spectrum = oracle_full_spectrum(&model, 5).unwrap();
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for &e in &spectrum {
            match groups.last_mut() {
                Some((v, c)) if (e - *v).abs() < 1e-10 => *c += 1,
                _ => groups.push((e, 1)),
            }
        }
        // The lowest triply degenerate level is the lowest triplet; its
        // distance to the ground state must equal the S_z-resolved gap.
        let (e_triplet, _) = groups
            .iter()
            .find(|&&(_, c)| c == 3)
            .copied()
            .unwrap_or_else(|| panic!("no triplet multiplet found: {groups:?}"));
        let gap = oracle_gap(&model, 5).unwrap();
        assert!(gap > 0.0, "toy fixture should have a singlet ground state");
        assert!(
            (e_triplet - spectrum[0] - gap).abs() < 1e-9,
            "full-space gap {} vs S_z-resolved {gap}",
            e_triplet - spectrum[0]
        );
    }
}
