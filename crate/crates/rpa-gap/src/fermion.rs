//! Two electrons in two orbitals: the 6-dimensional sector, spin-summed
//! hopping operators and total-spin classification.
//!
//! Operators are assembled in the 16-dimensional Fock space of the four
//! spin orbitals (orbital 0↑, 0↓, 1↑, 1↓ as bits 0..3 with the usual
//! fermionic sign strings) and then restricted to the two-electron sector.

use nalgebra::DMatrix;

use crate::error::{Result, RpaError};

const N_MODES: usize = 4;
const FOCK_DIM: usize = 16;

fn mode_of(orbital: usize, spin_down: bool) -> usize {
    2 * orbital + spin_down as usize
}

/// c_mode in the Fock basis.
fn annihilator(mode: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(FOCK_DIM, FOCK_DIM);
    for state in 0..FOCK_DIM {
        if state & (1 << mode) != 0 {
            let sign = if ((state & ((1 << mode) - 1)) as u32).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            m[(state ^ (1 << mode), state)] = sign;
        }
    }
    m
}

/// The two-electron active space with its operator algebra.
#[derive(Debug, Clone)]
pub struct TwoOrbitalSpace {
    /// Fock bitmasks of the 6 basis states, ascending.
    masks: Vec<usize>,
    /// Spin-summed hopping E_pq = Σ_σ c†_pσ c_qσ restricted to the sector.
    e_ops: Vec<DMatrix<f64>>,
    s_squared: DMatrix<f64>,
    s_z: DMatrix<f64>,
}

impl TwoOrbitalSpace {
    pub fn new() -> TwoOrbitalSpace {
        let masks: Vec<usize> = (0..FOCK_DIM)
            .filter(|s| (*s as u32).count_ones() == 2)
            .collect();

        let c: Vec<DMatrix<f64>> = (0..N_MODES).map(annihilator).collect();
        let restrict = |full: &DMatrix<f64>| -> DMatrix<f64> {
            DMatrix::from_fn(masks.len(), masks.len(), |i, j| full[(masks[i], masks[j])])
        };

        let mut e_ops = Vec::with_capacity(4);
        for p in 0..2 {
            for q in 0..2 {
                let mut full = DMatrix::zeros(FOCK_DIM, FOCK_DIM);
                for spin_down in [false, true] {
                    let cp = &c[mode_of(p, spin_down)];
                    let cq = &c[mode_of(q, spin_down)];
                    full += cp.transpose() * cq;
                }
                e_ops.push(restrict(&full));
            }
        }

        // S⁺ = Σ_p c†_{p↑} c_{p↓}, S_z = (N↑ − N↓)/2,
        // S² = S⁻S⁺ + S_z(S_z + 1).
        let mut s_plus = DMatrix::zeros(FOCK_DIM, FOCK_DIM);
        let mut s_z_full = DMatrix::zeros(FOCK_DIM, FOCK_DIM);
        for p in 0..2 {
            let up = &c[mode_of(p, false)];
            let dn = &c[mode_of(p, true)];
            s_plus += up.transpose() * dn;
            s_z_full += (up.transpose() * up - dn.transpose() * dn).scale(0.5);
        }
        let s_sq_full =
            s_plus.transpose() * &s_plus + &s_z_full * (&s_z_full + DMatrix::identity(FOCK_DIM, FOCK_DIM));

        TwoOrbitalSpace {
            s_squared: restrict(&s_sq_full),
            s_z: restrict(&s_z_full),
            e_ops,
            masks,
        }
    }

    pub fn dim(&self) -> usize {
        self.masks.len()
    }

    /// E_pq restricted to the two-electron sector, p, q ∈ {0, 1}.
    pub fn e_op(&self, p: usize, q: usize) -> &DMatrix<f64> {
        &self.e_ops[2 * p + q]
    }

    pub fn s_squared(&self) -> &DMatrix<f64> {
        &self.s_squared
    }

    /// Positions of the S_z = 0 basis states within the sector.
    pub fn sz0_indices(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.s_z[(i, i)].abs() < 1e-12)
            .collect()
    }

    /// Positions of the covalent states in the order |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩
    /// (spin of orbital 0 first).
    pub fn covalent_indices(&self) -> [usize; 4] {
        let find = |mask: usize| {
            self.masks
                .iter()
                .position(|&m| m == mask)
                .expect("covalent mask present")
        };
        // Bits: 0 = 0↑, 1 = 0↓, 2 = 1↑, 3 = 1↓.
        [
            find(0b0101), // ↑↑
            find(0b1001), // ↑↓
            find(0b0110), // ↓↑
            find(0b1010), // ↓↓
        ]
    }

    /// Active-space Hamiltonian in the sector from one-electron elements
    /// t_pq and chemist-convention two-electron integrals (pq|rs): the
    /// coefficient of c†_pσ c†_qσ' c_rσ' c_sσ is (ps|qr).
    pub fn active_hamiltonian<F>(&self, t: &DMatrix<f64>, chem: F) -> DMatrix<f64>
    where
        F: Fn(usize, usize, usize, usize) -> f64,
    {
        let c: Vec<DMatrix<f64>> = (0..N_MODES).map(annihilator).collect();
        let mut full = DMatrix::<f64>::zeros(FOCK_DIM, FOCK_DIM);
        for p in 0..2 {
            for q in 0..2 {
                if t[(p, q)] != 0.0 {
                    for spin_down in [false, true] {
                        full += (c[mode_of(p, spin_down)].transpose()
                            * &c[mode_of(q, spin_down)])
                            .scale(t[(p, q)]);
                    }
                }
            }
        }
        for p in 0..2 {
            for q in 0..2 {
                for r in 0..2 {
                    for s in 0..2 {
                        let coeff = 0.5 * chem(p, s, q, r);
                        if coeff == 0.0 {
                            continue;
                        }
                        for sd1 in [false, true] {
                            for sd2 in [false, true] {
                                let term = c[mode_of(p, sd1)].transpose()
                                    * c[mode_of(q, sd2)].transpose()
                                    * &c[mode_of(r, sd2)]
                                    * &c[mode_of(s, sd1)];
                                full += term.scale(coeff);
                            }
                        }
                    }
                }
            }
        }
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            full[(self.masks[i], self.masks[j])]
        })
    }

    /// Orthonormal bases of the singlet (S² = 0) and triplet (S² = 2)
    /// subspaces of a given sub-basis selection.
    pub fn spin_adapted_bases(&self, selection: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
        let k = selection.len();
        let s2 = DMatrix::from_fn(k, k, |i, j| self.s_squared[(selection[i], selection[j])]);
        let eig = s2.symmetric_eigen();
        let mut singlet_cols = Vec::new();
        let mut triplet_cols = Vec::new();
        for i in 0..k {
            let v = eig.eigenvectors.column(i).clone_owned();
            if eig.eigenvalues[i].abs() < 1e-9 {
                singlet_cols.push(v);
            } else if (eig.eigenvalues[i] - 2.0).abs() < 1e-9 {
                triplet_cols.push(v);
            } else {
                unreachable!("two-electron S² eigenvalue {}", eig.eigenvalues[i]);
            }
        }
        let stack = |cols: &[nalgebra::DVector<f64>]| {
            let mut m = DMatrix::zeros(k, cols.len());
            for (ci, v) in cols.iter().enumerate() {
                m.set_column(ci, v);
            }
            m
        };
        (stack(&singlet_cols), stack(&triplet_cols))
    }
}

impl Default for TwoOrbitalSpace {
    fn default() -> Self {
        Self::new()
    }
}

/// Lowest eigenvalues of a two-electron Hamiltonian resolved by total spin:
/// returns (E_singlet, E_triplet).
pub fn spin_resolved_minima(space: &TwoOrbitalSpace, h: &DMatrix<f64>) -> Result<(f64, f64)> {
    let selection: Vec<usize> = (0..space.dim()).collect();
    let (vs, vt) = space.spin_adapted_bases(&selection);
    let min_eig = |basis: &DMatrix<f64>| -> Result<f64> {
        if basis.ncols() == 0 {
            return Err(RpaError::Instability("empty spin sector".into()));
        }
        let block = basis.transpose() * h * basis;
        let eig = block.symmetric_eigen();
        Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
    };
    Ok((min_eig(&vs)?, min_eig(&vt)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_dimensions_and_blocks() {
        let space = TwoOrbitalSpace::new();
        assert_eq!(space.dim(), 6);
        assert_eq!(space.sz0_indices().len(), 4);
        let (vs, vt) = space.spin_adapted_bases(&(0..6).collect::<Vec<_>>());
        assert_eq!(vs.ncols(), 3);
        assert_eq!(vt.ncols(), 3);
    }

    #[test]
    fn e_ops_commute_with_total_spin() {
        let space = TwoOrbitalSpace::new();
        for p in 0..2 {
            for q in 0..2 {
                let e = space.e_op(p, q);
                let comm = e * space.s_squared() - space.s_squared() * e;
                let dev = comm.iter().map(|x| x.abs()).fold(0.0f64, f64::max);
                assert!(dev < 1e-12, "E_{p}{q} fails to commute with S²: {dev:.3e}");
            }
        }
    }

    #[test]
    fn hubbard_dimer_pins_the_integral_convention() {
        // Two-site Hubbard at half filling: t_01 = −t', on-site U only.
        // Singlet ground energy (U − √(U² + 16t'²))/2, triplet at 0.
        let space = TwoOrbitalSpace::new();
        let tp = 0.37;
        let u = 1.9;
        let mut t = DMatrix::zeros(2, 2);
        t[(0, 1)] = -tp;
        t[(1, 0)] = -tp;
        let h = space.active_hamiltonian(&t, |p, q, r, s| {
            if p == q && q == r && r == s {
                u
            } else {
                0.0
            }
        });
        let (es, et) = spin_resolved_minima(&space, &h).unwrap();
        let expect = 0.5 * (u - (u * u + 16.0 * tp * tp).sqrt());
        assert!((es - expect).abs() < 1e-12, "{es} vs {expect}");
        assert!(et.abs() < 1e-12, "triplet should sit at zero, got {et}");
    }

    #[test]
    fn direct_and_kinetic_exchange_have_opposite_signs() {
        let space = TwoOrbitalSpace::new();
        let (u, u12, k) = (0.8, 0.5, 0.02);
        let chem = |p: usize, q: usize, r: usize, s: usize| match (p, q, r, s) {
            (0, 0, 0, 0) | (1, 1, 1, 1) => u,
            (0, 0, 1, 1) | (1, 1, 0, 0) => u12,
            (0, 1, 0, 1) | (1, 0, 1, 0) | (0, 1, 1, 0) | (1, 0, 0, 1) => k,
            _ => 0.0,
        };

        // No hopping: direct exchange puts the triplet exactly 2K below
        // the open-shell singlet (the ionic block stays high).
        let mut t = DMatrix::zeros(2, 2);
        t[(0, 0)] = -1.0;
        t[(1, 1)] = -1.0;
        let h = space.active_hamiltonian(&t, chem);
        let (es, et) = spin_resolved_minima(&space, &h).unwrap();
        assert!(((et - es) + 2.0 * k).abs() < 1e-12, "gap {}", et - es);

        // Strong enough hopping flips the order through kinetic exchange.
        t[(0, 1)] = -0.1;
        t[(1, 0)] = -0.1;
        let h = space.active_hamiltonian(&t, chem);
        let (es, et) = spin_resolved_minima(&space, &h).unwrap();
        assert!(et - es > 0.0, "singlet should be the ground state");
    }
}
