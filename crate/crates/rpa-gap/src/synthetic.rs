//! Synthetic integral sets: small, well-conditioned fixtures used by the
//! test suite and shipped as example inputs.

use crate::integrals::{IntegralSet, Occupation};

/// Four-orbital toy set: a near-degenerate active pair (orbitals 1, 2), one
/// doubly occupied and one empty environment orbital forming a single
/// oscillator at ħω = 4.4 Hartree. `cross_scale` multiplies the
/// active–environment coupling integrals; at 1.0 the coupling ratio
/// max|g|/ω is ≈ 0.0096.
pub fn toy_integrals(cross_scale: f64) -> IntegralSet {
    let s = cross_scale;
    IntegralSet::new(
        4,
        0.0,
        &[
            (0, 0, -1.00),
            (1, 1, -0.98),
            (0, 1, 0.02),
            (2, 2, -2.00),
            (3, 3, 2.60),
        ],
        &[
            // Active block.
            (0, 0, 0, 0, 0.22),
            (1, 1, 1, 1, 0.21),
            (0, 0, 1, 1, 0.16),
            (0, 1, 0, 1, 0.008),
            (0, 0, 0, 1, 0.004),
            (1, 1, 0, 1, 0.003),
            // Environment block.
            (2, 2, 2, 2, 0.50),
            (3, 3, 3, 3, 0.45),
            (2, 2, 3, 3, 0.30),
            (2, 3, 2, 3, 0.03),
            // Active–environment density integrals (outside the model).
            (0, 0, 2, 2, 0.12),
            (1, 1, 2, 2, 0.11),
            (0, 0, 3, 3, 0.08),
            (1, 1, 3, 3, 0.07),
            // Oscillator couplings h_pq,mα.
            (0, 0, 3, 2, 0.03 * s),
            (1, 1, 3, 2, -0.03 * s),
            (0, 1, 3, 2, 0.012 * s),
        ],
        vec![Occupation::Occupied, Occupation::Empty],
    )
    .expect("toy fixture is valid")
}

/// Cross-coupling scale at which the toy fixture reaches max|g|/ω = r.
pub fn toy_scale_for_ratio(r: f64) -> f64 {
    // max|h_cross| = 0.03, ω = 4.4.
    r * 4.4 / (std::f64::consts::SQRT_2 * 0.03)
}

/// Single-mode fixture tailored for comparison against plain second-order
/// perturbation theory: no mode-mode stiffness, a symmetric active pair,
/// and a pure inter-orbital coupling. The boson correction then acts
/// uniformly on the mixing sector, so the static result and second-order
/// theory differ only by the small channel-energy offsets in the
/// perturbative denominators.
pub fn pt_weak_coupling_fixture(cross_scale: f64) -> IntegralSet {
    let s = cross_scale;
    IntegralSet::new(
        4,
        0.0,
        &[
            (0, 0, -1.00),
            (1, 1, -1.00),
            (0, 1, 0.02),
            (2, 2, -2.00),
            (3, 3, 2.60),
        ],
        &[
            (0, 0, 0, 0, 0.30),
            (1, 1, 1, 1, 0.30),
            (0, 0, 1, 1, 0.26),
            (0, 1, 0, 1, 0.006),
            (2, 2, 2, 2, 0.50),
            (3, 3, 3, 3, 0.45),
            (2, 2, 3, 3, 0.30),
            (0, 1, 3, 2, 0.03 * s),
        ],
        vec![Occupation::Occupied, Occupation::Empty],
    )
    .expect("fixture is valid")
}

/// Fixture whose oscillator frequency is independent of the two-electron
/// tensor ((22|22) = (33|22)), so the validity ratios are exactly linear in
/// a uniform scaling of the tensor.
pub fn validity_fixture(h_scale: f64) -> IntegralSet {
    let l = h_scale;
    IntegralSet::new(
        4,
        0.0,
        &[(2, 2, -1.0), (3, 3, 1.0)],
        &[
            (2, 2, 2, 2, 0.30 * l),
            (2, 2, 3, 3, 0.30 * l),
            (3, 3, 3, 3, 0.41 * l),
            (2, 3, 2, 3, 0.02 * l),
        ],
        vec![Occupation::Occupied, Occupation::Empty],
    )
    .expect("fixture is valid")
}

/// Five orbitals with two occupied and one empty environment orbital:
/// exercises multi-term mean-field sums and a two-mode model.
pub fn five_orbital_two_occupied() -> IntegralSet {
    IntegralSet::new(
        5,
        -0.7,
        &[
            (0, 0, -0.9),
            (1, 1, -0.88),
            (0, 1, 0.015),
            (2, 2, -1.8),
            (3, 3, -1.6),
            (4, 4, 2.2),
        ],
        &[
            (0, 0, 0, 0, 0.2),
            (1, 1, 1, 1, 0.19),
            (0, 0, 1, 1, 0.14),
            (0, 1, 0, 1, 0.006),
            (2, 2, 2, 2, 0.45),
            (3, 3, 3, 3, 0.42),
            (4, 4, 4, 4, 0.40),
            (2, 2, 3, 3, 0.28),
            (2, 2, 4, 4, 0.26),
            (3, 3, 4, 4, 0.25),
            (2, 3, 2, 3, 0.015),
            (2, 4, 2, 4, 0.02),
            (3, 4, 3, 4, 0.018),
            (0, 0, 4, 2, 0.02),
            (1, 1, 4, 2, -0.018),
            (0, 1, 4, 2, 0.008),
            (0, 0, 4, 3, 0.015),
            (1, 1, 4, 3, -0.012),
            (0, 1, 4, 3, 0.006),
        ],
        vec![
            Occupation::Occupied,
            Occupation::Occupied,
            Occupation::Empty,
        ],
    )
    .expect("fixture is valid")
}
