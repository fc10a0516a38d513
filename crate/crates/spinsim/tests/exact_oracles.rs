//! Exact-solver checks against closed-form and brute-force oracles.

mod common;

use common::*;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::f64::consts::TAU;

use spinsim::eigen::eigendecompose;
use spinsim::evolve::{sampled_correlation, SampleMode};
use spinsim::operators::{build_hamiltonian, collective_operator, Axis};
use spinsim::solver::{exact_spectrum, exact_spectrum_dense, sampled_spectrum};
use spinsim::spectrum::peak_table;
use spinsim::system::{offset_hz, Frame};

#[test]
fn ab_spectra_match_closed_form_for_all_regimes() {
    for &dv in &[5.0, 20.0, 100.0] {
        let j = 10.0;
        let sys = proton_system_at_offsets(&[dv / 2.0, -dv / 2.0], &[(0, 1, j)]);
        let frame = Frame::larmor(&sys);
        let oracle = merge_oracle_lines(ab_lines(dv / 2.0, -dv / 2.0, j));

        for sticks in [
            exact_spectrum(&sys, &frame, "1H").unwrap(),
            exact_spectrum_dense(&sys, &frame, "1H").unwrap(),
        ] {
            assert_eq!(sticks.lines.len(), oracle.len(), "Δν = {dv}");
            for (line, &(hz, amp)) in sticks.lines.iter().zip(&oracle) {
                assert!(
                    (line.hz - hz).abs() <= 1e-9 * (1.0 + hz.abs()),
                    "Δν = {dv}: {} vs {hz}",
                    line.hz
                );
                assert!(
                    (line.amp.re - amp).abs() <= 1e-9 * amp.abs(),
                    "Δν = {dv}: {} vs {amp}",
                    line.amp.re
                );
                assert!(line.amp.im.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn equivalent_spins_are_invisible() {
    // n identical shifts with arbitrary mutual J give exactly one line at
    // the common offset, of total amplitude n.
    let mut rng = ChaCha12Rng::seed_from_u64(42);
    for n in 2..=4usize {
        for _ in 0..3 {
            let shift = rng.random_range(0.5..2.5);
            let shifts = vec![shift; n];
            let mut couplings = Vec::new();
            for a in 0..n {
                for b in (a + 1)..n {
                    couplings.push((a, b, rng.random_range(-20.0..20.0)));
                }
            }
            let sys = proton_system(&shifts, &couplings);
            let frame = Frame::larmor(&sys);
            let sticks = exact_spectrum(&sys, &frame, "1H").unwrap();
            assert_eq!(sticks.lines.len(), 1, "n = {n}");
            let expect = offset_hz(&sys, 0, &frame).unwrap();
            assert!((sticks.lines[0].hz - expect).abs() < 1e-9);
            assert!((sticks.lines[0].amp.re - n as f64).abs() < 1e-9);

            // And the broadened spectrum has a single peak there.
            let (spec, _) = broadened_pair(&sticks, &sticks, 2.0);
            let peaks = peak_table(&spec, 0.01).unwrap();
            assert_eq!(peaks.len(), 1);
            assert!((peaks[0].hz - expect).abs() <= spec.grid.step_hz);
        }
    }
}

#[test]
fn relabeling_spins_preserves_the_spectrum() {
    let sys = proton_system(&[0.4, 1.3, 2.2], &[(0, 1, 11.0), (1, 2, 5.0), (0, 2, 2.0)]);
    // Swap spins 0 and 2 with a consistent J permutation.
    let swapped = proton_system(&[2.2, 1.3, 0.4], &[(2, 1, 11.0), (1, 0, 5.0), (2, 0, 2.0)]);
    let frame = Frame::larmor(&sys);

    let ha = build_hamiltonian(&sys, &frame).unwrap();
    let hb = build_hamiltonian(&swapped, &frame).unwrap();
    let ea = eigendecompose(&ha).unwrap();
    let eb = eigendecompose(&hb).unwrap();
    for (a, b) in ea.energies.iter().zip(&eb.energies) {
        assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
    }

    let sa = exact_spectrum(&sys, &frame, "1H").unwrap();
    let sb = exact_spectrum(&swapped, &frame, "1H").unwrap();
    assert_sticks_close(&sa, &sb, 1e-10);
}

#[test]
fn exhaustive_sampling_reproduces_the_trace_form_spectrum() {
    for seed in [3u64, 17, 91] {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let n = rng.random_range(2..=6);
        let sys = random_connected_system(seed ^ 0xabc, n);
        let frame = Frame::larmor(&sys);
        let exact = exact_spectrum(&sys, &frame, "1H").unwrap();
        let sampled = sampled_spectrum(&sys, &frame, "1H", SampleMode::Exhaustive, 0).unwrap();
        assert_eq!(sampled.lines.len(), exact.lines.len());
        for (a, b) in sampled.lines.iter().zip(&exact.lines) {
            assert!((a.hz - b.hz).abs() < 1e-8 * (1.0 + a.hz.abs()));
            assert!((a.amp - b.amp).norm() < 1e-10);
        }
    }
}

#[test]
fn monte_carlo_lands_within_five_standard_errors() {
    let sys = random_connected_system(7, 6);
    let frame = Frame::larmor(&sys);
    let h = build_hamiltonian(&sys, &frame).unwrap();
    let es = eigendecompose(&h).unwrap();
    let detect = collective_operator(&sys, Axis::X, None).unwrap();

    // Exhaustive reference values of the correlation at probe times.
    let exact = spinsim::evolve::sampled_expectation(&es, &detect, SampleMode::Exhaustive, 0)
        .unwrap();
    let times: Vec<f64> = (1..=5).map(|k| 2e-4 * k as f64).collect();
    let reference: Vec<Complex64> = times
        .iter()
        .map(|&t| {
            exact
                .lines
                .iter()
                .map(|l| l.amp * Complex64::from_polar(1.0, TAU * l.hz * t))
                .sum()
        })
        .collect();

    for seed in 0..6u64 {
        let est = sampled_correlation(&es, &detect, &times, 1000, seed).unwrap();
        for (e, r) in est.iter().zip(&reference) {
            assert!(
                (e.mean.re - r.re).abs() <= 5.0 * e.se_re.max(1e-12),
                "seed {seed}: re {} vs {} (se {})",
                e.mean.re,
                r.re,
                e.se_re
            );
            assert!(
                (e.mean.im - r.im).abs() <= 5.0 * e.se_im.max(1e-12),
                "seed {seed}: im {} vs {} (se {})",
                e.mean.im,
                r.im,
                e.se_im
            );
        }
    }
}

#[test]
fn ab_spectrum_is_fast() {
    let t0 = std::time::Instant::now();
    let sys = proton_system_at_offsets(&[10.0, -10.0], &[(0, 1, 10.0)]);
    let frame = Frame::larmor(&sys);
    let _ = exact_spectrum(&sys, &frame, "1H").unwrap();
    assert!(t0.elapsed().as_secs_f64() < 1.0);
}
