//! Composite-spin reduction for groups of magnetically equivalent spins.
//!
//! A group of n equivalent spin-1/2 nuclei decomposes into total-spin
//! multiplets; each sector assignment across groups yields an independent
//! block with one composite spin-j site per group. Intra-group couplings
//! commute with everything the rest of the Hamiltonian sees and are
//! spectrally silent, so they are dropped before block construction. Block
//! stick spectra enter the total weighted by their multiplicity products.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::StickSpectrum;
use crate::operators::{CouplingKind, Site, SiteCoupling, SiteSystem, MAX_DENSE_DIM};
use crate::solver::site_spectrum;
use crate::system::{offset_hz, Frame, SpinSystem};

/// Largest equivalence-group size for multiplicity bookkeeping in u64.
pub const MAX_GROUP_SIZE: usize = 60;

/// Total-spin content of (1/2)^⊗n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultipletDecomposition {
    pub group_size: usize,
    /// (2j, multiplicity) with 2j descending.
    pub sectors: Vec<(u32, u64)>,
}

impl MultipletDecomposition {
    /// Σ multiplicity·(2j+1); equals 2^n.
    pub fn total_dimension(&self) -> u64 {
        self.sectors
            .iter()
            .map(|&(two_j, m)| m * (two_j as u64 + 1))
            .sum()
    }
}

/// Multiplicities of total spin j in n coupled spin-1/2 particles, by the
/// recursion m(n, j) = m(n−1, j−1/2) + m(n−1, j+1/2).
pub fn decompose_group(n: usize) -> Result<MultipletDecomposition> {
    if n == 0 {
        return Err(Error::InvalidInput("group size must be at least 1".into()));
    }
    if n > MAX_GROUP_SIZE {
        return Err(Error::InvalidInput(format!(
            "group size {n} exceeds the supported maximum {MAX_GROUP_SIZE}"
        )));
    }
    // counts[two_j] after coupling k spins.
    let mut counts = vec![0u64; n + 2];
    counts[1] = 1;
    for _ in 1..n {
        let mut next = vec![0u64; n + 2];
        for two_j in 0..=n {
            let c = counts[two_j];
            if c == 0 {
                continue;
            }
            next[two_j + 1] += c;
            if two_j >= 1 {
                next[two_j - 1] += c;
            }
        }
        counts = next;
    }
    let sectors: Vec<(u32, u64)> = (0..=n)
        .rev()
        .filter(|&tj| counts[tj] > 0)
        .map(|tj| (tj as u32, counts[tj]))
        .collect();
    Ok(MultipletDecomposition {
        group_size: n,
        sectors,
    })
}

/// A set of spins sharing isotope, shift, and couplings to every external
/// spin. Couplings inside the group are irrelevant for the spectrum.
#[derive(Debug, Clone)]
pub struct EquivalenceGroup {
    pub members: Vec<usize>,
    pub common_shift_ppm: f64,
    pub isotope: String,
}

fn group_is_equivalent(
    system: &SpinSystem,
    members: &[usize],
    tol_ppm: f64,
    tol_hz: f64,
) -> Result<()> {
    let first = members[0];
    let iso = &system.isotope(first).symbol;
    for &k in members {
        if &system.isotope(k).symbol != iso {
            return Err(Error::InvalidEquivalenceGroup(format!(
                "spins {first} and {k} have different isotopes"
            )));
        }
        if (system.shift_ppm(k) - system.shift_ppm(first)).abs() > tol_ppm {
            return Err(Error::InvalidEquivalenceGroup(format!(
                "spins {first} and {k} differ in shift beyond tolerance"
            )));
        }
    }
    for external in 0..system.n_spins() {
        if members.contains(&external) {
            continue;
        }
        for &k in members {
            if (system.j(k, external) - system.j(first, external)).abs() > tol_hz {
                return Err(Error::InvalidEquivalenceGroup(format!(
                    "spins {first} and {k} couple differently to spin {external}"
                )));
            }
        }
    }
    Ok(())
}

/// Find maximal equivalence groups within the given shift and coupling
/// tolerances. Deterministic; singleton groups are returned for spins with
/// no equivalent partner.
pub fn detect_equivalence_groups(
    system: &SpinSystem,
    tol_ppm: f64,
    tol_hz: f64,
) -> Vec<EquivalenceGroup> {
    let n = system.n_spins();
    // Seed groups: same isotope, shifts chained within tolerance.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        system
            .isotope(a)
            .symbol
            .cmp(&system.isotope(b).symbol)
            .then(system.shift_ppm(a).total_cmp(&system.shift_ppm(b)))
            .then(a.cmp(&b))
    });
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &k in &order {
        match groups.last_mut() {
            Some(g)
                if system.isotope(*g.last().unwrap()).symbol == system.isotope(k).symbol
                    && (system.shift_ppm(k) - system.shift_ppm(*g.last().unwrap())).abs()
                        <= tol_ppm =>
            {
                g.push(k);
            }
            _ => groups.push(vec![k]),
        }
    }

    // Refine by external-coupling signature until stable. A split turns
    // former group mates into external spins, so iterate.
    loop {
        let mut changed = false;
        let mut next: Vec<Vec<usize>> = Vec::new();
        for g in &groups {
            let mut classes: Vec<Vec<usize>> = Vec::new();
            for &k in g {
                let mut placed = false;
                for class in &mut classes {
                    let rep = class[0];
                    let same = (0..n)
                        .filter(|e| !g.contains(e))
                        .all(|e| (system.j(k, e) - system.j(rep, e)).abs() <= tol_hz);
                    if same {
                        class.push(k);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    classes.push(vec![k]);
                }
            }
            if classes.len() > 1 {
                changed = true;
            }
            next.extend(classes);
        }
        groups = next;
        if !changed {
            break;
        }
    }

    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| g[0]);
    groups
        .into_iter()
        .map(|members| {
            let mean =
                members.iter().map(|&k| system.shift_ppm(k)).sum::<f64>() / members.len() as f64;
            EquivalenceGroup {
                isotope: system.isotope(members[0]).symbol.clone(),
                common_shift_ppm: mean,
                members,
            }
        })
        .collect()
}

/// Validate declared groups against the equivalence invariants.
pub fn validate_groups(system: &SpinSystem, declared: &[Vec<usize>]) -> Result<Vec<EquivalenceGroup>> {
    let n = system.n_spins();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for members in declared {
        if members.is_empty() {
            return Err(Error::InvalidEquivalenceGroup("empty group".into()));
        }
        let mut members = members.clone();
        members.sort_unstable();
        members.dedup();
        for &k in &members {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, n });
            }
            if seen[k] {
                return Err(Error::InvalidEquivalenceGroup(format!(
                    "spin {k} appears in more than one group"
                )));
            }
            seen[k] = true;
        }
        group_is_equivalent(system, &members, 1e-9, 1e-9)?;
        out.push(EquivalenceGroup {
            isotope: system.isotope(members[0]).symbol.clone(),
            common_shift_ppm: system.shift_ppm(members[0]),
            members,
        });
    }
    Ok(out)
}

/// Result of the symmetry-reduced solve, with block-size diagnostics.
#[derive(Debug, Clone)]
pub struct SymmetricSolution {
    pub sticks: StickSpectrum,
    /// Number of sector-assignment blocks solved.
    pub n_blocks: usize,
    /// Largest sector block dimension (the independent problem size).
    pub max_block_dim: usize,
    /// Largest matrix actually diagonalized after magnetization blocking.
    pub max_eigen_dim: usize,
}

/// Solve the system exactly by composite-spin sectors. `groups` may cover a
/// subset of spins; uncovered spins are carried as free spin-1/2 sites.
pub fn simulate_symmetric(
    system: &SpinSystem,
    groups: &[EquivalenceGroup],
    frame: &Frame,
    detect_isotope: &str,
) -> Result<SymmetricSolution> {
    let n = system.n_spins();
    let mut covered = vec![false; n];
    let mut all_groups: Vec<Vec<usize>> = Vec::new();
    for g in groups {
        for &k in &g.members {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, n });
            }
            if covered[k] {
                return Err(Error::InvalidEquivalenceGroup(format!(
                    "spin {k} appears in more than one group"
                )));
            }
            covered[k] = true;
        }
        group_is_equivalent(system, &g.members, 1e-6, 1e-6)?;
        all_groups.push(g.members.clone());
    }
    for k in 0..n {
        if !covered[k] {
            all_groups.push(vec![k]);
        }
    }

    // Inter-group couplings must be uniform over member pairs; equivalence
    // of each group separately guarantees it, checked here once more.
    let g_count = all_groups.len();
    let mut j_between = vec![vec![0.0f64; g_count]; g_count];
    for a in 0..g_count {
        for b in (a + 1)..g_count {
            let j0 = system.j(all_groups[a][0], all_groups[b][0]);
            for &ka in &all_groups[a] {
                for &kb in &all_groups[b] {
                    if (system.j(ka, kb) - j0).abs() > 1e-6 {
                        return Err(Error::InvalidEquivalenceGroup(format!(
                            "coupling between groups {a} and {b} is not uniform"
                        )));
                    }
                }
            }
            j_between[a][b] = j0;
        }
    }

    let offsets: Vec<f64> = all_groups
        .iter()
        .map(|g| offset_hz(system, g[0], frame))
        .collect::<Result<_>>()?;
    let isotopes: Vec<String> = all_groups
        .iter()
        .map(|g| system.isotope(g[0]).symbol.clone())
        .collect();
    let decompositions: Vec<MultipletDecomposition> = all_groups
        .iter()
        .map(|g| decompose_group(g.len()))
        .collect::<Result<_>>()?;

    let detect_groups: Vec<usize> = (0..g_count)
        .filter(|&g| isotopes[g] == detect_isotope)
        .collect();
    if detect_groups.is_empty() {
        return Err(Error::NoDetectableLines(detect_isotope.to_string()));
    }

    // Cartesian product of sector choices across groups.
    let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
    for d in &decompositions {
        let mut next = Vec::with_capacity(combos.len() * d.sectors.len());
        for combo in &combos {
            for s in 0..d.sectors.len() {
                let mut c = combo.clone();
                c.push(s);
                next.push(c);
            }
        }
        combos = next;
    }

    let norm_base = 4.0 / 2f64.powi(n as i32);
    let blocks: Vec<Result<(StickSpectrum, usize, usize)>> = combos
        .par_iter()
        .map(|combo| {
            let mut weight = 1.0f64;
            let mut sites = Vec::with_capacity(g_count);
            for (g, &sector) in combo.iter().enumerate() {
                let (two_j, mult) = decompositions[g].sectors[sector];
                weight *= mult as f64;
                sites.push(Site {
                    two_j,
                    offset_hz: offsets[g],
                    isotope: isotopes[g].clone(),
                });
            }
            let mut couplings = Vec::new();
            for a in 0..g_count {
                for b in (a + 1)..g_count {
                    let hz = j_between[a][b];
                    if hz != 0.0 {
                        couplings.push(SiteCoupling {
                            a,
                            b,
                            hz,
                            kind: if isotopes[a] == isotopes[b] {
                                CouplingKind::Full
                            } else {
                                CouplingKind::Secular
                            },
                        });
                    }
                }
            }
            let block = SiteSystem { sites, couplings };
            let dim = block.dim();
            if dim > MAX_DENSE_DIM {
                return Err(Error::CapacityExceeded {
                    dim,
                    max: MAX_DENSE_DIM,
                });
            }
            let eigen_dim = block.m_sectors().iter().map(Vec::len).max().unwrap_or(0);
            let sticks = site_spectrum(&block, &detect_groups, norm_base * weight)?;
            Ok((sticks, dim, eigen_dim))
        })
        .collect();

    let mut total = StickSpectrum::empty();
    let mut max_block_dim = 0;
    let mut max_eigen_dim = 0;
    for b in blocks {
        let (sticks, dim, eigen_dim) = b?;
        total.lines.extend(sticks.lines);
        max_block_dim = max_block_dim.max(dim);
        max_eigen_dim = max_eigen_dim.max(eigen_dim);
    }
    total.normalize_lines();
    Ok(SymmetricSolution {
        sticks: total.with_isotope(detect_isotope),
        n_blocks: combos.len(),
        max_block_dim,
        max_eigen_dim,
    })
}
