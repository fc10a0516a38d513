//! Clustering approximation: partition the coupling graph into overlapping
//! local clusters, solve each exactly, and keep only the detection
//! contributions of each cluster's home spins.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolve::StickSpectrum;
use crate::operators::{SiteSystem, MAX_DENSE_DIM};
use crate::solver::{per_spin_norm, site_spectrum};
use crate::spectrum::Spectrum;
use crate::system::{offset_hz, Frame, SpinSystem};

/// Weighted coupling graph: edge weight |J| relative to the rotating-frame
/// offset difference, which tracks the error of treating the pair as
/// uncorrelated.
#[derive(Debug, Clone)]
pub struct CouplingGraph {
    pub n: usize,
    pub edges: Vec<GraphEdge>,
}

#[derive(Debug, Clone, Copy)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Build the coupling graph in the canonical Larmor frame.
pub fn coupling_graph(system: &SpinSystem) -> Result<CouplingGraph> {
    let frame = Frame::larmor(system);
    let n = system.n_spins();
    let offsets: Vec<f64> = (0..n)
        .map(|k| offset_hz(system, k, &frame))
        .collect::<Result<_>>()?;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let j = system.j(a, b);
            if j != 0.0 {
                let dv = (offsets[a] - offsets[b]).abs();
                edges.push(GraphEdge {
                    a,
                    b,
                    weight: j.abs() / dv.max(1.0),
                });
            }
        }
    }
    Ok(CouplingGraph { n, edges })
}

/// Assignment of spins to overlapping clusters. Every spin has exactly one
/// home cluster; identical member sets are stored once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    /// Sorted member lists, deduplicated.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster index that each spin calls home.
    pub home_of: Vec<usize>,
}

impl ClusterPartition {
    pub fn home_spins(&self, cluster: usize) -> Vec<usize> {
        (0..self.home_of.len())
            .filter(|&k| self.home_of[k] == cluster)
            .collect()
    }

    pub fn max_cluster_size(&self) -> usize {
        self.clusters.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Grow each spin's home cluster greedily: at every step add the outside
/// spin with the strongest edge into the cluster, preferring (on ties) the
/// stronger direct coupling to the home spin and then the lower index.
/// Growth stops at `max_cluster_size` or when the best edge weight drops
/// below `weight_threshold`.
pub fn build_partition(
    system: &SpinSystem,
    max_cluster_size: usize,
    weight_threshold: f64,
) -> Result<ClusterPartition> {
    if max_cluster_size < 1 {
        return Err(Error::InvalidInput(
            "max_cluster_size must be at least 1".into(),
        ));
    }
    let graph = coupling_graph(system)?;
    let n = graph.n;
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in &graph.edges {
        adjacency[e.a].push((e.b, e.weight));
        adjacency[e.b].push((e.a, e.weight));
    }

    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut home_of = vec![usize::MAX; n];
    for home in 0..n {
        let mut members = vec![home];
        let direct = |c: usize| -> f64 {
            adjacency[home]
                .iter()
                .find(|&&(nb, _)| nb == c)
                .map(|&(_, w)| w)
                .unwrap_or(0.0)
        };
        while members.len() < max_cluster_size {
            let mut best: Option<(usize, f64, f64)> = None; // (spin, weight_in, direct)
            for &m in &members {
                for &(nb, w) in &adjacency[m] {
                    if members.contains(&nb) {
                        continue;
                    }
                    let cand = (nb, w, direct(nb));
                    best = Some(match best {
                        None => cand,
                        Some(cur) => {
                            let better = cand
                                .1
                                .total_cmp(&cur.1)
                                .then(cand.2.total_cmp(&cur.2))
                                .then(cur.0.cmp(&cand.0));
                            if better == std::cmp::Ordering::Greater {
                                cand
                            } else {
                                cur
                            }
                        }
                    });
                }
            }
            // Distinct spins can reach the same weight through different
            // edges; recompute the best weight per candidate spin is not
            // needed since `best` already maximizes over incoming edges.
            match best {
                Some((spin, weight, _)) if weight >= weight_threshold && weight > 0.0 => {
                    members.push(spin);
                }
                _ => break,
            }
        }
        members.sort_unstable();
        let id = match clusters.iter().position(|c| c == &members) {
            Some(id) => id,
            None => {
                clusters.push(members);
                clusters.len() - 1
            }
        };
        home_of[home] = id;
    }
    Ok(ClusterPartition { clusters, home_of })
}

/// Solve every cluster exactly and concatenate the home-spin detection
/// contributions. A single all-spin cluster reproduces the exact spectrum.
pub fn simulate_clusters(
    system: &SpinSystem,
    partition: &ClusterPartition,
    frame: &Frame,
    detect_isotope: &str,
) -> Result<StickSpectrum> {
    let results: Vec<Result<StickSpectrum>> = partition
        .clusters
        .par_iter()
        .enumerate()
        .map(|(id, members)| {
            let home: Vec<usize> = partition
                .home_spins(id)
                .into_iter()
                .filter(|&k| system.isotope(k).symbol == detect_isotope)
                .collect();
            if home.is_empty() {
                return Ok(StickSpectrum::empty());
            }
            let sub = system.restrict(members)?;
            let sites = SiteSystem::from_spin_system(&sub, frame)?;
            let dim = sites.dim();
            if dim > MAX_DENSE_DIM {
                return Err(Error::ClusterTooLarge {
                    cluster: members.clone(),
                    size: members.len(),
                    max: MAX_DENSE_DIM.trailing_zeros() as usize,
                });
            }
            let detect_positions: Vec<usize> = members
                .iter()
                .enumerate()
                .filter(|(_, k)| home.contains(k))
                .map(|(pos, _)| pos)
                .collect();
            site_spectrum(&sites, &detect_positions, per_spin_norm(dim))
        })
        .collect();

    let mut total = StickSpectrum::empty();
    for r in results {
        total.lines.extend(r?.lines);
    }
    total.normalize_lines();
    if total.lines.is_empty() {
        return Err(Error::NoDetectableLines(detect_isotope.to_string()));
    }
    Ok(total.with_isotope(detect_isotope))
}

/// Normalized L1 distance between two unit-area spectra, in [0, 2].
pub fn spectrum_distance(a: &Spectrum, b: &Spectrum) -> Result<f64> {
    if !a.grid.matches(&b.grid) {
        return Err(Error::GridMismatch);
    }
    let ia = a.integral();
    let ib = b.integral();
    if !(ia > 0.0) || !(ib > 0.0) {
        return Err(Error::InvalidInput(
            "spectrum distance needs positive-area spectra".into(),
        ));
    }
    let n = a.intensity.len();
    let diff: Vec<f64> = (0..n)
        .map(|k| (a.intensity[k] / ia - b.intensity[k] / ib).abs())
        .collect();
    let inner: f64 = diff[1..n - 1].iter().sum();
    Ok((inner + 0.5 * (diff[0] + diff[n - 1])) * a.grid.step_hz)
}
