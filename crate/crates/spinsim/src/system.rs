//! Spin-system data model: isotopes, chemical shifts and the J-coupling matrix.
//!
//! The input file format is JSON:
//!
//! ```text
//! {
//!   "field_tesla": 9.4,
//!   "spins": [{"isotope": "1H", "shift_ppm": 1.0}, ...],
//!   "j_couplings": [{"i": 0, "j": 1, "hz": 10.0}, ...],
//!   "equivalence_groups": [[0, 1, 2], [3, 4]]   // optional
//! }
//! ```
//!
//! Pairs absent from `j_couplings` default to J = 0.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A spin-1/2 nucleus species.
#[derive(Debug, Clone, PartialEq)]
pub struct Isotope {
    pub symbol: String,
    /// Gyromagnetic ratio in rad s⁻¹ T⁻¹.
    pub gamma: f64,
    /// Nuclear spin quantum number. Only 1/2 is supported.
    pub spin: f64,
}

/// Spin-1/2 isotopes known to the simulator, with vacuum gyromagnetic ratios.
const ISOTOPE_TABLE: &[(&str, f64)] = &[
    ("1H", 2.675_221_874_4e8),
    ("13C", 6.728_284e7),
    ("15N", -2.712_618_04e7),
    ("19F", 2.518_148e8),
    ("29Si", -5.319_0e7),
    ("31P", 1.083_94e8),
    ("3He", -2.037_894_585e8),
    ("119Sn", -1.007_7e8),
];

impl Isotope {
    /// Look up a spin-1/2 isotope by symbol, e.g. `"1H"` or `"31P"`.
    pub fn lookup(symbol: &str) -> Result<Isotope> {
        ISOTOPE_TABLE
            .iter()
            .find(|(s, _)| *s == symbol)
            .map(|(s, gamma)| Isotope {
                symbol: (*s).to_string(),
                gamma: *gamma,
                spin: 0.5,
            })
            .ok_or_else(|| Error::UnknownIsotope(symbol.to_string()))
    }

    /// Custom isotope. Rejects anything that is not spin-1/2 or has γ = 0.
    pub fn new(symbol: &str, gamma: f64, spin: f64) -> Result<Isotope> {
        if spin != 0.5 {
            return Err(Error::InvalidInput(format!(
                "isotope `{symbol}`: only spin 1/2 is supported, got {spin}"
            )));
        }
        if gamma == 0.0 {
            return Err(Error::InvalidInput(format!(
                "isotope `{symbol}`: gyromagnetic ratio must be nonzero"
            )));
        }
        Ok(Isotope {
            symbol: symbol.to_string(),
            gamma,
            spin,
        })
    }
}

/// One nucleus in the system.
#[derive(Debug, Clone)]
pub struct SpinSite {
    pub isotope: Isotope,
    pub shift_ppm: f64,
}

/// An immutable description of a liquid-state spin system: the full problem
/// definition consumed by every solver.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    field_tesla: f64,
    spins: Vec<SpinSite>,
    /// Symmetric N×N coupling matrix in Hz with zero diagonal.
    j: DMatrix<f64>,
    /// Equivalence groups declared in the input file, if any.
    declared_groups: Option<Vec<Vec<usize>>>,
}

impl SpinSystem {
    /// Build a system from explicit parts, validating all invariants.
    pub fn new(
        field_tesla: f64,
        spins: Vec<(Isotope, f64)>,
        couplings: &[(usize, usize, f64)],
    ) -> Result<SpinSystem> {
        if spins.is_empty() {
            return Err(Error::EmptySystem);
        }
        if field_tesla <= 0.0 {
            return Err(Error::NonPositiveField(field_tesla));
        }
        let n = spins.len();
        let mut j = DMatrix::<f64>::zeros(n, n);
        let mut seen: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, k, hz) in couplings {
            for idx in [i, k] {
                if idx >= n {
                    return Err(Error::IndexOutOfRange { index: idx, n });
                }
            }
            if i == k {
                return Err(Error::SelfCoupling(i));
            }
            let key = (i.min(k), i.max(k));
            if let Some(&prev) = seen.get(&key) {
                if prev != hz {
                    return Err(Error::AsymmetricCoupling {
                        i: key.0,
                        j: key.1,
                        a: prev,
                        b: hz,
                    });
                }
            }
            seen.insert(key, hz);
            j[(key.0, key.1)] = hz;
            j[(key.1, key.0)] = hz;
        }
        Ok(SpinSystem {
            field_tesla,
            spins: spins
                .into_iter()
                .map(|(isotope, shift_ppm)| SpinSite { isotope, shift_ppm })
                .collect(),
            j,
            declared_groups: None,
        })
    }

    pub fn with_declared_groups(mut self, groups: Vec<Vec<usize>>) -> Result<SpinSystem> {
        let n = self.n_spins();
        let mut seen = vec![false; n];
        for group in &groups {
            for &k in group {
                if k >= n {
                    return Err(Error::IndexOutOfRange { index: k, n });
                }
                if seen[k] {
                    return Err(Error::InvalidEquivalenceGroup(format!(
                        "spin {k} appears in more than one declared group"
                    )));
                }
                seen[k] = true;
            }
        }
        self.declared_groups = Some(groups);
        Ok(self)
    }

    pub fn n_spins(&self) -> usize {
        self.spins.len()
    }

    pub fn field_tesla(&self) -> f64 {
        self.field_tesla
    }

    pub fn isotope(&self, k: usize) -> &Isotope {
        &self.spins[k].isotope
    }

    pub fn shift_ppm(&self, k: usize) -> f64 {
        self.spins[k].shift_ppm
    }

    pub fn j(&self, k: usize, l: usize) -> f64 {
        self.j[(k, l)]
    }

    pub fn j_matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn declared_groups(&self) -> Option<&[Vec<usize>]> {
        self.declared_groups.as_deref()
    }

    /// Distinct isotope symbols present, in order of first appearance.
    pub fn isotopes_present(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for s in &self.spins {
            if !out.contains(&s.isotope.symbol) {
                out.push(s.isotope.symbol.clone());
            }
        }
        out
    }

    /// Shielded Larmor frequency γB(1 + δ·10⁻⁶)/2π of spin `k`, in Hz.
    pub fn larmor_hz(&self, k: usize) -> f64 {
        let site = &self.spins[k];
        site.isotope.gamma * self.field_tesla * (1.0 + site.shift_ppm * 1e-6)
            / std::f64::consts::TAU
    }

    /// Bare Larmor frequency γB/2π of an isotope in this field, in Hz.
    pub fn bare_larmor_hz(&self, isotope: &Isotope) -> f64 {
        isotope.gamma * self.field_tesla / std::f64::consts::TAU
    }

    /// Restrict the system to a subset of spins, keeping shifts and the
    /// couplings internal to the subset. Indices refer to `members` order.
    pub fn restrict(&self, members: &[usize]) -> Result<SpinSystem> {
        let n = self.n_spins();
        for &k in members {
            if k >= n {
                return Err(Error::IndexOutOfRange { index: k, n });
            }
        }
        let spins = members
            .iter()
            .map(|&k| (self.spins[k].isotope.clone(), self.spins[k].shift_ppm))
            .collect();
        let mut couplings = Vec::new();
        for (a, &ka) in members.iter().enumerate() {
            for (b, &kb) in members.iter().enumerate().skip(a + 1) {
                let hz = self.j[(ka, kb)];
                if hz != 0.0 {
                    couplings.push((a, b, hz));
                }
            }
        }
        SpinSystem::new(self.field_tesla, spins, &couplings)
    }

    pub fn from_json_str(text: &str) -> Result<SpinSystem> {
        let file: SystemFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("spin-system JSON: {e}")))?;
        file.into_system()
    }

    pub fn to_json_string(&self) -> String {
        let file = SystemFile {
            field_tesla: self.field_tesla,
            spins: self
                .spins
                .iter()
                .map(|s| SpinEntry {
                    isotope: s.isotope.symbol.clone(),
                    shift_ppm: s.shift_ppm,
                })
                .collect(),
            j_couplings: {
                let n = self.n_spins();
                let mut out = Vec::new();
                for i in 0..n {
                    for j in (i + 1)..n {
                        if self.j[(i, j)] != 0.0 {
                            out.push(CouplingEntry {
                                i,
                                j,
                                hz: self.j[(i, j)],
                            });
                        }
                    }
                }
                out
            },
            equivalence_groups: self.declared_groups.clone(),
        };
        serde_json::to_string_pretty(&file).expect("system serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct SpinEntry {
    isotope: String,
    shift_ppm: f64,
}

#[derive(Serialize, Deserialize)]
struct CouplingEntry {
    i: usize,
    j: usize,
    hz: f64,
}

#[derive(Serialize, Deserialize)]
struct SystemFile {
    field_tesla: f64,
    spins: Vec<SpinEntry>,
    #[serde(default)]
    j_couplings: Vec<CouplingEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    equivalence_groups: Option<Vec<Vec<usize>>>,
}

impl SystemFile {
    fn into_system(self) -> Result<SpinSystem> {
        let spins = self
            .spins
            .iter()
            .map(|e| Ok((Isotope::lookup(&e.isotope)?, e.shift_ppm)))
            .collect::<Result<Vec<_>>>()?;
        let couplings: Vec<(usize, usize, f64)> =
            self.j_couplings.iter().map(|c| (c.i, c.j, c.hz)).collect();
        let system = SpinSystem::new(self.field_tesla, spins, &couplings)?;
        match self.equivalence_groups {
            Some(groups) => system.with_declared_groups(groups),
            None => Ok(system),
        }
    }
}

/// Per-isotope rotating-frame reference frequencies in Hz.
#[derive(Debug, Clone, Default)]
pub struct Frame {
    refs: BTreeMap<String, f64>,
}

impl Frame {
    /// The canonical frame: every isotope rotates at its bare Larmor
    /// frequency γB/2π, so offsets are at the ppm scale.
    pub fn larmor(system: &SpinSystem) -> Frame {
        let mut refs = BTreeMap::new();
        for k in 0..system.n_spins() {
            let iso = system.isotope(k);
            refs.entry(iso.symbol.clone())
                .or_insert_with(|| system.bare_larmor_hz(iso));
        }
        Frame { refs }
    }

    pub fn with_reference(mut self, isotope: &str, hz: f64) -> Frame {
        self.refs.insert(isotope.to_string(), hz);
        self
    }

    pub fn reference_hz(&self, isotope: &str) -> Result<f64> {
        self.refs
            .get(isotope)
            .copied()
            .ok_or_else(|| Error::MissingFrameReference(isotope.to_string()))
    }
}

/// Rotating-frame offset Ω_k = −(γ_k B (1 + δ_k·10⁻⁶)/2π − ν_ref), in Hz.
///
/// Evaluated in the factored form −γBδ_k·10⁻⁶/2π − (γB/2π − ν_ref): the
/// naive difference of two ~10⁸ Hz Larmor frequencies would leave only
/// ~10⁻⁸ Hz of precision in a ppm-scale offset.
pub fn offset_hz(system: &SpinSystem, k: usize, frame: &Frame) -> Result<f64> {
    let isotope = system.isotope(k);
    let reference = frame.reference_hz(&isotope.symbol)?;
    let bare = system.bare_larmor_hz(isotope);
    Ok(-bare * system.shift_ppm(k) * 1e-6 - (bare - reference))
}
