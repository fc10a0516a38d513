//! Electron-integral input: an FCIDUMP-style text format extended with an
//! occupation list for the environment orbitals.
//!
//! ```text
//! &FCI NORB=4,NELEC=2,MS2=0,
//!   OCC=1,0,
//! &END
//!   0.2500000000    1 1 1 1
//!  -1.0000000000    1 1 0 0
//!  -0.1234500000    0 0 0 0
//! ```
//!
//! Rows are `value p q r s` with 1-based orbital indices: four nonzero
//! indices give the two-electron integral (pq|rs) in chemist convention,
//! `r = s = 0` gives the one-electron element t_pq, and all-zero indices
//! give a constant energy. Orbitals 1 and 2 are the active pair; `OCC`
//! lists one 0/1 entry per environment orbital 3..NORB (1 = doubly
//! occupied). Symmetry-equivalent duplicates are averaged and must agree
//! within 1e−8.

use nalgebra::DMatrix;

use crate::error::{Result, RpaError};

/// Tolerance on permutation-symmetry deviations between duplicate entries.
pub const SYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occupation {
    Empty,
    Occupied,
}

/// One- and two-electron integral tensors plus the environment occupation
/// pattern. Orbital indices are 0-based internally; the active pair is
/// orbitals 0 and 1.
#[derive(Debug, Clone)]
pub struct IntegralSet {
    n_orbitals: usize,
    core_energy: f64,
    t: DMatrix<f64>,
    /// Two-electron integrals, 8-fold-symmetric canonical storage.
    h: Vec<f64>,
    /// Occupations of orbitals 2..n.
    occupations: Vec<Occupation>,
}

fn pair_index(a: usize, b: usize) -> usize {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi * (hi + 1) / 2 + lo
}

fn canonical_index(p: usize, q: usize, r: usize, s: usize) -> usize {
    pair_index(pair_index(p, q), pair_index(r, s))
}

impl IntegralSet {
    /// Assemble from explicit parts; `two_electron` entries are (p,q,r,s,
    /// value) in chemist convention, 0-based, any index order.
    pub fn new(
        n_orbitals: usize,
        core_energy: f64,
        one_electron: &[(usize, usize, f64)],
        two_electron: &[(usize, usize, usize, usize, f64)],
        occupations: Vec<Occupation>,
    ) -> Result<IntegralSet> {
        if n_orbitals < 2 {
            return Err(RpaError::TooFewOrbitals(n_orbitals));
        }
        if occupations.len() != n_orbitals - 2 {
            return Err(RpaError::MissingOccupations(n_orbitals - 2));
        }
        let mut set = IntegralSet {
            n_orbitals,
            core_energy,
            t: DMatrix::zeros(n_orbitals, n_orbitals),
            h: vec![0.0; pair_index(pair_index(n_orbitals - 1, n_orbitals - 1), pair_index(n_orbitals - 1, n_orbitals - 1)) + 1],
            occupations,
        };
        let mut t_seen = vec![false; n_orbitals * n_orbitals];
        for &(p, q, v) in one_electron {
            set.check_orbital(p)?;
            set.check_orbital(q)?;
            let key = p.min(q) * n_orbitals + p.max(q);
            if t_seen[key] {
                let prev = set.t[(p, q)];
                if (prev - v).abs() > SYMMETRY_TOL {
                    return Err(RpaError::SymmetryViolation {
                        p: p + 1,
                        q: q + 1,
                        r: 0,
                        s: 0,
                        deviation: (prev - v).abs(),
                    });
                }
                let mean = 0.5 * (prev + v);
                set.t[(p, q)] = mean;
                set.t[(q, p)] = mean;
            } else {
                set.t[(p, q)] = v;
                set.t[(q, p)] = v;
                t_seen[key] = true;
            }
        }
        let mut h_seen = vec![false; set.h.len()];
        for &(p, q, r, s, v) in two_electron {
            for idx in [p, q, r, s] {
                set.check_orbital(idx)?;
            }
            let key = canonical_index(p, q, r, s);
            if h_seen[key] {
                let prev = set.h[key];
                if (prev - v).abs() > SYMMETRY_TOL {
                    return Err(RpaError::SymmetryViolation {
                        p: p + 1,
                        q: q + 1,
                        r: r + 1,
                        s: s + 1,
                        deviation: (prev - v).abs(),
                    });
                }
                set.h[key] = 0.5 * (prev + v);
            } else {
                set.h[key] = v;
                h_seen[key] = true;
            }
        }
        Ok(set)
    }

    fn check_orbital(&self, p: usize) -> Result<()> {
        if p >= self.n_orbitals {
            return Err(RpaError::OrbitalOutOfRange(p + 1, self.n_orbitals));
        }
        Ok(())
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn core_energy(&self) -> f64 {
        self.core_energy
    }

    /// One-electron element t_pq (0-based).
    pub fn t(&self, p: usize, q: usize) -> f64 {
        self.t[(p, q)]
    }

    pub fn t_matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    /// Two-electron integral (pq|rs) in chemist convention (0-based).
    pub fn h(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.h[canonical_index(p, q, r, s)]
    }

    /// Occupation n_q ∈ {0, 1} of an environment orbital (0-based, q ≥ 2).
    pub fn occupation(&self, q: usize) -> f64 {
        match self.occupations[q - 2] {
            Occupation::Occupied => 1.0,
            Occupation::Empty => 0.0,
        }
    }

    /// Environment orbital indices (0-based) that are doubly occupied.
    pub fn occupied_env(&self) -> Vec<usize> {
        (2..self.n_orbitals)
            .filter(|&q| self.occupations[q - 2] == Occupation::Occupied)
            .collect()
    }

    /// Environment orbital indices (0-based) that are empty.
    pub fn empty_env(&self) -> Vec<usize> {
        (2..self.n_orbitals)
            .filter(|&q| self.occupations[q - 2] == Occupation::Empty)
            .collect()
    }

    pub fn from_str(text: &str) -> Result<IntegralSet> {
        parse_integrals(text)
    }

    /// Serialize in the extended FCIDUMP form (canonical entries only).
    pub fn to_fcidump_string(&self) -> String {
        let n = self.n_orbitals;
        let occ: Vec<String> = self
            .occupations
            .iter()
            .map(|o| match o {
                Occupation::Occupied => "1".to_string(),
                Occupation::Empty => "0".to_string(),
            })
            .collect();
        let mut out = format!("&FCI NORB={n},NELEC=2,MS2=0,\n");
        if !occ.is_empty() {
            out.push_str(&format!("  OCC={},\n", occ.join(",")));
        }
        out.push_str("&END\n");
        for p in 0..n {
            for q in 0..=p {
                for r in 0..=p {
                    for s in 0..=(if r == p { q } else { r }) {
                        let v = self.h(p, q, r, s);
                        if v != 0.0 {
                            out.push_str(&format!(
                                " {:.16e}  {} {} {} {}\n",
                                v,
                                p + 1,
                                q + 1,
                                r + 1,
                                s + 1
                            ));
                        }
                    }
                }
            }
        }
        for p in 0..n {
            for q in 0..=p {
                let v = self.t(p, q);
                if v != 0.0 {
                    out.push_str(&format!(" {:.16e}  {} {} 0 0\n", v, p + 1, q + 1));
                }
            }
        }
        if self.core_energy != 0.0 {
            out.push_str(&format!(" {:.16e}  0 0 0 0\n", self.core_energy));
        }
        out
    }
}

/// Parse the extended FCIDUMP text format.
pub fn parse_integrals(text: &str) -> Result<IntegralSet> {
    let mut norb: Option<i64> = None;
    let mut occ: Option<Vec<Occupation>> = None;
    let mut lines = text.lines();

    // Header: a namelist from &FCI to &END (or /).
    let mut header = String::new();
    let mut found_end = false;
    for line in lines.by_ref() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        header.push_str(trimmed);
        header.push(' ');
        if trimmed.ends_with("&END") || trimmed.ends_with('/') {
            found_end = true;
            break;
        }
    }
    if !found_end {
        return Err(RpaError::Parse("header not terminated by &END".into()));
    }
    if !text.trim_start().starts_with("&FCI") {
        return Err(RpaError::Parse("file must start with &FCI".into()));
    }
    let header = header
        .trim()
        .trim_start_matches("&FCI")
        .trim_end()
        .trim_end_matches("&END")
        .trim_end_matches('/')
        .replace(['\n', '\t'], " ");
    // Comma-separated namelist items; a comma-separated list value keeps
    // extending the most recent key.
    let mut current_key = String::new();
    for item in header.split(',') {
        let item = item.trim();
        if item.is_empty() {
            continue;
        }
        let value = match item.split_once('=') {
            Some((key, value)) => {
                current_key = key.trim().to_ascii_uppercase();
                value.trim()
            }
            None => item,
        };
        match current_key.as_str() {
            "NORB" => {
                norb = Some(
                    value
                        .parse::<i64>()
                        .map_err(|e| RpaError::Parse(format!("bad NORB `{value}`: {e}")))?,
                );
            }
            "OCC" => {
                occ.get_or_insert_with(Vec::new).push(parse_occ_entry(value)?);
            }
            _ => {}
        }
    }

    let norb = norb.ok_or_else(|| RpaError::Parse("header is missing NORB".into()))?;
    if norb <= 0 {
        return Err(RpaError::NonPositiveOrbitalCount(norb));
    }
    let n = norb as usize;
    if n < 2 {
        return Err(RpaError::TooFewOrbitals(n));
    }
    let occupations = match occ {
        Some(o) => o,
        None if n == 2 => Vec::new(),
        None => return Err(RpaError::MissingOccupations(n - 2)),
    };
    if occupations.len() != n - 2 {
        return Err(RpaError::Parse(format!(
            "OCC lists {} entries, expected {} (orbitals 3..{n})",
            occupations.len(),
            n - 2
        )));
    }

    let mut one = Vec::new();
    let mut two = Vec::new();
    let mut core = 0.0;
    for (lineno, line) in lines.enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(RpaError::Parse(format!(
                "data line {}: expected `value p q r s`, got `{trimmed}`",
                lineno + 1
            )));
        }
        let value: f64 = fields[0]
            .parse()
            .map_err(|e| RpaError::Parse(format!("data line {}: {e}", lineno + 1)))?;
        let idx: Vec<i64> = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<i64>()
                    .map_err(|e| RpaError::Parse(format!("data line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if idx.iter().any(|&i| i < 0) {
            return Err(RpaError::Parse(format!(
                "data line {}: negative orbital index",
                lineno + 1
            )));
        }
        let (p, q, r, s) = (idx[0], idx[1], idx[2], idx[3]);
        match (p, q, r, s) {
            (0, 0, 0, 0) => core = value,
            (p, q, 0, 0) if p > 0 && q > 0 => {
                one.push((p as usize - 1, q as usize - 1, value));
            }
            (p, q, r, s) if p > 0 && q > 0 && r > 0 && s > 0 => {
                two.push((
                    p as usize - 1,
                    q as usize - 1,
                    r as usize - 1,
                    s as usize - 1,
                    value,
                ));
            }
            _ => {
                return Err(RpaError::Parse(format!(
                    "data line {}: invalid index pattern {p} {q} {r} {s}",
                    lineno + 1
                )));
            }
        }
    }
    IntegralSet::new(n, core, &one, &two, occupations)
}

fn parse_occ_entry(s: &str) -> Result<Occupation> {
    match s.trim() {
        "0" => Ok(Occupation::Empty),
        "1" => Ok(Occupation::Occupied),
        other => Err(RpaError::Parse(format!(
            "occupation entries must be 0 or 1, got `{other}` \
             (partially occupied environment orbitals are unsupported)"
        ))),
    }
}
