//! Kakeya sets over `(Z/NZ)^n`: representation, `(m, ε)` verification,
//! the explicit digit-sequence construction and small search baselines.

mod construction;
mod search;

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use construction::{
    admissible_k, admissible_s, build_c_sequence, construct_kakeya_n, construct_kakeya_pk, construct_unit_first,
    g_eval, g_image_check, CSequence, Construction, GImageMode, GImageReport,
};
pub use search::{greedy_kakeya, min_kakeya_bruteforce, MAX_BRUTEFORCE_GRID};

use crate::error::{check_budget, invalid, Error, Result};
use crate::geometry::{canonicalize_with, enumerate_projective, Direction, Line, LineLabeler};
use crate::ring::{ceil_rational, factorize, CrtBasis, Factorization, Rational};

/// Largest grid `N^n` whose points are materialized anywhere.
pub const MAX_GRID: u128 = 1 << 40;

/// A set of points in `(Z/NZ)^n`, stored as sorted grid indices
/// `Σ x_i N^{n-1-i}`.
#[derive(Clone, PartialEq, Eq)]
pub struct PointSet {
    modulus: u64,
    dim: usize,
    codes: Vec<u64>,
}

impl std::fmt::Debug for PointSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "PointSet(N={}, n={}, |S|={})",
            self.modulus,
            self.dim,
            self.codes.len()
        )
    }
}

fn grid_size(modulus: u64, dim: usize) -> Result<u64> {
    if modulus < 2 {
        return Err(invalid(format!("modulus must be at least 2, got {modulus}")));
    }
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let size = (modulus as u128)
        .checked_pow(dim as u32)
        .unwrap_or(u128::MAX);
    check_budget("grid points N^n", size, MAX_GRID)?;
    Ok(size as u64)
}

impl PointSet {
    /// Builds a set, dropping repeated points.
    pub fn new(modulus: u64, dim: usize, points: Vec<Vec<u64>>) -> Result<Self> {
        grid_size(modulus, dim)?;
        let mut codes = Vec::with_capacity(points.len());
        for x in &points {
            if x.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "point {x:?} has {} coordinates, expected {dim}",
                    x.len()
                )));
            }
            if let Some(&bad) = x.iter().find(|&&c| c >= modulus) {
                return Err(invalid(format!("coordinate {bad} is not in [0, {modulus})")));
            }
            codes.push(encode(x, modulus));
        }
        Ok(Self::from_codes(modulus, dim, codes))
    }

    pub(crate) fn from_codes(modulus: u64, dim: usize, mut codes: Vec<u64>) -> Self {
        codes.sort_unstable();
        codes.dedup();
        PointSet {
            modulus,
            dim,
            codes,
        }
    }

    /// The whole grid `(Z/NZ)^n`.
    pub fn full(modulus: u64, dim: usize) -> Result<Self> {
        let size = grid_size(modulus, dim)?;
        check_budget("full grid", size as u128, 1 << 28)?;
        Ok(PointSet {
            modulus,
            dim,
            codes: (0..size).collect(),
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        x.len() == self.dim
            && x.iter().all(|&c| c < self.modulus)
            && self.contains_code(encode(x, self.modulus))
    }

    pub fn contains_code(&self, code: u64) -> bool {
        self.codes.binary_search(&code).is_ok()
    }

    /// Sorted grid indices.
    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        self.codes
            .iter()
            .map(|&c| decode(c, self.modulus, self.dim))
    }

    /// Coordinatewise CRT product of sets over the prime powers of `f`, in
    /// the order of `f`'s factors.
    pub fn crt_product(parts: &[PointSet], f: &Factorization) -> Result<Self> {
        let qs = f.prime_powers();
        if parts.len() != qs.len() {
            return Err(invalid(format!(
                "expected {} component sets, got {}",
                qs.len(),
                parts.len()
            )));
        }
        let dim = parts[0].dim;
        for (part, &q) in parts.iter().zip(&qs) {
            if part.modulus != q {
                return Err(Error::ModulusMismatch {
                    expected: q,
                    found: part.modulus,
                });
            }
            if part.dim != dim {
                return Err(Error::DimensionMismatch("component dimensions differ".into()));
            }
        }
        grid_size(f.modulus(), dim)?;
        let total = parts.iter().map(|p| p.len() as u128).product::<u128>();
        check_budget("CRT product size", total, 1 << 28)?;
        let basis = CrtBasis::new(f);
        let decoded: Vec<Vec<Vec<u64>>> = parts.iter().map(|p| p.points().collect()).collect();
        let mut codes = Vec::with_capacity(total as usize);
        let mut idx = vec![0usize; parts.len()];
        if decoded.iter().any(Vec::is_empty) {
            return Ok(Self::from_codes(f.modulus(), dim, codes));
        }
        let mut residues = vec![0u64; parts.len()];
        'outer: loop {
            let mut code = 0u64;
            for c in 0..dim {
                for (r, (pts, &j)) in residues.iter_mut().zip(decoded.iter().zip(&idx)) {
                    *r = pts[j][c];
                }
                code = code * f.modulus() + basis.combine(&residues);
            }
            codes.push(code);
            for pos in 0..idx.len() {
                idx[pos] += 1;
                if idx[pos] < decoded[pos].len() {
                    continue 'outer;
                }
                idx[pos] = 0;
            }
            break;
        }
        Ok(Self::from_codes(f.modulus(), dim, codes))
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = PointSetDoc {
            modulus: self.modulus,
            n: self.dim,
            points: self.points().collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses `{"N": .., "n": .., "points": [[..], ..]}`; repeated points
    /// are an error.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PointSetDoc = serde_json::from_str(text)?;
        let mut seen = HashSet::new();
        for x in &doc.points {
            if !seen.insert(x) {
                return Err(Error::Format(format!("duplicate point {x:?}")));
            }
        }
        PointSet::new(doc.modulus, doc.n, doc.points)
            .map_err(|e| Error::Format(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointSetDoc {
    #[serde(rename = "N")]
    modulus: u64,
    n: usize,
    points: Vec<Vec<u64>>,
}

pub(crate) fn encode(x: &[u64], modulus: u64) -> u64 {
    x.iter().fold(0, |acc, &c| acc * modulus + c)
}

pub(crate) fn decode(mut code: u64, modulus: u64, dim: usize) -> Vec<u64> {
    let mut x = vec![0; dim];
    for c in x.iter_mut().rev() {
        *c = code % modulus;
        code /= modulus;
    }
    x
}

/// One line per direction, keyed by the direction's canonical
/// representative.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KakeyaWitness {
    lines: BTreeMap<Direction, Line>,
}

impl KakeyaWitness {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, line: Line) {
        self.lines.insert(line.dir().clone(), line);
    }

    pub fn get(&self, dir: &Direction) -> Option<&Line> {
        self.lines.get(dir)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn lines(&self) -> impl Iterator<Item = &Line> {
        self.lines.values()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = WitnessDoc {
            witnesses: self
                .lines
                .values()
                .map(|l| WitnessEntry {
                    dir: l.dir().rep().to_vec(),
                    base: l.base().to_vec(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    /// Parses `{"witnesses": [{"dir": [..], "base": [..]}, ..]}`; each
    /// direction is canonicalized modulo `N`.
    pub fn from_json(text: &str, modulus: u64) -> Result<Self> {
        let doc: WitnessDoc = serde_json::from_str(text)?;
        let f = factorize(modulus)?;
        let mut out = KakeyaWitness::new();
        for entry in doc.witnesses {
            if entry.base.iter().chain(&entry.dir).any(|&c| c >= modulus) {
                return Err(Error::Format(format!(
                    "witness {:?} + λ{:?} has coordinates outside [0, {modulus})",
                    entry.base, entry.dir
                )));
            }
            let dir = canonicalize_with(&entry.dir, &f)?;
            if out.get(&dir).is_some() {
                return Err(Error::Format(format!("direction {:?} listed twice", entry.dir)));
            }
            out.insert(Line::new(entry.base, dir)?);
        }
        Ok(out)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessDoc {
    witnesses: Vec<WitnessEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessEntry {
    dir: Vec<u64>,
    base: Vec<u64>,
}

/// Outcome of [`verify_kakeya`].
#[derive(Clone, Debug)]
pub struct KakeyaReport {
    pub modulus: u64,
    pub dim: usize,
    pub m: u64,
    pub size: usize,
    pub total_directions: u128,
    /// Directions with an `m`-rich line.
    pub satisfied: u128,
    /// `satisfied / total_directions`.
    pub epsilon: Rational,
    /// A direction of least best-richness, with that richness.
    pub worst: Option<(Direction, u64)>,
    /// The richest line found for every satisfied direction.
    pub witnesses: KakeyaWitness,
}

impl KakeyaReport {
    /// `S` has an `m`-rich line in at least an `eps` fraction of directions:
    /// `satisfied ≥ ⌈eps · total⌉`.
    pub fn meets(&self, eps: &Rational) -> bool {
        let need = ceil_rational(&(eps * Rational::from_integer(BigInt::from(self.total_directions))));
        BigInt::from(self.satisfied) >= need
    }

    /// Every direction has a line fully inside `S`.
    pub fn is_kakeya(&self) -> bool {
        self.m == self.modulus && self.satisfied == self.total_directions
    }
}

/// Checks how many directions carry an `m`-rich line in `set`. With
/// `witnesses`, only the supplied line is examined for each direction and
/// missing directions count as unsatisfied; otherwise every line of every
/// direction is scanned.
pub fn verify_kakeya(
    set: &PointSet,
    m: u64,
    witnesses: Option<&KakeyaWitness>,
) -> Result<KakeyaReport> {
    let (modulus, dim) = (set.modulus, set.dim);
    if m == 0 || m > modulus {
        return Err(invalid(format!("richness threshold m = {m} must lie in [1, {modulus}]")));
    }
    let f = factorize(modulus)?;
    let dirs = enumerate_projective(modulus, dim)?;
    let results: Vec<(u64, Option<Line>)> = match witnesses {
        Some(w) => {
            check_budget(
                "witness checks",
                dirs.len() as u128 * modulus as u128,
                1 << 34,
            )?;
            dirs.par_iter()
                .map(|d| match w.get(d) {
                    Some(line) => {
                        let rich = (0..modulus)
                            .filter(|&l| set.contains_code(encode(&line.point(l), modulus)))
                            .count() as u64;
                        (rich, Some(line.clone()))
                    }
                    None => (0, None),
                })
                .collect()
        }
        None => {
            check_budget(
                "exhaustive line scan",
                dirs.len() as u128 * set.len() as u128,
                1 << 34,
            )?;
            let coords: Vec<u64> = set.points().flatten().collect();
            dirs.par_iter()
                .map(|d| best_line(d, &f, &coords, dim))
                .collect::<Result<_>>()?
        }
    };
    let mut witnesses_out = KakeyaWitness::new();
    let mut satisfied = 0u128;
    let mut worst: Option<(Direction, u64)> = None;
    for (d, (rich, line)) in dirs.iter().zip(results) {
        if rich >= m {
            satisfied += 1;
            if let Some(line) = line {
                witnesses_out.insert(line);
            }
        }
        if worst.as_ref().map_or(true, |(_, r)| rich < *r) {
            worst = Some((d.clone(), rich));
        }
    }
    let total = dirs.len() as u128;
    Ok(KakeyaReport {
        modulus,
        dim,
        m,
        size: set.len(),
        total_directions: total,
        satisfied,
        epsilon: Rational::new(BigInt::from(satisfied), BigInt::from(total)),
        worst,
        witnesses: witnesses_out,
    })
}

/// Richest line of direction `d` through the points in `coords`; ties go to
/// the smallest base label.
fn best_line(d: &Direction, f: &Factorization, coords: &[u64], dim: usize) -> Result<(u64, Option<Line>)> {
    let lab = LineLabeler::new(d, f)?;
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for x in coords.chunks_exact(dim) {
        *counts.entry(lab.label(x)).or_default() += 1;
    }
    let best = counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)));
    Ok(match best {
        Some((code, rich)) => {
            let base = decode(code, f.modulus(), dim);
            (rich, Some(Line::new(base, d.clone())?))
        }
        None => (0, None),
    })
}

/// Brute-force oracle: scans every base point of every direction with
/// explicit line generation. Returns the number of directions that have an
/// `m`-rich line.
pub fn count_rich_directions_naive(set: &PointSet, m: u64) -> Result<u128> {
    let (modulus, dim) = (set.modulus, set.dim);
    let grid = grid_size(modulus, dim)?;
    let dirs = enumerate_projective(modulus, dim)?;
    check_budget("naive scan", dirs.len() as u128 * grid as u128 * modulus as u128, 1 << 30)?;
    let mut satisfied = 0;
    for d in &dirs {
        let found = (0..grid).any(|code| {
            let line = Line::new(decode(code, modulus, dim), d.clone()).expect("dims agree");
            crate::geometry::richness(set, &line) as u64 >= m
        });
        if found {
            satisfied += 1;
        }
    }
    Ok(satisfied)
}
