//! Projective direction spaces over `Z/NZ`, lines and their CRT
//! decomposition.
//!
//! A direction is a vector with a unit coordinate modulo every prime power
//! dividing `N`, up to multiplication by units of `Z/NZ`. Each class is
//! stored by a canonical representative: the unit multiple whose first
//! coordinate that is a unit mod `N` equals 1, or when no coordinate is a
//! unit mod `N`, the lexicographically least unit multiple.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_budget, invalid, Error, Result};
use crate::kakeya::PointSet;
use crate::ring::{factorize, gcd, inv_mod, mul_mod, CrtBasis, Factorization};

/// Largest direction list [`enumerate_projective`] will materialize.
pub const MAX_DIRECTIONS: u128 = 1 << 24;

/// Canonical representative of a point of `P(Z/NZ)^{n-1}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Direction {
    modulus: u64,
    rep: Vec<u64>,
}

impl Direction {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dim(&self) -> usize {
        self.rep.len()
    }

    pub fn rep(&self) -> &[u64] {
        &self.rep
    }
}

impl fmt::Debug for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} mod {}", self.rep, self.modulus)
    }
}

fn check_modulus(modulus: u64) -> Result<()> {
    if modulus < 2 {
        return Err(invalid(format!("modulus must be at least 2, got {modulus}")));
    }
    Ok(())
}

fn scale(u: &[u64], c: u64, modulus: u64) -> Vec<u64> {
    u.iter().map(|&x| mul_mod(x, c, modulus)).collect()
}

/// Canonical representative of the unit-multiple class of `u`.
pub fn canonicalize(u: &[u64], modulus: u64) -> Result<Direction> {
    let f = factorize(modulus)?;
    canonicalize_with(u, &f)
}

pub fn canonicalize_with(u: &[u64], f: &Factorization) -> Result<Direction> {
    let modulus = f.modulus();
    if u.is_empty() {
        return Err(invalid("direction must have at least one coordinate"));
    }
    let u: Vec<u64> = u.iter().map(|x| x % modulus).collect();
    for &(p, _) in f.factors() {
        if u.iter().all(|x| x % p == 0) {
            return Err(Error::NotProjective(u));
        }
    }
    if let Some(&x) = u.iter().find(|&&x| gcd(x, modulus) == 1) {
        let inv = inv_mod(x, modulus).expect("unit coordinate");
        return Ok(Direction {
            modulus,
            rep: scale(&u, inv, modulus),
        });
    }
    let rep = (1..modulus)
        .filter(|&c| gcd(c, modulus) == 1)
        .map(|c| scale(&u, c, modulus))
        .min()
        .expect("1 is a unit");
    Ok(Direction { modulus, rep })
}

/// `|P(Z/NZ)^{n-1}| = Π (q^n - (q/p)^n) / ((q/p)(p - 1))` over `q = p^k || N`.
pub fn projective_count(modulus: u64, n: usize) -> Result<u128> {
    check_modulus(modulus)?;
    if n == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let overflow = || invalid("projective count overflows u128");
    let f = factorize(modulus)?;
    let mut total = 1u128;
    for &(p, k) in f.factors() {
        let q = p.pow(k) as u128;
        let r = q / p as u128;
        let all = q.checked_pow(n as u32).ok_or_else(overflow)?;
        let non_unit = r.checked_pow(n as u32).ok_or_else(overflow)?;
        let class = (all - non_unit) / (r * (p as u128 - 1));
        total = total.checked_mul(class).ok_or_else(overflow)?;
    }
    Ok(total)
}

/// Canonical representatives mod `q = p^k`: the first coordinate prime to
/// `p` is 1, earlier ones are multiples of `p`.
fn prime_power_reps(p: u64, q: u64, n: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for lead in 0..n {
        let before = (q / p).pow(lead as u32);
        let after = q.pow((n - lead - 1) as u32);
        for b in 0..before {
            for a in 0..after {
                let mut v = vec![0u64; n];
                let mut rest = b;
                for x in v.iter_mut().take(lead).rev() {
                    *x = (rest % (q / p)) * p;
                    rest /= q / p;
                }
                v[lead] = 1;
                let mut rest = a;
                for x in v.iter_mut().skip(lead + 1).rev() {
                    *x = rest % q;
                    rest /= q;
                }
                out.push(v);
            }
        }
    }
    out
}

/// Every direction of `P(Z/NZ)^{n-1}` once, sorted by representative.
pub fn enumerate_projective(modulus: u64, n: usize) -> Result<Vec<Direction>> {
    let count = projective_count(modulus, n)?;
    check_budget("projective directions", count, MAX_DIRECTIONS)?;
    let f = factorize(modulus)?;
    let basis = CrtBasis::new(&f);
    let per_prime: Vec<Vec<Vec<u64>>> = f
        .factors()
        .iter()
        .map(|&(p, k)| prime_power_reps(p, p.pow(k), n))
        .collect();
    let mut out = Vec::with_capacity(count as usize);
    let mut idx = vec![0usize; per_prime.len()];
    loop {
        let combined: Vec<u64> = (0..n)
            .map(|i| {
                let residues: Vec<u64> = idx
                    .iter()
                    .zip(&per_prime)
                    .map(|(&j, reps)| reps[j][i])
                    .collect();
                basis.combine(&residues)
            })
            .collect();
        out.push(canonicalize_with(&combined, &f)?);
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                out.sort();
                return Ok(out);
            }
            idx[pos] += 1;
            if idx[pos] < per_prime[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `{a + λu : λ ∈ Z/NZ}`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Line {
    base: Vec<u64>,
    dir: Direction,
}

impl Line {
    pub fn new(base: Vec<u64>, dir: Direction) -> Result<Self> {
        if base.len() != dir.dim() {
            return Err(Error::DimensionMismatch(format!(
                "base has {} coordinates, direction has {}",
                base.len(),
                dir.dim()
            )));
        }
        let base = base.into_iter().map(|x| x % dir.modulus).collect();
        Ok(Line { base, dir })
    }

    pub fn base(&self) -> &[u64] {
        &self.base
    }

    pub fn dir(&self) -> &Direction {
        &self.dir
    }

    pub fn point(&self, lambda: u64) -> Vec<u64> {
        let m = self.dir.modulus;
        self.base
            .iter()
            .zip(&self.dir.rep)
            .map(|(&a, &u)| (a + mul_mod(lambda, u, m)) % m)
            .collect()
    }
}

impl fmt::Debug for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + λ{:?} mod {}", self.base, self.dir.rep, self.dir.modulus)
    }
}

/// Points `a + λu` for `λ = 0, …, N-1`.
pub fn line_points(line: &Line) -> Vec<Vec<u64>> {
    (0..line.dir.modulus).map(|l| line.point(l)).collect()
}

/// Number of points of `line` lying in `set`.
pub fn richness(set: &PointSet, line: &Line) -> usize {
    line_points(line)
        .iter()
        .filter(|x| set.contains(x))
        .count()
}

/// Residues of `line` modulo each prime power of `f`.
pub fn line_crt_decompose(line: &Line, f: &Factorization) -> Result<Vec<Line>> {
    if f.modulus() != line.dir.modulus {
        return Err(Error::ModulusMismatch {
            expected: line.dir.modulus,
            found: f.modulus(),
        });
    }
    f.factors()
        .iter()
        .map(|&(p, k)| {
            let q = p.pow(k);
            let sub = Factorization::prime_power(p, k)?;
            let dir = canonicalize_with(&line.dir.rep, &sub)?;
            Line::new(line.base.iter().map(|x| x % q).collect(), dir)
        })
        .collect()
}

/// Labels the lines of one direction by the unique point on each line
/// whose chosen unit coordinate vanishes modulo every prime power.
#[derive(Clone, Debug)]
pub struct LineLabeler {
    modulus: u64,
    basis: CrtBasis,
    rep: Vec<u64>,
    /// `(q, pivot coordinate, inverse of u_pivot mod q)` per prime power.
    pivots: Vec<(u64, usize, u64)>,
}

impl LineLabeler {
    pub fn new(dir: &Direction, f: &Factorization) -> Result<Self> {
        if f.modulus() != dir.modulus {
            return Err(Error::ModulusMismatch {
                expected: dir.modulus,
                found: f.modulus(),
            });
        }
        let pivots = f
            .factors()
            .iter()
            .map(|&(p, k)| {
                let q = p.pow(k);
                let i = dir
                    .rep
                    .iter()
                    .position(|x| x % p != 0)
                    .expect("direction is projective");
                (q, i, inv_mod(dir.rep[i] % q, q).expect("unit"))
            })
            .collect();
        Ok(LineLabeler {
            modulus: dir.modulus,
            basis: CrtBasis::new(f),
            rep: dir.rep.clone(),
            pivots,
        })
    }

    /// Base point of the line through `x`, encoded as a grid index.
    pub fn label(&self, x: &[u64]) -> u64 {
        let mut residues = vec![0u64; self.pivots.len()];
        let mut code = 0u64;
        for (c, &u) in self.rep.iter().enumerate() {
            for (r, &(q, i, inv)) in residues.iter_mut().zip(&self.pivots) {
                let lambda = mul_mod(x[i] % q, inv, q);
                *r = (x[c] % q + q - mul_mod(lambda, u % q, q)) % q;
            }
            code = code * self.modulus + self.basis.combine(&residues);
        }
        code
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeSet, HashMap};

    use crate::ring::totient;

    fn all_vectors(modulus: u64, n: usize) -> impl Iterator<Item = Vec<u64>> {
        (0..modulus.pow(n as u32)).map(move |mut code| {
            let mut v = vec![0; n];
            for x in v.iter_mut().rev() {
                *x = code % modulus;
                code /= modulus;
            }
            v
        })
    }

    #[test]
    fn canonicalize_examples() {
        assert_eq!(canonicalize(&[3, 0], 4).unwrap().rep(), &[1, 0]);
        assert!(matches!(canonicalize(&[2, 2], 4), Err(Error::NotProjective(_))));
        assert_eq!(canonicalize(&[2, 1], 4).unwrap().rep(), &[2, 1]);
        assert_eq!(canonicalize(&[2, 3], 4).unwrap().rep(), &[2, 1]);
        // no coordinate is a unit mod 6
        assert_eq!(canonicalize(&[2, 3], 6).unwrap().rep(), &[2, 3]);
        assert_eq!(canonicalize(&[4, 3], 6).unwrap().rep(), &[2, 3]);
    }

    #[test]
    fn enumerate_examples() {
        let reps: Vec<Vec<u64>> = enumerate_projective(2, 2)
            .unwrap()
            .into_iter()
            .map(|d| d.rep)
            .collect();
        assert_eq!(reps, vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(enumerate_projective(4, 2).unwrap().len(), 6);
        assert_eq!(enumerate_projective(6, 1).unwrap().len(), 1);
        assert_eq!(projective_count(4, 2).unwrap(), 6);
        assert_eq!(projective_count(9, 2).unwrap(), 12);
        assert_eq!(projective_count(81, 2).unwrap(), 108);
    }

    #[test]
    fn classes_match_exhaustive_orbits() {
        for modulus in 2..=12u64 {
            let f = factorize(modulus).unwrap();
            let phi = totient(&f) as usize;
            for n in 1..=3 {
                let listed: BTreeSet<Direction> =
                    enumerate_projective(modulus, n).unwrap().into_iter().collect();
                let mut sizes: HashMap<Direction, usize> = HashMap::new();
                for v in all_vectors(modulus, n) {
                    if let Ok(d) = canonicalize_with(&v, &f) {
                        assert!(listed.contains(&d), "{v:?} mod {modulus}");
                        *sizes.entry(d).or_default() += 1;
                    }
                }
                assert_eq!(sizes.len(), listed.len());
                assert!(sizes.values().all(|&s| s == phi));
            }
        }
    }

    #[test]
    fn count_matches_enumeration() {
        for modulus in 2..=30u64 {
            for n in 1..=3 {
                assert_eq!(
                    projective_count(modulus, n).unwrap(),
                    enumerate_projective(modulus, n).unwrap().len() as u128,
                    "N={modulus} n={n}"
                );
            }
        }
    }

    #[test]
    fn line_examples() {
        let dir = Direction {
            modulus: 4,
            rep: vec![1, 2],
        };
        let line = Line::new(vec![0, 0], dir).unwrap();
        assert_eq!(
            line_points(&line),
            vec![vec![0, 0], vec![1, 2], vec![2, 0], vec![3, 2]]
        );
        let full = PointSet::full(4, 2).unwrap();
        assert_eq!(richness(&full, &line), 4);
        let empty = PointSet::new(4, 2, vec![]).unwrap();
        assert_eq!(richness(&empty, &line), 0);
    }

    #[test]
    fn lines_are_injective() {
        for modulus in 2..=12u64 {
            for n in 1..=2 {
                for dir in enumerate_projective(modulus, n).unwrap() {
                    for base in all_vectors(modulus, n) {
                        let pts: BTreeSet<_> =
                            line_points(&Line::new(base, dir.clone()).unwrap()).into_iter().collect();
                        assert_eq!(pts.len(), modulus as usize);
                    }
                }
            }
        }
    }

    #[test]
    fn crt_decomposition_recombines() {
        let f = factorize(12).unwrap();
        let dir = canonicalize(&[1, 1], 12).unwrap();
        let parts = line_crt_decompose(&Line::new(vec![5, 7], dir).unwrap(), &f).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].dir().rep(), &[1, 1]);
        assert_eq!(parts[0].dir().modulus(), 4);
        assert_eq!(parts[1].dir().modulus(), 3);

        let basis = CrtBasis::new(&f);
        let dirs = enumerate_projective(12, 2).unwrap();
        let mut seed = 17u64;
        for _ in 0..50 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let dir = dirs[(seed >> 33) as usize % dirs.len()].clone();
            let base = vec![(seed >> 20) % 12, (seed >> 40) % 12];
            let line = Line::new(base, dir).unwrap();
            let parts = line_crt_decompose(&line, &f).unwrap();
            let a = line_points(&parts[0]);
            let b = line_points(&parts[1]);
            let mut recombined = BTreeSet::new();
            for x in &a {
                for y in &b {
                    recombined.insert(vec![
                        basis.combine(&[x[0], y[0]]),
                        basis.combine(&[x[1], y[1]]),
                    ]);
                }
            }
            let original: BTreeSet<_> = line_points(&line).into_iter().collect();
            assert_eq!(recombined, original);
        }

        let p = factorize(7).unwrap();
        let line = Line::new(vec![1, 2], canonicalize(&[3, 1], 7).unwrap()).unwrap();
        assert_eq!(line_crt_decompose(&line, &p).unwrap(), vec![line]);
    }

    #[test]
    fn labels_identify_lines() {
        for modulus in [4u64, 6, 8, 9, 12] {
            let f = factorize(modulus).unwrap();
            for dir in enumerate_projective(modulus, 2).unwrap() {
                let lab = LineLabeler::new(&dir, &f).unwrap();
                let mut by_label: HashMap<u64, BTreeSet<Vec<u64>>> = HashMap::new();
                for x in all_vectors(modulus, 2) {
                    by_label.entry(lab.label(&x)).or_default().insert(x);
                }
                assert_eq!(by_label.len() as u64, modulus);
                for (code, pts) in by_label {
                    let base = vec![code / modulus, code % modulus];
                    let line = Line::new(base, dir.clone()).unwrap();
                    let expect: BTreeSet<_> = line_points(&line).into_iter().collect();
                    assert_eq!(pts, expect);
                }
            }
        }
    }
}
