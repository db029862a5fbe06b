//! The matrices `M_{p^ℓ,n}(u, v) = z^{⟨u,v⟩}` over `T̄_ℓ = F_p[z]/⟨z^{p^ℓ} - 1⟩`,
//! their restrictions and `F_p`-ranks, certified rank lower bounds from
//! diagonal valuations, rotation search and the rich-line rank inequality.
//!
//! Rows and columns are indexed by `(Z/p^ℓZ)^n` in lexicographic order with
//! the first coordinate most significant. Row `u` of `Coeff(M)` for the
//! power `z^i` is the indicator vector of the hyperplane `{v : ⟨u,v⟩ = i}`,
//! which is what the rank routines stream.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_budget, invalid, Error, Result};
use crate::geometry::{canonicalize_with, projective_count, Direction};
use crate::kakeya::{KakeyaWitness, PointSet};
use crate::linalg::{Fp, FpEchelon, FpQuot, RingMatrix};
use crate::ring::{
    binom_exact, binom_real, ceil_rational, is_prime, p_valuation, pow_or_err, rational_int,
    Factorization, Rational,
};

/// Largest `p^{ℓn}` for which `M_{p^ℓ,n}` is built.
pub const MAX_M_SIZE: u128 = 10_000;
/// Largest column count for exact rank computations.
pub const MAX_RANK_COLS: u128 = 4096;

/// `M_{p^ℓ,n}`, held implicitly through its exponents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MMatrix {
    p: u64,
    ell: u32,
    n: usize,
    q: u64,
    size: usize,
}

pub fn build_m(p: u64, ell: u32, n: usize) -> Result<MMatrix> {
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    if ell == 0 || n == 0 {
        return Err(invalid("need ell >= 1 and n >= 1"));
    }
    let q = pow_or_err(p, ell)?;
    let size = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    check_budget("rows of M", size, MAX_M_SIZE)?;
    Ok(MMatrix {
        p,
        ell,
        n,
        q,
        size: size as usize,
    })
}

impl MMatrix {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `p^ℓ`.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// `p^{ℓn}`, the number of rows and of columns.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn vector(&self, index: usize) -> Vec<u64> {
        let mut v = vec![0; self.n];
        let mut rest = index as u64;
        for x in v.iter_mut().rev() {
            *x = rest % self.q;
            rest /= self.q;
        }
        v
    }

    pub fn index(&self, v: &[u64]) -> usize {
        v.iter().fold(0u64, |acc, &x| acc * self.q + x % self.q) as usize
    }

    /// `⟨u, v⟩ mod p^ℓ` for row `u` and column `v`.
    pub fn exponent(&self, row: usize, col: usize) -> u64 {
        let (u, v) = (self.vector(row), self.vector(col));
        u.iter()
            .zip(&v)
            .fold(0, |acc, (&a, &b)| (acc + a * b) % self.q)
    }

    /// The ring `T̄_ℓ` the entries live in.
    pub fn ring(&self) -> Result<FpQuot> {
        FpQuot::tbar(self.p, self.ell)
    }

    /// Dense materialization over `T̄_ℓ`.
    pub fn to_ring_matrix(&self) -> Result<RingMatrix<FpQuot>> {
        check_budget(
            "dense M coefficients",
            (self.size as u128).pow(2) * self.q as u128,
            1 << 24,
        )?;
        let ring = self.ring()?;
        Ok(RingMatrix::from_fn(ring.clone(), self.size, self.size, |r, c| {
            ring.monomial(self.exponent(r, c) as usize)
        }))
    }

    /// `F_p`-rank of the submatrix on the given rows.
    pub fn rank_of_rows(&self, rows: &[usize]) -> Result<usize> {
        check_budget("rank columns", self.size as u128, MAX_RANK_COLS)?;
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.size) {
            return Err(invalid(format!("row {bad} out of range")));
        }
        let vectors: Vec<Vec<u64>> = (0..self.size).map(|c| self.vector(c)).collect();
        let mut ech = FpEchelon::new(Fp::new(self.p)?, self.size);
        let mut seen: HashSet<Vec<u32>> = HashSet::new();
        for &r in rows {
            let u = self.vector(r);
            let exps: Vec<u64> = vectors
                .iter()
                .map(|v| u.iter().zip(v).fold(0, |acc, (&a, &b)| (acc + a * b) % self.q))
                .collect();
            // rows of u and of c·u give the same partition of the columns
            let mut label = vec![u32::MAX; self.q as usize];
            let mut next = 0;
            let pattern: Vec<u32> = exps
                .iter()
                .map(|&e| {
                    if label[e as usize] == u32::MAX {
                        label[e as usize] = next;
                        next += 1;
                    }
                    label[e as usize]
                })
                .collect();
            if !seen.insert(pattern) {
                continue;
            }
            for i in 0..self.q {
                let row: Vec<u64> = exps.iter().map(|&e| u64::from(e == i)).collect();
                if row.iter().any(|&x| x != 0) {
                    ech.insert(&row);
                    if ech.is_full() {
                        return Ok(ech.rank());
                    }
                }
            }
        }
        Ok(ech.rank())
    }

    pub fn rank(&self) -> Result<usize> {
        let rows: Vec<usize> = (0..self.size).collect();
        self.rank_of_rows(&rows)
    }
}

/// `M_{p^ℓ,n}` restricted to a list of rows.
#[derive(Clone, Debug)]
pub struct RestrictedM {
    pub m: MMatrix,
    pub rows: Vec<usize>,
}

pub fn restrict_m(m: &MMatrix, rows: &[usize]) -> Result<RestrictedM> {
    if let Some(&bad) = rows.iter().find(|&&r| r >= m.size) {
        return Err(invalid(format!("row {bad} out of range")));
    }
    Ok(RestrictedM {
        m: m.clone(),
        rows: rows.to_vec(),
    })
}

impl RestrictedM {
    pub fn rank(&self) -> Result<usize> {
        self.m.rank_of_rows(&self.rows)
    }

    pub fn to_ring_matrix(&self) -> Result<RingMatrix<FpQuot>> {
        Ok(self.m.to_ring_matrix()?.select_rows(&self.rows))
    }
}

/// `w`-adic valuation of `Π_{i<j} (z^j - z^i)` under `z = 1 + w`, i.e.
/// `Σ_{l=1}^{j} p^{v_p(l)}`.
pub fn diag_valuation(j: u64, p: u64) -> u64 {
    (1..=j)
        .map(|l| p.pow(p_valuation(l, p).expect("l >= 1")))
        .sum()
}

/// The relaxed per-index bound `j (ℓ - (ℓ-1)/p)` on [`diag_valuation`].
pub fn relaxed_valuation(j: u64, p: u64, ell: u32) -> Rational {
    rational_int(j) * (rational_int(ell) - Rational::new((ell - 1).into(), p.into()))
}

fn check_q(p: u64, ell: u32) -> Result<u64> {
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    if ell == 0 {
        return Err(invalid("ell must be positive"));
    }
    let q = pow_or_err(p, ell)?;
    check_budget("p^ell", q as u128, 10_000)?;
    Ok(q)
}

/// Number of tuples in `[0, p^ℓ)^n` whose entries' weights sum to at most
/// `p^ℓ - 1`.
fn count_tuples(weights: &[u64], threshold: u64, n: usize) -> BigUint {
    let t = threshold as usize;
    let mut dp = vec![BigUint::from(0u32); t + 1];
    dp[0] = BigUint::from(1u32);
    for _ in 0..n {
        let mut next = vec![BigUint::from(0u32); t + 1];
        for (s, ways) in dp.iter().enumerate() {
            if *ways == BigUint::from(0u32) {
                continue;
            }
            for &w in weights {
                let total = s + w as usize;
                if total > t {
                    continue;
                }
                next[total] += ways;
            }
        }
        dp = next;
    }
    dp.into_iter().sum()
}

/// Certified lower bound on `rank_{F_p} M_{p^ℓ,n}`: the number of nonzero
/// diagonal entries of `D^{⊗n}`, i.e. tuples with
/// `Σ diag_valuation(j_i) ≤ p^ℓ - 1`.
pub fn diag_rank_bound(p: u64, ell: u32, n: usize) -> Result<BigUint> {
    let q = check_q(p, ell)?;
    let weights: Vec<u64> = (0..q)
        .map(|j| diag_valuation(j, p))
        .take_while(|&v| v < q)
        .collect();
    Ok(count_tuples(&weights, q - 1, n))
}

/// Tuple count under the relaxed weights `j (ℓ - (ℓ-1)/p)`.
pub fn relaxed_rank_bound(p: u64, ell: u32, n: usize) -> Result<BigUint> {
    let q = check_q(p, ell)?;
    // j (ℓp - ℓ + 1) ≤ (q - 1) p
    let scale = ell as u64 * p - ell as u64 + 1;
    let weights: Vec<u64> = (0..q).take_while(|j| j * scale <= (q - 1) * p).collect();
    let scaled: Vec<u64> = weights.iter().map(|j| j * scale).collect();
    let threshold = (q - 1) * p;
    // tuple count with scaled weights; weights are multiples of `scale`
    let unit: Vec<u64> = scaled.iter().map(|w| w / scale).collect();
    Ok(count_tuples(&unit, threshold / scale, n))
}

/// Whether `⌈p^ℓ/ℓ⌉ (ℓ - (ℓ-1)/p) ≤ p^ℓ - 1`, the inequality the
/// binomial-form bound relies on.
pub fn relaxed_threshold_holds(p: u64, ell: u32) -> Result<bool> {
    let q = check_q(p, ell)?;
    let top = q.div_ceil(ell as u64);
    Ok(relaxed_valuation(top, p, ell) <= rational_int(q - 1))
}

/// `⌈C(p^ℓ/ℓ + n, n)⌉`.
pub fn binom_rank_bound(p: u64, ell: u32, n: usize) -> Result<BigInt> {
    let q = check_q(p, ell)?;
    let x = Rational::new(q.into(), ell.into()) + rational_int(n as u64);
    Ok(ceil_rational(&binom_real(&x, n as u64)))
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictedRankReport {
    pub p: u64,
    pub ell: u32,
    pub n: usize,
    pub full_rank: usize,
    pub restricted_rank: usize,
    pub restricted_rows: usize,
}

impl RestrictedRankReport {
    pub fn equal(&self) -> bool {
        self.full_rank == self.restricted_rank
    }
}

/// Ranks of `M_{p^ℓ,n}` and of its restriction to the rows with a unit
/// coordinate (the vectors representing `P(Z/p^ℓZ)^{n-1}`).
pub fn verify_restricted_rank(p: u64, ell: u32, n: usize) -> Result<RestrictedRankReport> {
    let m = build_m(p, ell, n)?;
    let rows: Vec<usize> = (0..m.size)
        .filter(|&r| m.vector(r).iter().any(|x| x % p != 0))
        .collect();
    Ok(RestrictedRankReport {
        p,
        ell,
        n,
        full_rank: m.rank()?,
        restricted_rank: m.rank_of_rows(&rows)?,
        restricted_rows: rows.len(),
    })
}

/// Directions mod `p^k` and all their representatives' lifts mod `p^ℓ`.
#[derive(Clone, Debug)]
pub struct LiftedDirectionSet {
    pub p: u64,
    pub k: u32,
    pub ell: u32,
    pub base: Vec<Direction>,
    pub lifted: Vec<Vec<u64>>,
}

/// `D' = {u ∈ (Z/p^ℓZ)^n : u mod p^k is the representative of some d ∈ D}`.
pub fn lift_directions(dirs: &[Direction], p: u64, k: u32, ell: u32) -> Result<LiftedDirectionSet> {
    if ell < k {
        return Err(invalid(format!("cannot lift from p^{k} to p^{ell}: need ell >= k")));
    }
    let pk = pow_or_err(p, k)?;
    let step = pow_or_err(p, ell - k)?;
    let mut lifted = Vec::new();
    let n = dirs.first().map_or(0, Direction::dim);
    let count = (step as u128).checked_pow(n as u32).unwrap_or(u128::MAX) * dirs.len() as u128;
    check_budget("lifted directions", count, 1 << 24)?;
    for d in dirs {
        if d.modulus() != pk {
            return Err(Error::ModulusMismatch {
                expected: pk,
                found: d.modulus(),
            });
        }
        if d.dim() != n {
            return Err(Error::DimensionMismatch("directions of mixed dimension".into()));
        }
        for code in 0..step.pow(n as u32) {
            let mut rest = code;
            let mut v = vec![0u64; n];
            for (x, &u) in v.iter_mut().zip(d.rep()).rev() {
                *x = u + pk * (rest % step);
                rest /= step;
            }
            lifted.push(v);
        }
    }
    Ok(LiftedDirectionSet {
        p,
        k,
        ell,
        base: dirs.to_vec(),
        lifted,
    })
}

/// An `n × n` matrix over `Z/p^kZ` with unit determinant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct RotationMatrix {
    modulus: u64,
    n: usize,
    entries: Vec<u64>,
}

fn det_mod_p(entries: &[u64], n: usize, p: u64) -> u64 {
    let mut a: Vec<u64> = entries.iter().map(|x| x % p).collect();
    let mut det = 1u64;
    for c in 0..n {
        let Some(piv) = (c..n).find(|&r| a[r * n + c] != 0) else {
            return 0;
        };
        if piv != c {
            for j in 0..n {
                a.swap(piv * n + j, c * n + j);
            }
            det = (p - det) % p;
        }
        let d = a[c * n + c];
        det = det * d % p;
        let inv = crate::ring::inv_mod(d, p).expect("nonzero");
        for r in c + 1..n {
            let f = a[r * n + c] * inv % p;
            if f == 0 {
                continue;
            }
            for j in c..n {
                a[r * n + j] = (a[r * n + j] + p * p - f * a[c * n + j] % p) % p;
            }
        }
    }
    det
}

impl RotationMatrix {
    pub fn new(p: u64, k: u32, n: usize, entries: Vec<u64>) -> Result<Self> {
        let modulus = pow_or_err(p, k)?;
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!("need {} entries", n * n)));
        }
        let entries: Vec<u64> = entries.into_iter().map(|x| x % modulus).collect();
        if det_mod_p(&entries, n, p) == 0 {
            return Err(invalid("determinant is not a unit"));
        }
        Ok(RotationMatrix {
            modulus,
            n,
            entries,
        })
    }

    pub fn identity(p: u64, k: u32, n: usize) -> Result<Self> {
        let entries = (0..n * n).map(|i| u64::from(i % (n + 1) == 0)).collect();
        Self::new(p, k, n, entries)
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn apply(&self, u: &[u64]) -> Vec<u64> {
        let q = self.modulus as u128;
        (0..self.n)
            .map(|r| {
                (0..self.n).fold(0u128, |acc, c| {
                    (acc + self.entries[r * self.n + c] as u128 * u[c] as u128) % q
                }) as u64
            })
            .collect()
    }
}

fn digits(mut code: u64, base: u64, len: usize) -> Vec<u64> {
    let mut out = vec![0; len];
    for x in out.iter_mut().rev() {
        *x = code % base;
        code /= base;
    }
    out
}

/// `|GL_n(Z/p^kZ)| = p^{(k-1)n²} Π_{i<n} (p^n - p^i)`.
pub fn gl_order(p: u64, k: u32, n: usize) -> Result<u128> {
    let overflow = || invalid("group order overflows");
    let pn = (p as u128).checked_pow(n as u32).ok_or_else(overflow)?;
    let mut order = (p as u128)
        .checked_pow((k - 1) * (n * n) as u32)
        .ok_or_else(overflow)?;
    for i in 0..n {
        order = order
            .checked_mul(pn - (p as u128).pow(i as u32))
            .ok_or_else(overflow)?;
    }
    Ok(order)
}

/// Every element of `GL_n(Z/p^kZ)`: each invertible matrix mod `p` lifted
/// by every pattern of higher digits.
pub fn enumerate_gl(p: u64, k: u32, n: usize) -> Result<Vec<RotationMatrix>> {
    let order = gl_order(p, k, n)?;
    check_budget("GL enumeration", order, 1 << 22)?;
    let cells = n * n;
    let modulus = pow_or_err(p, k)?;
    let high = modulus / p;
    let mut out = Vec::with_capacity(order as usize);
    for low_code in 0..p.pow(cells as u32) {
        let low = digits(low_code, p, cells);
        if det_mod_p(&low, n, p) == 0 {
            continue;
        }
        for high_code in 0..high.pow(cells as u32) {
            let hi = digits(high_code, high, cells);
            let entries = low.iter().zip(&hi).map(|(&a, &b)| a + p * b).collect();
            out.push(RotationMatrix {
                modulus,
                n,
                entries,
            });
        }
    }
    Ok(out)
}

/// `count` uniform samples from `GL_n(Z/p^kZ)` by rejection.
pub fn sample_gl(p: u64, k: u32, n: usize, count: usize, seed: u64) -> Result<Vec<RotationMatrix>> {
    let modulus = pow_or_err(p, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let entries: Vec<u64> = (0..n * n).map(|_| rng.gen_range(0..modulus)).collect();
        if det_mod_p(&entries, n, p) != 0 {
            out.push(RotationMatrix {
                modulus,
                n,
                entries,
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct RotationSearch {
    pub best: RotationMatrix,
    pub rank: usize,
    pub exhaustive: bool,
    pub candidates: usize,
    /// `|D| / |P(Z/p^kZ)^{n-1}|`.
    pub epsilon: Rational,
    /// `⌈ε · C(p^ℓ/ℓ + n, n)⌉`.
    pub rank_bound: BigInt,
}

impl RotationSearch {
    pub fn meets_bound(&self) -> bool {
        BigInt::from(self.rank) >= self.rank_bound
    }
}

/// Searches `W ∈ GL_n(Z/p^kZ)` maximizing `rank M_{p^ℓ,n}(D'_W)`:
/// exhaustively when the group has at most `budget` elements, otherwise
/// over `budget` seeded samples. Ties go to the lexicographically least `W`.
pub fn best_rotation_rank(
    p: u64,
    k: u32,
    ell: u32,
    dirs: &[Direction],
    budget: usize,
    seed: u64,
) -> Result<RotationSearch> {
    let first = dirs
        .first()
        .ok_or_else(|| invalid("direction set must be nonempty"))?;
    let n = first.dim();
    let f = Factorization::prime_power(p, k)?;
    let m = build_m(p, ell, n)?;
    let order = gl_order(p, k, n)?;
    let exhaustive = order <= budget as u128;
    let candidates = if exhaustive {
        enumerate_gl(p, k, n)?
    } else {
        sample_gl(p, k, n, budget, seed)?
    };
    let ranks: Vec<usize> = candidates
        .par_iter()
        .map(|w| {
            let rotated: Vec<Direction> = dirs
                .iter()
                .map(|d| canonicalize_with(&w.apply(d.rep()), &f))
                .collect::<Result<_>>()?;
            let lifted = lift_directions(&rotated, p, k, ell)?;
            let rows: Vec<usize> = lifted.lifted.iter().map(|v| m.index(v)).collect();
            m.rank_of_rows(&rows)
        })
        .collect::<Result<_>>()?;
    let (best, rank) = candidates
        .iter()
        .zip(&ranks)
        .fold(None::<(&RotationMatrix, usize)>, |acc, (w, &r)| match acc {
            Some((bw, br)) if br > r || (br == r && bw <= w) => Some((bw, br)),
            _ => Some((w, r)),
        })
        .expect("at least one candidate");
    let total = projective_count(f.modulus(), n)?;
    let epsilon = Rational::new(BigInt::from(dirs.len()), BigInt::from(total));
    let x = Rational::new(m.q.into(), ell.into()) + rational_int(n as u64);
    let rank_bound = ceil_rational(&(&epsilon * binom_real(&x, n as u64)));
    Ok(RotationSearch {
        best: best.clone(),
        rank,
        exhaustive,
        candidates: candidates.len(),
        epsilon,
        rank_bound,
    })
}

#[derive(Clone, Debug)]
pub struct RichLineReport {
    pub p: u64,
    pub k: u32,
    pub ell: u32,
    pub m: u64,
    /// `⌈p^ℓ / m⌉`.
    pub b: u64,
    pub size: usize,
    /// `|S| · C(b + n - 1, n)`.
    pub lhs: BigUint,
    /// `rank_{F_p} M_{p^ℓ,n}(D')`.
    pub rhs: usize,
    pub directions: usize,
    /// Witness lines that are not `m`-rich, excluded from `D`.
    pub rejected: Vec<Direction>,
}

impl RichLineReport {
    pub fn pass(&self) -> bool {
        self.lhs >= BigUint::from(self.rhs)
    }
}

/// Both sides of `|S| C(⌈p^ℓ/m⌉ + n - 1, n) ≥ rank M_{p^ℓ,n}(D')`, with `D`
/// the directions whose witness line is `m`-rich in `S`.
pub fn rich_line_rank_inequality(
    set: &PointSet,
    m: u64,
    ell: u32,
    witness: &KakeyaWitness,
) -> Result<RichLineReport> {
    let f = crate::ring::factorize(set.modulus())?;
    if !f.is_prime_power() {
        return Err(invalid("rich-line inequality needs a prime-power modulus"));
    }
    let (p, k) = f.factors()[0];
    let n = set.dim();
    let q = pow_or_err(p, ell)?;
    if m == 0 || m > set.modulus() {
        return Err(invalid(format!("m = {m} must lie in [1, {}]", set.modulus())));
    }
    if q < m {
        return Err(invalid(format!("need p^ell >= m, got {q} < {m}")));
    }
    if ell < k {
        return Err(invalid(format!("need ell >= k = {k}")));
    }
    let mut dirs = Vec::new();
    let mut rejected = Vec::new();
    for line in witness.lines() {
        if line.dir().modulus() != set.modulus() || line.dir().dim() != n {
            return Err(Error::ModulusMismatch {
                expected: set.modulus(),
                found: line.dir().modulus(),
            });
        }
        if crate::geometry::richness(set, line) as u64 >= m {
            dirs.push(line.dir().clone());
        } else {
            rejected.push(line.dir().clone());
        }
    }
    let b = q.div_ceil(m);
    let lhs = BigUint::from(set.len()) * binom_exact(b + n as u64 - 1, n as u64);
    let rhs = if dirs.is_empty() {
        0
    } else {
        let mm = build_m(p, ell, n)?;
        let lifted = lift_directions(&dirs, p, k, ell)?;
        let rows: Vec<usize> = lifted.lifted.iter().map(|v| mm.index(v)).collect();
        mm.rank_of_rows(&rows)?
    };
    Ok(RichLineReport {
        p,
        k,
        ell,
        m,
        b,
        size: set.len(),
        lhs,
        rhs,
        directions: dirs.len(),
        rejected,
    })
}

#[cfg(test)]
mod tests;
