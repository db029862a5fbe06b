use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{encode, KakeyaWitness, PointSet, MAX_GRID};
use crate::error::{check_budget, invalid, Result};
use crate::geometry::{canonicalize_with, enumerate_projective, Line};
use crate::ring::{
    floor_rational, from_p_digits, is_prime, p_digits, pow_or_err, rational_int, CrtBasis,
    Factorization, Rational,
};

/// Work limit for tabulating `u ↦ t·u - g(u)` over all `t`.
const MAX_IMAGE_WORK: u128 = 1 << 31;
/// Largest point set a construction will emit.
const MAX_POINTS: u128 = 1 << 27;

/// The digit sequence `c_0, …, c_{k-1}` defining `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CSequence {
    p: u64,
    s: u32,
    k: u32,
    modulus: Option<u64>,
    values: Vec<u64>,
}

/// `k = (p^{s+1} - 1)/(p - 1)`.
fn sequence_length(p: u64, s: u32) -> Result<u32> {
    let top = pow_or_err(p, s + 1)?;
    u32::try_from((top - 1) / (p - 1)).map_err(|_| invalid("sequence length overflows"))
}

/// `k = (p^{s+1} - 1)/(p - 1)`.
pub fn admissible_k(p: u64, s: u32) -> Result<u32> {
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    sequence_length(p, s)
}

/// The `s` with `k = (p^{s+1} - 1)/(p - 1)`, if `k` has that form.
pub fn admissible_s(p: u64, k: u32) -> Option<u32> {
    (0..64).find(|&s| sequence_length(p, s).ok() == Some(k))
}

pub fn build_c_sequence(p: u64, s: u32) -> Result<CSequence> {
    if !is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    let k = sequence_length(p, s)?;
    let modulus = p.checked_pow(k);
    let len = k as usize;
    let mut values = vec![pow_or_err(p, s)? - 1];
    while values.len() < len {
        let c = *values.last().expect("nonempty");
        if c == 0 {
            values.push(0);
            continue;
        }
        let mut digits = p_digits(c, p, s)?;
        let top = s as usize - 1;
        if digits[top] > 0 {
            digits[top] -= 1;
            values.push(from_p_digits(&digits, p));
            continue;
        }
        let zeros = digits.iter().rev().take_while(|&&d| d == 0).count();
        let alpha = s as usize - zeros;
        for _ in 0..zeros {
            values.push(c);
        }
        digits[alpha - 1] -= 1;
        for d in &mut digits[alpha..] {
            *d = p - 1;
        }
        values.push(from_p_digits(&digits, p));
    }
    values.truncate(len);
    Ok(CSequence {
        p,
        s,
        k,
        modulus,
        values,
    })
}

impl CSequence {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `p^k`, when it fits in 64 bits.
    pub fn modulus(&self) -> Option<u64> {
        self.modulus
    }

    fn modulus_or_err(&self) -> Result<u64> {
        self.modulus
            .ok_or_else(|| invalid(format!("{}^{} does not fit in 64 bits", self.p, self.k)))
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// For every `t' < p^s` first reached at index `β`,
    /// `c_{β+i} ≡ t' (mod p^{s-i})` for `0 ≤ i < s` (indices past the end
    /// are skipped).
    pub fn statement_one_holds(&self) -> bool {
        let ps = self.p.pow(self.s);
        (0..ps).all(|t| {
            let Some(beta) = self.values.iter().position(|&c| c == t) else {
                return false;
            };
            (0..self.s).all(|i| {
                let m = self.p.pow(self.s - i);
                self.values
                    .get(beta + i as usize)
                    .map_or(true, |&c| c % m == t % m)
            })
        })
    }

    /// Every value in `[0, p^s)` occurs; a nonzero value occurs at most one
    /// more time than its run of zero high-order digits; 0 occurs exactly
    /// `s + 1` times.
    pub fn multiplicity_audit(&self) -> bool {
        let ps = self.p.pow(self.s);
        let mut counts = vec![0u32; ps as usize];
        for &c in &self.values {
            counts[c as usize] += 1;
        }
        counts.iter().enumerate().all(|(v, &count)| {
            if v == 0 {
                return count == self.s + 1;
            }
            let digits = p_digits(v as u64, self.p, self.s).expect("value below p^s");
            let zeros = digits.iter().rev().take_while(|&&d| d == 0).count() as u32;
            count >= 1 && count <= zeros + 1
        })
    }

    /// `g(u)` for every `u ∈ Z/p^kZ`.
    fn g_table(&self) -> Result<Vec<u64>> {
        (0..self.modulus_or_err()?).map(|u| g_eval(u, self)).collect()
    }
}

/// `g(Σ a_j p^j) = Σ a_j c_j p^j mod p^k`.
pub fn g_eval(u: u64, c: &CSequence) -> Result<u64> {
    let q = c.modulus_or_err()?;
    if u >= q {
        return Err(invalid(format!("{u} is not a residue mod {q}")));
    }
    let q = q as u128;
    let mut acc = 0u128;
    let mut rest = u;
    let mut pj = 1u128;
    for &cj in &c.values {
        let a = (rest % c.p) as u128;
        rest /= c.p;
        acc = (acc + a * cj as u128 % q * pj) % q;
        pj = pj * c.p as u128 % q;
    }
    Ok(acc as u64)
}

/// Sorted image of `u ↦ t·u - g(u)` for each `t`, from a `g` table.
fn slice_images(g: &[u64], ts: impl Iterator<Item = u64>) -> Vec<(u64, Vec<u64>)> {
    let q = g.len() as u64;
    let mut mark = vec![usize::MAX; g.len()];
    ts.enumerate().map(|(stamp, t)| {
        let mut image = Vec::new();
        for (u, &gu) in g.iter().enumerate() {
            let x = ((t as u128 * u as u128 % q as u128) as u64 + q - gu) % q;
            if mark[x as usize] != stamp {
                mark[x as usize] = stamp;
                image.push(x);
            }
        }
        image.sort_unstable();
        (t, image)
    })
    .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GImageMode {
    /// Every `t ∈ Z/p^kZ`; requires `p^k ≤ 10^4`.
    Exhaustive,
    /// `samples` values of `t` drawn with a seeded generator, plus `t = 0`.
    Sampled { samples: usize, seed: u64 },
}

/// Largest image of `u ↦ t·u - g(u)` over the checked `t`.
#[derive(Clone, Debug)]
pub struct GImageReport {
    pub p: u64,
    pub s: u32,
    pub k: u32,
    pub exhaustive: bool,
    pub checked: usize,
    pub max_image: u64,
    pub argmax_t: u64,
    /// Image size at `t = 0`, i.e. the number of values of `g`.
    pub image_at_zero: u64,
    /// `p^k / (k (1 - 1/p))`.
    pub bound: Rational,
    /// `p^{k-s}`.
    pub sharp_bound: u64,
}

impl GImageReport {
    /// `max_image ≤ ⌊p^k / (k (1 - 1/p))⌋`.
    pub fn pass(&self) -> bool {
        rational_int(self.max_image) <= rational_int(floor_rational(&self.bound))
    }

    pub fn sharp_pass(&self) -> bool {
        self.max_image <= self.sharp_bound
    }
}

pub fn g_image_check(p: u64, s: u32, mode: GImageMode) -> Result<GImageReport> {
    let c = build_c_sequence(p, s)?;
    let q = c.modulus_or_err()?;
    let ts: Vec<u64> = match mode {
        GImageMode::Exhaustive => {
            if q > 10_000 {
                return Err(invalid(format!(
                    "exhaustive check needs p^k <= 10^4, got {q}"
                )));
            }
            (0..q).collect()
        }
        GImageMode::Sampled { samples, seed } => {
            check_budget("sampled image work", q as u128 * (samples as u128 + 1), MAX_IMAGE_WORK)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            std::iter::once(0)
                .chain((0..samples).map(|_| rng.gen_range(0..q)))
                .collect()
        }
    };
    let g = c.g_table()?;
    let images = slice_images(&g, ts.iter().copied());
    let (argmax_t, max_image) = images
        .iter()
        .map(|(t, im)| (*t, im.len() as u64))
        .fold((0, 0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let bound = rational_int(q)
        / (rational_int(c.k) * (Rational::from_integer(1.into()) - Rational::new(1.into(), p.into())));
    Ok(GImageReport {
        p,
        s,
        k: c.k,
        exhaustive: mode == GImageMode::Exhaustive,
        checked: images.len(),
        max_image,
        argmax_t,
        image_at_zero: images[0].1.len() as u64,
        bound,
        sharp_bound: p.pow(c.k - s),
    })
}

/// A constructed set with a witness line for every direction it claims.
#[derive(Clone, Debug)]
pub struct Construction {
    pub set: PointSet,
    pub witness: KakeyaWitness,
    /// `(p, s, k, size of the prime-power component)` per prime.
    pub parts: Vec<(u64, u32, u32, usize)>,
}

/// Points `(t, t·u_2 - g(u_2), …, t·u_n - g(u_n))` with `t` placed at
/// coordinate `lead`, as grid codes.
fn permuted_copy(images: &[(u64, Vec<u64>)], q: u64, n: usize, lead: usize) -> Vec<u64> {
    let mut codes = Vec::new();
    let mut point = vec![0u64; n];
    for (t, image) in images {
        let mut idx = vec![0usize; n - 1];
        'odometer: loop {
            let mut free = idx.iter();
            for (c, x) in point.iter_mut().enumerate() {
                *x = if c == lead {
                    *t
                } else {
                    image[*free.next().expect("n - 1 free coordinates")]
                };
            }
            codes.push(encode(&point, q));
            for pos in (0..n - 1).rev() {
                idx[pos] += 1;
                if idx[pos] < image.len() {
                    continue 'odometer;
                }
                idx[pos] = 0;
            }
            break;
        }
    }
    codes
}

struct Tables {
    c: CSequence,
    q: u64,
    g: Vec<u64>,
    images: Vec<(u64, Vec<u64>)>,
}

fn tables(p: u64, s: u32, n: usize) -> Result<Tables> {
    if n == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let c = build_c_sequence(p, s)?;
    let q = c.modulus_or_err()?;
    let grid = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    check_budget("grid points N^n", grid, MAX_GRID)?;
    check_budget("slice image work", q as u128 * q as u128, MAX_IMAGE_WORK)?;
    let g = c.g_table()?;
    let images = slice_images(&g, 0..q);
    let size: u128 = images
        .iter()
        .map(|(_, im)| (im.len() as u128).pow(n as u32 - 1))
        .sum();
    check_budget("construction size", size * n as u128, MAX_POINTS)?;
    Ok(Tables { c, q, g, images })
}

/// `S_n`, which has a full line in every direction `(1, u_2, …, u_n)`.
pub fn construct_unit_first(p: u64, s: u32, n: usize) -> Result<Construction> {
    let t = tables(p, s, n)?;
    let q = t.q;
    let set = PointSet::from_codes(q, n, permuted_copy(&t.images, q, n, 0));
    let directions = (q as u128).pow(n as u32 - 1);
    check_budget("unit-first directions", directions, crate::geometry::MAX_DIRECTIONS)?;
    let f = Factorization::prime_power(p, t.c.k)?;
    let mut witness = KakeyaWitness::new();
    for code in 0..directions as u64 {
        let tail = super::decode(code, q, n - 1);
        let mut rep = vec![1u64];
        rep.extend_from_slice(&tail);
        let mut base = vec![0u64];
        base.extend(tail.iter().map(|&u| (q - t.g[u as usize]) % q));
        witness.insert(Line::new(base, canonicalize_with(&rep, &f)?)?);
    }
    let size = set.len();
    Ok(Construction {
        set,
        witness,
        parts: vec![(p, s, t.c.k, size)],
    })
}

/// Union of the `n` coordinate-permuted copies of `S_n`: a Kakeya set in
/// `(Z/p^kZ)^n` with `k = (p^{s+1} - 1)/(p - 1)`.
pub fn construct_kakeya_pk(p: u64, s: u32, n: usize) -> Result<Construction> {
    let t = tables(p, s, n)?;
    let q = t.q;
    let mut codes = Vec::new();
    for lead in 0..n {
        codes.extend(permuted_copy(&t.images, q, n, lead));
    }
    let set = PointSet::from_codes(q, n, codes);
    let mut witness = KakeyaWitness::new();
    for dir in enumerate_projective(q, n)? {
        let lead = dir
            .rep()
            .iter()
            .position(|x| x % p != 0)
            .expect("projective");
        let base = dir
            .rep()
            .iter()
            .enumerate()
            .map(|(i, &u)| if i == lead { 0 } else { (q - t.g[u as usize]) % q })
            .collect();
        witness.insert(Line::new(base, dir)?);
    }
    let size = set.len();
    Ok(Construction {
        set,
        witness,
        parts: vec![(p, s, t.c.k, size)],
    })
}

/// CRT product of the prime-power constructions for `N = Π p_i^{k_i}`.
pub fn construct_kakeya_n(spec: &[(u64, u32)], n: usize) -> Result<Construction> {
    let mut spec = spec.to_vec();
    spec.sort_unstable();
    if spec.is_empty() {
        return Err(invalid("construction needs at least one prime"));
    }
    if spec.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(invalid("primes in a construction must be distinct"));
    }
    let parts: Vec<Construction> = spec
        .iter()
        .map(|&(p, s)| construct_kakeya_pk(p, s, n))
        .collect::<Result<_>>()?;
    if parts.len() == 1 {
        return Ok(parts.into_iter().next().expect("one part"));
    }
    let f = Factorization::from_factors(
        parts
            .iter()
            .map(|c| (c.parts[0].0, c.parts[0].2))
            .collect(),
    )?;
    let sets: Vec<PointSet> = parts.iter().map(|c| c.set.clone()).collect();
    let set = PointSet::crt_product(&sets, &f)?;
    let basis = CrtBasis::new(&f);
    let subs: Vec<Factorization> = f
        .factors()
        .iter()
        .map(|&(p, k)| Factorization::prime_power(p, k))
        .collect::<Result<_>>()?;
    let mut witness = KakeyaWitness::new();
    for dir in enumerate_projective(f.modulus(), n)? {
        let mut bases = Vec::with_capacity(parts.len());
        for (part, sub) in parts.iter().zip(&subs) {
            let q = sub.modulus();
            let local: Vec<u64> = dir.rep().iter().map(|x| x % q).collect();
            let local = canonicalize_with(&local, sub)?;
            let line = part
                .witness
                .get(&local)
                .expect("component witness covers every direction");
            bases.push(line.base().to_vec());
        }
        let base = (0..n)
            .map(|c| {
                let residues: Vec<u64> = bases.iter().map(|b| b[c]).collect();
                basis.combine(&residues)
            })
            .collect();
        witness.insert(Line::new(base, dir)?);
    }
    Ok(Construction {
        set,
        witness,
        parts: parts.into_iter().flat_map(|c| c.parts).collect(),
    })
}
