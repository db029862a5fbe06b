//! Arithmetic in `Z/NZ`: factorization, units, CRT, base-`p` digits,
//! valuations and binomial coefficients.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Exact rationals used for every bound and every cyclotomic coefficient.
pub type Rational = BigRational;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// `base^exp`, or `None` on overflow.
pub fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

pub(crate) fn pow_or_err(base: u64, exp: u32) -> Result<u64> {
    checked_pow(base, exp).ok_or_else(|| invalid(format!("{base}^{exp} overflows u64")))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// `N = p_1^{k_1} ... p_r^{k_r}` with strictly increasing primes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factorization {
    modulus: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Builds a factorization from explicit `(p, k)` pairs, validating that
    /// the primes are distinct, sorted and every exponent is positive.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(invalid("factorization needs at least one prime"));
        }
        let mut modulus = 1u64;
        let mut prev = 0u64;
        for &(p, k) in &factors {
            if !is_prime(p) {
                return Err(invalid(format!("{p} is not prime")));
            }
            if p <= prev {
                return Err(invalid("primes must be strictly increasing"));
            }
            if k == 0 {
                return Err(invalid("exponents must be positive"));
            }
            modulus = modulus
                .checked_mul(pow_or_err(p, k)?)
                .ok_or_else(|| invalid("modulus overflows u64"))?;
            prev = p;
        }
        Ok(Factorization { modulus, factors })
    }

    pub fn prime_power(p: u64, k: u32) -> Result<Self> {
        Self::from_factors(vec![(p, k)])
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// The moduli `p_i^{k_i}` in prime order.
    pub fn prime_powers(&self) -> Vec<u64> {
        self.factors.iter().map(|&(p, k)| p.pow(k)).collect()
    }

    pub fn num_primes(&self) -> usize {
        self.factors.len()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, k)| k == 1)
    }

    pub fn is_prime_power(&self) -> bool {
        self.factors.len() == 1
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|&(p, k)| if k == 1 { p.to_string() } else { format!("{p}^{k}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Trial-division factorization. Deterministic, ordered by prime.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n < 2 {
        return Err(invalid(format!("cannot factor {n}: modulus must be at least 2")));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            let mut k = 0;
            while rest % d == 0 {
                rest /= d;
                k += 1;
            }
            factors.push((d, k));
        }
        d += 1;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { modulus: n, factors })
}

/// A residue in `[0, N)` together with its modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ZmodElem {
    value: u64,
    modulus: u64,
}

impl ZmodElem {
    /// Reduces `value` into `[0, modulus)`.
    pub fn new(value: u64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(invalid("modulus must be positive"));
        }
        Ok(ZmodElem {
            value: value % modulus,
            modulus,
        })
    }

    pub fn from_i64(value: i64, modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(invalid("modulus must be positive"));
        }
        Ok(ZmodElem {
            value: value.rem_euclid(modulus as i64) as u64,
            modulus,
        })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_unit(self) -> bool {
        gcd(self.value, self.modulus) == 1
    }

    pub fn inverse(self) -> Option<Self> {
        inv_mod(self.value, self.modulus).map(|value| ZmodElem {
            value,
            modulus: self.modulus,
        })
    }

    pub fn add(self, other: Self) -> Result<Self> {
        self.same_modulus(other)?;
        Ok(ZmodElem {
            value: ((self.value as u128 + other.value as u128) % self.modulus as u128) as u64,
            modulus: self.modulus,
        })
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        self.same_modulus(other)?;
        Ok(ZmodElem {
            value: mul_mod(self.value, other.value, self.modulus),
            modulus: self.modulus,
        })
    }

    fn same_modulus(self, other: Self) -> Result<()> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                expected: self.modulus,
                found: other.modulus,
            });
        }
        Ok(())
    }
}

impl fmt::Display for ZmodElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

/// Residues of `x` modulo each prime power of `f`.
pub fn crt_split(x: ZmodElem, f: &Factorization) -> Result<Vec<ZmodElem>> {
    if x.modulus != f.modulus() {
        return Err(Error::ModulusMismatch {
            expected: f.modulus(),
            found: x.modulus,
        });
    }
    Ok(f
        .prime_powers()
        .into_iter()
        .map(|q| ZmodElem {
            value: x.value % q,
            modulus: q,
        })
        .collect())
}

/// Inverse of [`crt_split`].
pub fn crt_combine(parts: &[ZmodElem], f: &Factorization) -> Result<ZmodElem> {
    let qs = f.prime_powers();
    if parts.len() != qs.len() {
        return Err(invalid(format!(
            "expected {} residues, got {}",
            qs.len(),
            parts.len()
        )));
    }
    for (part, &q) in parts.iter().zip(&qs) {
        if part.modulus != q {
            return Err(Error::ModulusMismatch {
                expected: q,
                found: part.modulus,
            });
        }
    }
    let values: Vec<u64> = parts.iter().map(|x| x.value).collect();
    Ok(ZmodElem {
        value: CrtBasis::new(f).combine(&values),
        modulus: f.modulus(),
    })
}

/// Precomputed idempotents `e_i` with `e_i = 1 mod q_i`, `0 mod q_j`.
#[derive(Clone, Debug)]
pub struct CrtBasis {
    modulus: u64,
    idempotents: Vec<u64>,
}

impl CrtBasis {
    pub fn new(f: &Factorization) -> Self {
        let n = f.modulus();
        let idempotents = f
            .prime_powers()
            .into_iter()
            .map(|q| {
                let rest = n / q;
                // rest is coprime to q by construction
                let inv = inv_mod(rest % q, q).expect("cofactor is a unit");
                mul_mod(rest, inv, n)
            })
            .collect();
        CrtBasis {
            modulus: n,
            idempotents,
        }
    }

    pub fn combine(&self, residues: &[u64]) -> u64 {
        residues
            .iter()
            .zip(&self.idempotents)
            .fold(0u64, |acc, (&r, &e)| {
                ((acc as u128 + mul_mod(r, e, self.modulus) as u128) % self.modulus as u128) as u64
            })
    }
}

/// Base-`p` digits of `x`, least significant first, padded to `len`.
pub fn p_digits(x: u64, p: u64, len: u32) -> Result<Vec<u64>> {
    if p < 2 {
        return Err(invalid("digit base must be at least 2"));
    }
    if let Some(limit) = checked_pow(p, len) {
        if x >= limit {
            return Err(invalid(format!("{x} does not fit in {len} base-{p} digits")));
        }
    }
    let mut rest = x;
    let digits = (0..len)
        .map(|_| {
            let d = rest % p;
            rest /= p;
            d
        })
        .collect();
    Ok(digits)
}

/// Horner evaluation of a little-endian digit list.
pub fn from_p_digits(digits: &[u64], p: u64) -> u64 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Largest `t` with `p^t | x`.
pub fn p_valuation(x: u64, p: u64) -> Result<u32> {
    if x == 0 {
        return Err(invalid("valuation of 0 is infinite"));
    }
    if p < 2 {
        return Err(invalid("valuation base must be at least 2"));
    }
    let mut t = 0;
    let mut rest = x;
    while rest % p == 0 {
        rest /= p;
        t += 1;
    }
    Ok(t)
}

fn small_binom_mod(a: u64, b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    // a < p here, so all factors are units
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..b {
        num = mul_mod(num, a - i, p);
        den = mul_mod(den, i + 1, p);
    }
    mul_mod(num, inv_mod(den, p).expect("p prime"), p)
}

/// `C(a, b) mod p` computed digit by digit (Lucas).
pub fn lucas_binom(mut a: u64, mut b: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    while b > 0 || a > 0 {
        let (ad, bd) = (a % p, b % p);
        if bd > ad {
            return 0;
        }
        acc = mul_mod(acc, small_binom_mod(ad, bd, p), p);
        a /= p;
        b /= p;
    }
    acc
}

pub fn binom_exact(a: u64, b: u64) -> BigUint {
    if b > a {
        return BigUint::zero();
    }
    let b = b.min(a - b);
    let mut acc = BigUint::one();
    for i in 0..b {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// Generalized binomial `C(x, n) = prod_{i=1}^{n} (x - n + i) / i`.
pub fn binom_real(x: &Rational, n: u64) -> Rational {
    let mut acc = Rational::one();
    for i in 1..=n {
        let top = x - Rational::from_integer(BigInt::from(n)) + Rational::from_integer(BigInt::from(i));
        acc = acc * top / Rational::from_integer(BigInt::from(i));
    }
    acc
}

pub fn ceil_rational(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor_rational(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

pub fn rational(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rational_int(x: impl Into<BigInt>) -> Rational {
    Rational::from_integer(x.into())
}

/// Smallest `e >= 0` with `p^e >= n`.
pub fn ceil_log(p: u64, n: u64) -> u32 {
    let mut e = 0;
    let mut acc = 1u128;
    while acc < n as u128 {
        acc *= p as u128;
        e += 1;
    }
    e
}

/// Euler's totient from a factorization.
pub fn totient(f: &Factorization) -> u64 {
    f.factors()
        .iter()
        .map(|&(p, k)| p.pow(k - 1) * (p - 1))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_examples() {
        assert_eq!(factorize(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(81).unwrap().factors(), &[(3, 4)]);
        assert!(factorize(1).is_err());
        assert!(factorize(0).is_err());
        assert_eq!(factorize(97).unwrap().factors(), &[(97, 1)]);
    }

    #[test]
    fn factorization_product_matches() {
        for n in 2..2000u64 {
            let f = factorize(n).unwrap();
            let prod: u64 = f.prime_powers().iter().product();
            assert_eq!(prod, n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn from_factors_rejects_bad_input() {
        assert!(Factorization::from_factors(vec![(4, 1)]).is_err());
        assert!(Factorization::from_factors(vec![(3, 1), (2, 1)]).is_err());
        assert!(Factorization::from_factors(vec![(2, 0)]).is_err());
        assert!(Factorization::from_factors(vec![]).is_err());
    }

    #[test]
    fn units() {
        assert!(ZmodElem::new(3, 4).unwrap().is_unit());
        assert!(!ZmodElem::new(2, 4).unwrap().is_unit());
        assert!(!ZmodElem::new(0, 5).unwrap().is_unit());
    }

    #[test]
    fn crt_examples() {
        let f = factorize(12).unwrap();
        let parts = crt_split(ZmodElem::new(7, 12).unwrap(), &f).unwrap();
        assert_eq!(parts, vec![ZmodElem::new(3, 4).unwrap(), ZmodElem::new(1, 3).unwrap()]);
        let zero = crt_split(ZmodElem::new(0, 12).unwrap(), &f).unwrap();
        assert!(zero.iter().all(|x| x.value() == 0));
        assert!(crt_split(ZmodElem::new(1, 10).unwrap(), &f).is_err());
        let bad = [ZmodElem::new(1, 3).unwrap(), ZmodElem::new(1, 4).unwrap()];
        assert!(crt_combine(&bad, &f).is_err());
    }

    #[test]
    fn crt_roundtrip_exhaustive() {
        for n in 2..=10_000u64 {
            let f = factorize(n).unwrap();
            let basis = CrtBasis::new(&f);
            let qs = f.prime_powers();
            let mut residues = vec![0u64; qs.len()];
            for x in 0..n {
                for (r, q) in residues.iter_mut().zip(&qs) {
                    *r = x % q;
                }
                assert_eq!(basis.combine(&residues), x, "n={n} x={x}");
            }
        }
    }

    #[test]
    fn crt_roundtrip_full_small() {
        for n in 2..=300u64 {
            let f = factorize(n).unwrap();
            for x in 0..n {
                let e = ZmodElem::new(x, n).unwrap();
                let parts = crt_split(e, &f).unwrap();
                assert_eq!(crt_combine(&parts, &f).unwrap(), e);
                assert_eq!(e.is_unit(), parts.iter().all(|p| p.is_unit()));
            }
        }
    }

    #[test]
    fn digits_examples() {
        assert_eq!(p_digits(11, 2, 4).unwrap(), vec![1, 1, 0, 1]);
        assert_eq!(p_digits(0, 5, 3).unwrap(), vec![0, 0, 0]);
        assert_eq!(p_digits(5, 3, 4).unwrap(), vec![2, 1, 0, 0]);
        assert!(p_digits(16, 2, 4).is_err());
        for x in 0..243 {
            assert_eq!(from_p_digits(&p_digits(x, 3, 5).unwrap(), 3), x);
        }
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(p_valuation(12, 2).unwrap(), 2);
        assert_eq!(p_valuation(5, 5).unwrap(), 1);
        assert_eq!(p_valuation(7, 3).unwrap(), 0);
        assert!(p_valuation(0, 3).is_err());
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(lucas_binom(5, 2, 3), 1);
        assert_eq!(lucas_binom(10, 4, 3), 0);
        assert_eq!(lucas_binom(17, 0, 7), 1);
        assert_eq!(lucas_binom(0, 0, 2), 1);
    }

    #[test]
    fn lucas_matches_exact() {
        for &p in &[2u64, 3, 5, 7] {
            for a in 0..=200u64 {
                for b in 0..=200u64 {
                    let exact = binom_exact(a, b) % BigUint::from(p);
                    assert_eq!(BigUint::from(lucas_binom(a, b, p)), exact, "C({a},{b}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn binom_examples() {
        assert_eq!(binom_exact(4, 2), BigUint::from(6u32));
        assert_eq!(binom_exact(2, 5), BigUint::zero());
        let x = rational(9, 2) + rational_int(2);
        let c = binom_real(&x, 2);
        assert_eq!(c, rational(143, 8));
        assert_eq!(ceil_rational(&c), BigInt::from(18));
        assert_eq!(binom_real(&rational(7, 3), 0), rational_int(1));
        assert_eq!(binom_real(&rational_int(10), 3), rational_int(120));
    }

    #[test]
    fn inverse_and_ceil_log() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
        assert_eq!(ceil_log(2, 1), 0);
        assert_eq!(ceil_log(2, 2), 1);
        assert_eq!(ceil_log(3, 2), 1);
        assert_eq!(ceil_log(2, 5), 3);
    }
}
