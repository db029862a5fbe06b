//! Exact arithmetic in `Q(ζ)` for `ζ` a primitive `p^k`-th root of unity,
//! polynomials over it, and the reduction map `ψ` that sends integers to
//! their residues mod `p` and `ζ` to `1`.
//!
//! Elements are stored densely on the power basis `1, ζ, …, ζ^{φ-1}` with
//! `φ = p^{k-1}(p-1)`, always reduced modulo `Φ_{p^k}`, so equality is
//! structural.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::ring::{inv_mod, is_prime, mul_mod, Rational};

/// The field `Q(ζ_{p^k}) = Q[x]/⟨Φ_{p^k}(x)⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CycloField {
    p: u64,
    k: u32,
}

impl CycloField {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(invalid(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(invalid("cyclotomic exponent must be positive"));
        }
        if p.checked_pow(k).map_or(true, |q| q > 1 << 20) {
            return Err(invalid("root-of-unity order too large"));
        }
        Ok(CycloField { p, k })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Multiplicative order of `ζ`, i.e. `p^k`.
    pub fn order(&self) -> u64 {
        self.p.pow(self.k)
    }

    /// `φ(p^k)`, the degree of the field over `Q`.
    pub fn degree(&self) -> usize {
        (self.p.pow(self.k - 1) * (self.p - 1)) as usize
    }

    fn stride(&self) -> usize {
        self.p.pow(self.k - 1) as usize
    }

    pub fn zero(&self) -> CycloNumber {
        CycloNumber {
            field: *self,
            coeffs: vec![Rational::zero(); self.degree()],
        }
    }

    pub fn one(&self) -> CycloNumber {
        self.from_rational(Rational::one())
    }

    pub fn from_int(&self, x: i64) -> CycloNumber {
        self.from_rational(Rational::from_integer(BigInt::from(x)))
    }

    pub fn from_rational(&self, x: Rational) -> CycloNumber {
        let mut out = self.zero();
        out.coeffs[0] = x;
        out
    }

    /// Reduces an arbitrary-length power-basis coefficient list.
    pub fn from_coeffs(&self, coeffs: Vec<Rational>) -> CycloNumber {
        CycloNumber {
            field: *self,
            coeffs: self.reduce(coeffs),
        }
    }

    pub fn from_int_coeffs(&self, coeffs: &[i64]) -> CycloNumber {
        self.from_coeffs(
            coeffs
                .iter()
                .map(|&c| Rational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    /// `ζ^e`, with `e` taken modulo `p^k`.
    pub fn zeta_pow(&self, e: i64) -> CycloNumber {
        let e = e.rem_euclid(self.order() as i64) as usize;
        let mut coeffs = vec![Rational::zero(); e + 1];
        coeffs[e] = Rational::one();
        self.from_coeffs(coeffs)
    }

    pub fn zeta(&self) -> CycloNumber {
        self.zeta_pow(1)
    }

    fn reduce(&self, mut c: Vec<Rational>) -> Vec<Rational> {
        let d = self.degree();
        let stride = self.stride();
        // x^d = -sum_{i=0}^{p-2} x^{i*stride}
        for e in (d..c.len()).rev() {
            if c[e].is_zero() {
                continue;
            }
            let lead = std::mem::take(&mut c[e]);
            let base = e - d;
            for i in 0..(self.p as usize - 1) {
                c[base + i * stride] -= &lead;
            }
        }
        c.resize(d, Rational::zero());
        c
    }
}

/// `Φ_{p^k}(x) = Σ_{i=0}^{p-1} x^{i p^{k-1}}`, coefficients low to high.
pub fn cyclotomic_poly(p: u64, k: u32) -> Result<Vec<i64>> {
    let field = CycloField::new(p, k)?;
    let stride = field.stride();
    let mut coeffs = vec![0i64; field.degree() + 1];
    for i in 0..p as usize {
        coeffs[i * stride] = 1;
    }
    Ok(coeffs)
}

/// An element of `Q(ζ_{p^k})`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloNumber {
    field: CycloField,
    coeffs: Vec<Rational>,
}

impl CycloNumber {
    pub fn field(&self) -> CycloField {
        self.field
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    fn check(&self, other: &Self) {
        assert_eq!(
            self.field, other.field,
            "cyclotomic operands live in different fields"
        );
    }

    pub fn scale(&self, s: &Rational) -> Self {
        CycloNumber {
            field: self.field,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn scale_int(&self, s: &BigInt) -> Self {
        self.scale(&Rational::from_integer(s.clone()))
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Multiplicative inverse, solving `x · a = 1` over the power basis.
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::ZeroInverse);
        }
        let d = self.field.degree();
        // column j holds the coordinates of self * ζ^j
        let mut cols = Vec::with_capacity(d);
        let mut cur = self.clone();
        let zeta = self.field.zeta();
        for _ in 0..d {
            cols.push(cur.coeffs.clone());
            cur = &cur * &zeta;
        }
        let mut system: Vec<Vec<Rational>> = (0..d)
            .map(|i| {
                let mut row: Vec<Rational> = (0..d).map(|j| cols[j][i].clone()).collect();
                row.push(if i == 0 { Rational::one() } else { Rational::zero() });
                row
            })
            .collect();
        let x = solve_augmented(&mut system).ok_or(Error::ZeroInverse)?;
        Ok(CycloNumber {
            field: self.field,
            coeffs: x,
        })
    }

    /// Smallest positive integer `d` with `d · self ∈ Z[ζ]`.
    pub fn common_denominator(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// `ψ(self) ∈ F_p`: `ζ ↦ 1`, integers reduced mod `p`, the cleared
    /// denominator inverted mod `p`. Fails when the denominator is
    /// divisible by `p`.
    pub fn psi(&self) -> Result<u64> {
        let p = self.field.p;
        let d = self.common_denominator();
        let pb = BigInt::from(p);
        let d_mod = d.mod_floor(&pb);
        if d_mod.is_zero() {
            return Err(Error::NotPIntegral {
                p,
                denominator: d.to_string(),
            });
        }
        let mut num = BigInt::zero();
        for c in &self.coeffs {
            num += c.numer() * (&d / c.denom());
        }
        let num_mod = to_u64(&num.mod_floor(&pb));
        let inv = inv_mod(to_u64(&d_mod), p).expect("denominator is a unit mod p");
        Ok(mul_mod(num_mod, inv, p))
    }
}

fn to_u64(x: &BigInt) -> u64 {
    u64::try_from(x).expect("reduced residue fits in u64")
}

/// Gauss-Jordan on an augmented `n × (n+1)` system; `None` if singular.
pub(crate) fn solve_augmented(rows: &mut [Vec<Rational>]) -> Option<Vec<Rational>> {
    let n = rows.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for x in rows[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                let (src, dst) = if r < col {
                    let (a, b) = rows.split_at_mut(col);
                    (&b[0], &mut a[r])
                } else {
                    let (a, b) = rows.split_at_mut(r);
                    (&a[col], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    *d -= &factor * s;
                }
            }
        }
    }
    Some(rows.iter().map(|r| r[n].clone()).collect())
}

impl fmt::Debug for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CycloNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => c.to_string(),
                1 => format!("({c})ζ"),
                _ => format!("({c})ζ^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl<'a> Add<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn add(self, rhs: &CycloNumber) -> CycloNumber {
        self.check(rhs);
        CycloNumber {
            field: self.field,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<'a> Sub<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn sub(self, rhs: &CycloNumber) -> CycloNumber {
        self.check(rhs);
        CycloNumber {
            field: self.field,
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl<'a> Mul<&'a CycloNumber> for &'a CycloNumber {
    type Output = CycloNumber;
    fn mul(self, rhs: &CycloNumber) -> CycloNumber {
        self.check(rhs);
        let d = self.coeffs.len();
        let mut prod = vec![Rational::zero(); 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        self.field.from_coeffs(prod)
    }
}

impl Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber {
            field: self.field,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CycloNumber> for CycloNumber {
            type Output = CycloNumber;
            fn $m(self, rhs: CycloNumber) -> CycloNumber {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// A polynomial in one variable over `Q(ζ)`, coefficients low to high with
/// no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloPoly {
    field: CycloField,
    coeffs: Vec<CycloNumber>,
}

impl CycloPoly {
    pub fn zero(field: CycloField) -> Self {
        CycloPoly {
            field,
            coeffs: Vec::new(),
        }
    }

    pub fn constant(c: CycloNumber) -> Self {
        Self::new(c.field(), vec![c])
    }

    /// `z^e`.
    pub fn monomial(field: CycloField, e: usize) -> Self {
        let mut coeffs = vec![field.zero(); e + 1];
        coeffs[e] = field.one();
        CycloPoly { field, coeffs }
    }

    pub fn new(field: CycloField, mut coeffs: Vec<CycloNumber>) -> Self {
        while coeffs.last().is_some_and(CycloNumber::is_zero) {
            coeffs.pop();
        }
        CycloPoly { field, coeffs }
    }

    /// `Π (y - a_i)^{m_i}`.
    pub fn from_roots(field: CycloField, roots: &[(CycloNumber, usize)]) -> Self {
        let mut acc = CycloPoly::constant(field.one());
        for (a, m) in roots {
            let lin = CycloPoly::new(field, vec![-a, field.one()]);
            for _ in 0..*m {
                acc = acc.mul(&lin);
            }
        }
        acc
    }

    pub fn field(&self) -> CycloField {
        self.field
    }

    pub fn coeffs(&self) -> &[CycloNumber] {
        &self.coeffs
    }

    /// Coefficient of `z^i` (zero past the end).
    pub fn coeff(&self, i: usize) -> CycloNumber {
        self.coeffs.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) + &other.coeff(i)).collect();
        CycloPoly::new(self.field, coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| &self.coeff(i) - &other.coeff(i)).collect();
        CycloPoly::new(self.field, coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return CycloPoly::zero(self.field);
        }
        let mut out = vec![self.field.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        CycloPoly::new(self.field, out)
    }

    pub fn scale(&self, c: &CycloNumber) -> Self {
        CycloPoly::new(self.field, self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Remainder modulo a monic polynomial.
    pub fn rem_monic(&self, modulus: &CycloPoly) -> Result<Self> {
        let d = modulus
            .degree()
            .ok_or_else(|| invalid("cannot reduce modulo the zero polynomial"))?;
        if !modulus.coeffs[d].is_one() {
            return Err(invalid("modulus must be monic"));
        }
        let mut c = self.coeffs.clone();
        if c.len() <= d {
            return Ok(self.clone());
        }
        for e in (d..c.len()).rev() {
            if c[e].is_zero() {
                continue;
            }
            let lead = std::mem::replace(&mut c[e], self.field.zero());
            for i in 0..d {
                let t = &lead * &modulus.coeffs[i];
                c[e - d + i] = &c[e - d + i] - &t;
            }
        }
        c.truncate(d);
        Ok(CycloPoly::new(self.field, c))
    }

    pub fn eval(&self, x: &CycloNumber) -> CycloNumber {
        self.coeffs
            .iter()
            .rev()
            .fold(self.field.zero(), |acc, c| &(&acc * x) + c)
    }

    /// Univariate Hasse derivative: coefficient of `ε^j` in `f(z + ε)`.
    pub fn hasse(&self, j: usize) -> Self {
        if self.coeffs.len() <= j {
            return CycloPoly::zero(self.field);
        }
        let coeffs = (j..self.coeffs.len())
            .map(|e| {
                let b = crate::ring::binom_exact(e as u64, j as u64);
                self.coeffs[e].scale_int(&BigInt::from(b))
            })
            .collect();
        CycloPoly::new(self.field, coeffs)
    }
}

impl fmt::Debug for CycloPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| format!("[{c}]z^{i}"))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Coefficient-wise `ψ` into `F_p[z]`, trailing zeros trimmed.
pub fn psi_poly(f: &CycloPoly) -> Result<Vec<u64>> {
    let mut out = f
        .coeffs()
        .iter()
        .map(CycloNumber::psi)
        .collect::<Result<Vec<u64>>>()?;
    while out.last() == Some(&0) {
        out.pop();
    }
    Ok(out)
}

/// `ψ(f)` reduced into `T̄_ℓ = F_p[z]/⟨z^{p^ℓ} - 1⟩`, as a dense vector of
/// length `p^ℓ`.
pub fn psi_poly_tbar(f: &CycloPoly, ell: u32) -> Result<Vec<u64>> {
    let p = f.field().p();
    let len = p.pow(ell) as usize;
    let mut out = vec![0u64; len];
    for (i, c) in psi_poly(f)?.into_iter().enumerate() {
        out[i % len] = (out[i % len] + c) % p;
    }
    Ok(out)
}

/// Reduces an exact integer into `[0, p)`.
pub fn int_mod_p(x: &BigInt, p: u64) -> u64 {
    let r = x.mod_floor(&BigInt::from(p));
    debug_assert!(!r.is_negative());
    to_u64(&r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_number(field: CycloField, rng: &mut ChaCha8Rng, p_integral: bool) -> CycloNumber {
        let coeffs = (0..field.degree())
            .map(|_| {
                let num = rng.gen_range(-6i64..=6);
                let mut den = rng.gen_range(1i64..=5);
                if p_integral {
                    while den % field.p() as i64 == 0 {
                        den = rng.gen_range(1i64..=5);
                    }
                }
                rational(num, den)
            })
            .collect();
        field.from_coeffs(coeffs)
    }

    const FIELDS: [(u64, u32); 4] = [(2, 2), (3, 1), (2, 3), (3, 2)];

    #[test]
    fn cyclotomic_poly_examples() {
        assert_eq!(cyclotomic_poly(2, 1).unwrap(), vec![1, 1]);
        assert_eq!(cyclotomic_poly(2, 2).unwrap(), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(3, 1).unwrap(), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly(3, 2).unwrap(), vec![1, 0, 0, 1, 0, 0, 1]);
    }

    #[test]
    fn zeta_examples() {
        let f = CycloField::new(2, 2).unwrap();
        assert_eq!(&f.zeta() * &f.zeta(), f.from_int(-1));
        for &(p, k) in &FIELDS {
            let f = CycloField::new(p, k).unwrap();
            assert!(f.zeta_pow(f.order() as i64).is_one());
            assert_eq!(f.zeta().inv().unwrap(), f.zeta_pow(f.order() as i64 - 1));
            assert_eq!(f.zeta().pow(f.order()), f.one());
            assert_ne!(f.zeta().pow(f.order() / p), f.one());
        }
    }

    #[test]
    fn phi_vanishes_at_zeta() {
        for &(p, k) in &FIELDS {
            let f = CycloField::new(p, k).unwrap();
            let phi = cyclotomic_poly(p, k).unwrap();
            let mut acc = f.zero();
            for (e, c) in phi.iter().enumerate() {
                acc = &acc + &f.zeta_pow(e as i64).scale_int(&BigInt::from(*c));
            }
            assert!(acc.is_zero());
            let at_one: i64 = phi.iter().sum();
            assert_eq!(at_one.rem_euclid(p as i64), 0);
        }
    }

    #[test]
    fn inverting_zero_fails() {
        let f = CycloField::new(3, 1).unwrap();
        assert!(matches!(f.zero().inv(), Err(Error::ZeroInverse)));
    }

    #[test]
    fn field_axioms_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(p, k) in &FIELDS {
            let f = CycloField::new(p, k).unwrap();
            for _ in 0..1000 {
                let a = random_number(f, &mut rng, false);
                let b = random_number(f, &mut rng, false);
                let c = random_number(f, &mut rng, false);
                assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
                assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
                assert_eq!(&a * &b, &b * &a);
                if !a.is_zero() {
                    assert!((&a * &a.inv().unwrap()).is_one());
                }
            }
        }
    }

    #[test]
    fn psi_examples() {
        let f = CycloField::new(2, 2).unwrap();
        assert_eq!(f.zeta().psi().unwrap(), 1);
        let x = &f.from_int(3) + &f.zeta().scale_int(&BigInt::from(2));
        assert_eq!(x.psi().unwrap(), 1);
        assert_eq!(f.from_rational(rational(1, 3)).psi().unwrap(), 1);
        assert!(matches!(
            f.from_rational(rational(1, 2)).psi(),
            Err(Error::NotPIntegral { .. })
        ));
        let g = CycloField::new(5, 1).unwrap();
        assert_eq!(g.from_rational(rational(1, 3)).psi().unwrap(), 2);
    }

    #[test]
    fn psi_is_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(p, k) in &FIELDS {
            let f = CycloField::new(p, k).unwrap();
            for _ in 0..1000 {
                let a = random_number(f, &mut rng, true);
                let b = random_number(f, &mut rng, true);
                let (pa, pb) = (a.psi().unwrap(), b.psi().unwrap());
                assert_eq!((&a + &b).psi().unwrap(), (pa + pb) % p);
                assert_eq!((&a * &b).psi().unwrap(), pa * pb % p);
            }
        }
    }

    #[test]
    fn psi_poly_examples() {
        let f = CycloField::new(3, 1).unwrap();
        let poly = CycloPoly::new(f, vec![f.from_int(3), f.zero(), f.zero(), f.one()]);
        assert_eq!(psi_poly(&poly).unwrap(), vec![0, 0, 0, 1]);
        assert_eq!(psi_poly(&CycloPoly::constant(f.zeta())).unwrap(), vec![1]);

        // h(y) = Π (y - ζ^λ)^{π(λ)} with Σπ = p^ℓ maps to z^{p^ℓ} - 1
        let f = CycloField::new(2, 2).unwrap();
        let roots: Vec<(CycloNumber, usize)> =
            vec![(f.zeta_pow(0), 3), (f.zeta_pow(1), 1), (f.zeta_pow(3), 4)];
        let h = CycloPoly::from_roots(f, &roots);
        let mut expect = vec![0u64; 9];
        expect[0] = 1;
        expect[8] = 1;
        assert_eq!(psi_poly(&h).unwrap(), expect);
    }

    #[test]
    fn rem_monic_and_eval() {
        let f = CycloField::new(3, 1).unwrap();
        let h = CycloPoly::from_roots(f, &[(f.one(), 1), (f.zeta(), 2)]);
        let g = CycloPoly::monomial(f, 7);
        let r = g.rem_monic(&h).unwrap();
        assert!(r.degree().unwrap() < 3);
        // remainder agrees with g at the simple root
        assert_eq!(r.eval(&f.one()), g.eval(&f.one()));
        assert_eq!(r.eval(&f.zeta()), g.eval(&f.zeta()));
        assert_eq!(r.hasse(1).eval(&f.zeta()), g.hasse(1).eval(&f.zeta()));
    }
}
