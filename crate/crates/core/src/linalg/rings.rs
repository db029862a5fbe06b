use std::collections::HashSet;
use std::fmt;

use super::echelon::Echelon;
use super::fp_echelon::FpEchelon;
use super::{BaseRank, Field, QuotientRing, Ring, RingMatrix};
use crate::cyclotomic::{CycloField, CycloNumber, CycloPoly};
use crate::error::{invalid, Result};
use crate::ring::{inv_mod, is_prime};

/// The prime field `F_p` with residues stored as `u64` (`p < 2^31`).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Result<Self> {
        if !is_prime(p) || p >= 1 << 31 {
            return Err(invalid(format!("{p} is not a prime below 2^31")));
        }
        Ok(Fp { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }
}

impl fmt::Debug for Fp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}", self.p)
    }
}

impl Ring for Fp {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        (a + b) % self.p
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        (a + self.p - b) % self.p
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        a * b % self.p
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn contains(&self, a: &u64) -> bool {
        *a < self.p
    }
}

impl Field for Fp {
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            inv_mod(*a, self.p)
        }
    }
}

impl BaseRank for Fp {
    fn base_rank(m: &RingMatrix<Self>) -> usize {
        let mut seen = HashSet::new();
        let mut ech = FpEchelon::new(m.ring, m.cols());
        for r in 0..m.rows() {
            let row = m.row(r);
            if row.iter().all(|&x| x == 0) || !seen.insert(row) {
                continue;
            }
            ech.insert(row);
            if ech.is_full() {
                break;
            }
        }
        ech.rank()
    }
}

/// `F_p[z]/⟨f(z)⟩` for a monic `f` of positive degree; elements are dense
/// coefficient vectors of length `deg f`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpQuot {
    base: Fp,
    modulus: Vec<u64>,
    cyclic: bool,
}

impl FpQuot {
    /// `modulus` is given low to high and must be monic.
    pub fn new(p: u64, modulus: Vec<u64>) -> Result<Self> {
        let base = Fp::new(p)?;
        let mut modulus: Vec<u64> = modulus.into_iter().map(|c| c % p).collect();
        while modulus.last() == Some(&0) {
            modulus.pop();
        }
        if modulus.len() < 2 || modulus.last() != Some(&1) {
            return Err(invalid("quotient modulus must be monic of positive degree"));
        }
        let d = modulus.len() - 1;
        let cyclic = modulus[0] == p - 1 && modulus[1..d].iter().all(|&c| c == 0);
        Ok(FpQuot {
            base,
            modulus,
            cyclic,
        })
    }

    /// `F_p[z]/⟨z^m - 1⟩`.
    pub fn cyclic(p: u64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("cyclic quotient needs positive length"));
        }
        let mut modulus = vec![0u64; m + 1];
        modulus[0] = p.saturating_sub(1);
        modulus[m] = 1;
        Self::new(p, modulus)
    }

    /// `T̄_ℓ = F_p[z]/⟨z^{p^ℓ} - 1⟩`.
    pub fn tbar(p: u64, ell: u32) -> Result<Self> {
        let m = p
            .checked_pow(ell)
            .filter(|&m| m <= 1 << 16)
            .ok_or_else(|| invalid("p^ell too large for a dense quotient"))?;
        Self::cyclic(p, m as usize)
    }

    pub fn p(&self) -> u64 {
        self.base.p
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Reduces an arbitrary coefficient list into the quotient.
    pub fn reduce(&self, coeffs: &[u64]) -> Vec<u64> {
        let p = self.base.p;
        let d = self.degree();
        let mut c: Vec<u64> = coeffs.iter().map(|x| x % p).collect();
        if self.cyclic {
            let mut out = vec![0u64; d];
            for (i, x) in c.into_iter().enumerate() {
                out[i % d] = (out[i % d] + x) % p;
            }
            return out;
        }
        for e in (d..c.len()).rev() {
            let lead = c[e];
            if lead == 0 {
                continue;
            }
            c[e] = 0;
            for i in 0..d {
                let t = lead * self.modulus[i] % p;
                c[e - d + i] = (c[e - d + i] + p - t) % p;
            }
        }
        c.resize(d, 0);
        c
    }

    /// `z^e` in the quotient.
    pub fn monomial(&self, e: usize) -> Vec<u64> {
        if self.cyclic {
            let mut out = vec![0; self.degree()];
            out[e % self.degree()] = 1;
            return out;
        }
        let mut c = vec![0u64; e + 1];
        c[e] = 1;
        self.reduce(&c)
    }
}

impl fmt::Debug for FpQuot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}[z]/{:?}", self.base.p, self.modulus)
    }
}

impl Ring for FpQuot {
    type Elem = Vec<u64>;

    fn zero(&self) -> Vec<u64> {
        vec![0; self.degree()]
    }
    fn one(&self) -> Vec<u64> {
        self.monomial(0)
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.base.p).collect()
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let p = self.base.p;
        a.iter().zip(b).map(|(x, y)| (x + p - y) % p).collect()
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let p = self.base.p;
        let d = self.degree();
        if self.cyclic {
            let mut out = vec![0u64; d];
            for (i, &x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
                for (j, &y) in b.iter().enumerate().filter(|(_, y)| **y != 0) {
                    let idx = (i + j) % d;
                    out[idx] = (out[idx] + x * y) % p;
                }
            }
            return out;
        }
        let mut prod = vec![0u64; 2 * d];
        for (i, &x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % p;
            }
        }
        self.reduce(&prod)
    }
    fn is_zero(&self, a: &Vec<u64>) -> bool {
        a.iter().all(|&x| x == 0)
    }
    fn contains(&self, a: &Vec<u64>) -> bool {
        a.len() == self.degree() && a.iter().all(|&x| x < self.base.p)
    }
}

impl QuotientRing for FpQuot {
    type Base = Fp;

    fn base(&self) -> &Fp {
        &self.base
    }
    fn degree(&self) -> usize {
        self.modulus.len() - 1
    }
    fn coefficients(&self, a: &Vec<u64>) -> Vec<u64> {
        a.clone()
    }
    fn embed(&self, c: &u64) -> Vec<u64> {
        let mut out = self.zero();
        out[0] = c % self.base.p;
        out
    }
}

impl BaseRank for FpQuot {
    /// Rank of the coefficient expansion, streamed row by row; repeated
    /// coefficient rows are skipped since they cannot raise the rank.
    fn base_rank(m: &RingMatrix<Self>) -> usize {
        let d = m.ring.degree();
        let mut seen = HashSet::new();
        let mut ech = FpEchelon::new(m.ring.base, m.cols());
        'outer: for i in 0..d {
            for r in 0..m.rows() {
                let row: Vec<u64> = m.row(r).iter().map(|e| e[i]).collect();
                if row.iter().all(|&x| x == 0) || !seen.insert(row.clone()) {
                    continue;
                }
                ech.insert(&row);
                if ech.is_full() {
                    break 'outer;
                }
            }
        }
        ech.rank()
    }
}

impl Ring for CycloField {
    type Elem = CycloNumber;

    fn zero(&self) -> CycloNumber {
        CycloField::zero(self)
    }
    fn one(&self) -> CycloNumber {
        CycloField::one(self)
    }
    fn add(&self, a: &CycloNumber, b: &CycloNumber) -> CycloNumber {
        a + b
    }
    fn sub(&self, a: &CycloNumber, b: &CycloNumber) -> CycloNumber {
        a - b
    }
    fn mul(&self, a: &CycloNumber, b: &CycloNumber) -> CycloNumber {
        a * b
    }
    fn neg(&self, a: &CycloNumber) -> CycloNumber {
        -a
    }
    fn is_zero(&self, a: &CycloNumber) -> bool {
        a.is_zero()
    }
    fn contains(&self, a: &CycloNumber) -> bool {
        a.field() == *self
    }
}

impl Field for CycloField {
    fn inv(&self, a: &CycloNumber) -> Option<CycloNumber> {
        a.inv().ok()
    }
}

impl BaseRank for CycloField {
    fn base_rank(m: &RingMatrix<Self>) -> usize {
        let mut ech = Echelon::new(*m.ring(), m.cols());
        for r in 0..m.rows() {
            if m.row(r).iter().all(CycloNumber::is_zero) {
                continue;
            }
            ech.insert(m.row(r).to_vec());
            if ech.is_full() {
                break;
            }
        }
        ech.rank()
    }
}

/// `Q(ζ)[z]/⟨h(z)⟩` for a monic `h`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloQuot {
    field: CycloField,
    modulus: CycloPoly,
}

impl CycloQuot {
    pub fn new(modulus: CycloPoly) -> Result<Self> {
        match modulus.degree() {
            Some(d) if d > 0 && modulus.coeffs()[d].is_one() => Ok(CycloQuot {
                field: modulus.field(),
                modulus,
            }),
            _ => Err(invalid("quotient modulus must be monic of positive degree")),
        }
    }

    /// `Q(ζ_{p^k})[z]/⟨z^{p^ℓ} - 1⟩`, the rational hull of `T_ℓ^k`.
    pub fn t_ring(field: CycloField, ell: u32) -> Result<Self> {
        let m = field.p().pow(ell) as usize;
        let modulus = CycloPoly::monomial(field, m).sub(&CycloPoly::constant(field.one()));
        Self::new(modulus)
    }

    pub fn field(&self) -> CycloField {
        self.field
    }

    pub fn modulus(&self) -> &CycloPoly {
        &self.modulus
    }

    pub fn reduce(&self, f: &CycloPoly) -> CycloPoly {
        f.rem_monic(&self.modulus).expect("modulus is monic")
    }
}

impl fmt::Debug for CycloQuot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q(ζ_{}^{})[z]/({:?})", self.field.p(), self.field.k(), self.modulus)
    }
}

impl Ring for CycloQuot {
    type Elem = CycloPoly;

    fn zero(&self) -> CycloPoly {
        CycloPoly::zero(self.field)
    }
    fn one(&self) -> CycloPoly {
        CycloPoly::constant(self.field.one())
    }
    fn add(&self, a: &CycloPoly, b: &CycloPoly) -> CycloPoly {
        a.add(b)
    }
    fn sub(&self, a: &CycloPoly, b: &CycloPoly) -> CycloPoly {
        a.sub(b)
    }
    fn mul(&self, a: &CycloPoly, b: &CycloPoly) -> CycloPoly {
        self.reduce(&a.mul(b))
    }
    fn is_zero(&self, a: &CycloPoly) -> bool {
        a.is_zero()
    }
    fn contains(&self, a: &CycloPoly) -> bool {
        a.field() == self.field && a.degree().map_or(true, |d| d < self.degree())
    }
}

impl QuotientRing for CycloQuot {
    type Base = CycloField;

    fn base(&self) -> &CycloField {
        &self.field
    }
    fn degree(&self) -> usize {
        self.modulus.degree().expect("nonzero modulus")
    }
    fn coefficients(&self, a: &CycloPoly) -> Vec<CycloNumber> {
        (0..self.degree()).map(|i| a.coeff(i)).collect()
    }
    fn embed(&self, c: &CycloNumber) -> CycloPoly {
        CycloPoly::constant(c.clone())
    }
}

impl BaseRank for CycloQuot {
    fn base_rank(m: &RingMatrix<Self>) -> usize {
        let coeff = super::coeff_matrix(m);
        CycloField::base_rank(&coeff)
    }
}
