//! Closed-form lower bounds on Kakeya set sizes and upper bounds from the
//! explicit construction, all as exact rationals.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::kakeya::admissible_k;
use crate::ring::{ceil_log, rational_int, Factorization, Rational};

fn pow_rational(x: &Rational, e: usize) -> Rational {
    (0..e).fold(Rational::one(), |acc, _| acc * x)
}

fn int_pow(base: u64, e: u64) -> Rational {
    rational_int(num_traits::pow(BigInt::from(base), e as usize))
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("dimension must be positive"));
    }
    Ok(())
}

/// `2^{-rn} N^n` for square-free `N` with `r` prime factors.
pub fn lb_squarefree(f: &Factorization, n: usize) -> Result<Rational> {
    check_dim(n)?;
    if !f.is_squarefree() {
        return Err(invalid(format!("{} is not square-free", f.modulus())));
    }
    let r = f.num_primes() as u64;
    Ok(int_pow(f.modulus(), n as u64) / int_pow(2, r * n as u64))
}

/// `(kn)^{-n} p^{kn}`.
pub fn lb_pk(p: u64, k: u32, n: usize) -> Result<Rational> {
    check_dim(n)?;
    let kn = k as u64 * n as u64;
    Ok(int_pow(p, kn) / int_pow(kn, n as u64))
}

/// Both branches of the `(m, ε)`-Kakeya lower bound over `Z/p^kZ`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBranchBound {
    /// The branch valid for every prime.
    pub general: Rational,
    /// The sharper branch, present when every prime exceeds `n`.
    pub sharp: Option<Rational>,
}

impl TwoBranchBound {
    pub fn best(&self) -> Rational {
        match &self.sharp {
            Some(s) if s > &self.general => s.clone(),
            _ => self.general.clone(),
        }
    }
}

/// `ε m^n / (2(k + ⌈log_p n⌉))^n`, and for `p > n` also
/// `ε m^n (k+1)^{-n} (1 + n/p)^{-n}`.
pub fn lb_m_eps(p: u64, k: u32, n: usize, m: u64, eps: &Rational) -> Result<TwoBranchBound> {
    check_dim(n)?;
    let q = p
        .checked_pow(k)
        .ok_or_else(|| invalid("p^k overflows"))?;
    if m == 0 || m > q {
        return Err(invalid(format!("m = {m} must lie in [1, {q}]")));
    }
    if eps < &Rational::zero() || eps > &Rational::one() {
        return Err(invalid("epsilon must lie in [0, 1]"));
    }
    let mn = int_pow(m, n as u64);
    let d = 2 * (k as u64 + ceil_log(p, n as u64) as u64);
    let general = eps * &mn / int_pow(d, n as u64);
    let sharp = (p > n as u64).then(|| {
        let shrink = Rational::new(BigInt::from(p), BigInt::from(p + n as u64));
        eps * &mn / int_pow(k as u64 + 1, n as u64) * pow_rational(&shrink, n)
    });
    Ok(TwoBranchBound { general, sharp })
}

/// `N^n Π (2(k_i + ⌈log_{p_i} n⌉))^{-n}`, and when every `p_i > n` also
/// `N^n Π (k_i+1)^{-n} (1 + n/p_i)^{-n}`.
pub fn lb_general(f: &Factorization, n: usize) -> Result<TwoBranchBound> {
    check_dim(n)?;
    let nn = n as u64;
    let mut general = int_pow(f.modulus(), nn);
    let mut sharp = general.clone();
    for &(p, k) in f.factors() {
        general /= int_pow(2 * (k as u64 + ceil_log(p, nn) as u64), nn);
        sharp /= int_pow(k as u64 + 1, nn);
        sharp *= pow_rational(&Rational::new(BigInt::from(p), BigInt::from(p + nn)), n);
    }
    let sharp = f.factors().iter().all(|&(p, _)| p > nn).then_some(sharp);
    Ok(TwoBranchBound { general, sharp })
}

/// Every lower bound that applies to a Kakeya set in `(Z/NZ)^n`, by name.
pub fn applicable_lower_bounds(f: &Factorization, n: usize) -> Result<Vec<(String, Rational)>> {
    let mut out = Vec::new();
    if f.is_squarefree() {
        out.push(("squarefree".into(), lb_squarefree(f, n)?));
    }
    if f.is_prime_power() {
        let (p, k) = f.factors()[0];
        out.push(("prime_power".into(), lb_pk(p, k, n)?));
        let b = lb_m_eps(p, k, n, f.modulus(), &Rational::one())?;
        out.push(("m_eps_general".into(), b.general));
        if let Some(s) = b.sharp {
            out.push(("m_eps_sharp".into(), s));
        }
    }
    let g = lb_general(f, n)?;
    out.push(("general".into(), g.general));
    if let Some(s) = g.sharp {
        out.push(("general_sharp".into(), s));
    }
    Ok(out)
}

/// Upper bounds attached to the construction for `k = (p^{s+1}-1)/(p-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionBound {
    pub modulus: BigInt,
    /// `p^{kn} k^{1-n} (1 - 1/p)^{-n}`.
    pub closed_form: Rational,
    /// `Σ_{i=1}^n p^{ki} / (k^{i-1} (1 - 1/p)^{i-1})`.
    pub sum_form: Rational,
    /// `n p^{kn - s(n-1)}`, the size bound the union-of-permutations
    /// construction provably meets.
    pub certified: Rational,
}

pub fn ub_construction(p: u64, s: u32, n: usize) -> Result<ConstructionBound> {
    check_dim(n)?;
    let k = admissible_k(p, s)?;
    let nn = n as u64;
    let k64 = k as u64;
    let shrink = Rational::new(BigInt::from(p), BigInt::from(p - 1));
    let closed_form = int_pow(p, k64 * nn) / int_pow(k64, nn - 1) * pow_rational(&shrink, n);
    let mut sum_form = Rational::zero();
    for i in 1..=nn {
        sum_form += int_pow(p, k64 * i) / int_pow(k64, i - 1) * pow_rational(&shrink, i as usize - 1);
    }
    let certified = rational_int(nn) * int_pow(p, k64 * nn - s as u64 * (nn - 1));
    Ok(ConstructionBound {
        modulus: num_traits::pow(BigInt::from(p), k as usize),
        closed_form,
        sum_form,
        certified,
    })
}

/// Products of the per-prime bounds for the CRT product construction.
pub fn ub_construction_n(spec: &[(u64, u32)], n: usize) -> Result<ConstructionBound> {
    if spec.is_empty() {
        return Err(invalid("construction needs at least one prime"));
    }
    let mut out = ConstructionBound {
        modulus: BigInt::one(),
        closed_form: Rational::one(),
        sum_form: Rational::one(),
        certified: Rational::one(),
    };
    for &(p, s) in spec {
        let b = ub_construction(p, s, n)?;
        out.modulus *= b.modulus;
        out.closed_form *= b.closed_form;
        out.sum_form *= b.sum_form;
        out.certified *= b.certified;
    }
    Ok(out)
}
