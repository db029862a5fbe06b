//! Hasse derivatives of multivariate polynomials over `Q(ζ)`, evaluation
//! vectors, composition coefficients, Hermite interpolation and the
//! end-to-end decoding of rows of `M_{p^ℓ,n}` from derivative evaluations
//! along a line.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::cyclotomic::{psi_poly_tbar, CycloField, CycloNumber, CycloPoly};
use crate::error::{invalid, Error, Result};
use crate::geometry::Line;
use crate::ring::{binom_exact, factorize, pow_or_err};

/// Exponent vector.
pub type Exponent = Vec<u32>;

fn binom_int(a: u64, b: u64) -> BigInt {
    BigInt::from(binom_exact(a, b))
}

/// Sparse polynomial in `n` variables over `Q(ζ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    field: CycloField,
    n: usize,
    terms: BTreeMap<Exponent, CycloNumber>,
}

impl MultiPoly {
    pub fn zero(field: CycloField, n: usize) -> Self {
        MultiPoly {
            field,
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn monomial(field: CycloField, v: &[u32]) -> Self {
        let mut f = Self::zero(field, v.len());
        f.add_term(v.to_vec(), field.one());
        f
    }

    pub fn from_terms(
        field: CycloField,
        n: usize,
        terms: impl IntoIterator<Item = (Exponent, CycloNumber)>,
    ) -> Result<Self> {
        let mut f = Self::zero(field, n);
        for (v, c) in terms {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "exponent {v:?} in {n} variables"
                )));
            }
            if c.field() != field {
                return Err(Error::RingMismatch(format!("{c} is not in {field:?}")));
            }
            f.add_term(v, c);
        }
        Ok(f)
    }

    fn add_term(&mut self, v: Exponent, c: CycloNumber) {
        let sum = match self.terms.remove(&v) {
            Some(old) => &old + &c,
            None => c,
        };
        if !sum.is_zero() {
            self.terms.insert(v, sum);
        }
    }

    pub fn field(&self) -> CycloField {
        self.field
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, CycloNumber> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, y: &[CycloNumber]) -> Result<CycloNumber> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} for {} variables",
                y.len(),
                self.n
            )));
        }
        let mut acc = self.field.zero();
        for (v, c) in &self.terms {
            let mut t = c.clone();
            for (yi, &e) in y.iter().zip(v) {
                t = &t * &yi.pow(e.into());
            }
            acc = &acc + &t;
        }
        Ok(acc)
    }

    /// `f(y^{u_1}, …, y^{u_n})` as a univariate polynomial.
    pub fn compose_monomial_curve(&self, u: &[u64]) -> Result<CycloPoly> {
        if u.len() != self.n {
            return Err(Error::DimensionMismatch("curve exponent length".into()));
        }
        let mut acc = CycloPoly::zero(self.field);
        for (v, c) in &self.terms {
            let e: u64 = v.iter().zip(u).map(|(&a, &b)| a as u64 * b).sum();
            acc = acc.add(&CycloPoly::monomial(self.field, e as usize).scale(c));
        }
        Ok(acc)
    }
}

pub fn weight(alpha: &[u32]) -> u64 {
    alpha.iter().map(|&a| a as u64).sum()
}

/// `f^{(α)}`: each term `c x^v` becomes `c Π C(v_i, α_i) x^{v-α}`.
pub fn hasse_derivative(f: &MultiPoly, alpha: &[u32]) -> Result<MultiPoly> {
    if alpha.len() != f.n {
        return Err(Error::DimensionMismatch("derivative order length".into()));
    }
    let mut out = MultiPoly::zero(f.field, f.n);
    for (v, c) in &f.terms {
        if v.iter().zip(alpha).any(|(a, b)| a < b) {
            continue;
        }
        let scale = v
            .iter()
            .zip(alpha)
            .fold(BigInt::from(1), |acc, (&a, &b)| acc * binom_int(a.into(), b.into()));
        let w = v.iter().zip(alpha).map(|(a, b)| a - b).collect();
        out.add_term(w, c.scale_int(&scale));
    }
    Ok(out)
}

/// `m_v^{(α)}(y)` for the monomial `m_v`.
pub fn monomial_hasse_eval(v: &[u32], alpha: &[u32], y: &[CycloNumber]) -> CycloNumber {
    let field = y[0].field();
    if v.iter().zip(alpha).any(|(a, b)| a < b) {
        return field.zero();
    }
    let mut acc = field.one();
    for ((&vi, &ai), yi) in v.iter().zip(alpha).zip(y) {
        acc = &acc.scale_int(&binom_int(vi.into(), ai.into())) * &yi.pow((vi - ai).into());
    }
    acc
}

/// Exponents in `[0, d)^n`, lexicographic with the first variable most
/// significant.
pub fn monomial_exponents(d: u32, n: usize) -> Vec<Exponent> {
    let total = (d as usize).pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut v = vec![0u32; n];
            for x in v.iter_mut().rev() {
                *x = (code % d as usize) as u32;
                code /= d as usize;
            }
            v
        })
        .collect()
}

/// `U_d^{(α)}(y)`: the row of `m^{(α)}(y)` over monomials with exponents
/// in `[0, d)^n`.
pub fn eval_vector(d: u32, alpha: &[u32], y: &[CycloNumber]) -> Result<Vec<CycloNumber>> {
    if alpha.len() != y.len() || y.is_empty() {
        return Err(Error::DimensionMismatch("point and order lengths differ".into()));
    }
    Ok(monomial_exponents(d, y.len())
        .iter()
        .map(|v| monomial_hasse_eval(v, alpha, y))
        .collect())
}

/// All `α` with `wt(α) ≤ w` in `n` variables, in lexicographic order.
fn orders_up_to(n: usize, w: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: u32, cur: &mut Exponent, out: &mut Vec<Exponent>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[i] = a;
            rec(i + 1, left - a, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, w, &mut cur, &mut out);
    out
}

fn series_mul(a: &[CycloNumber], b: &[CycloNumber], len: usize) -> Vec<CycloNumber> {
    let field = a[0].field();
    let mut out = vec![field.zero(); len];
    for (i, x) in a.iter().enumerate().filter(|(_, x)| !x.is_zero()) {
        for (j, y) in b.iter().enumerate().take(len - i) {
            if !y.is_zero() {
                out[i + j] = &out[i + j] + &(x * y);
            }
        }
    }
    out
}

/// `b_{w,α}`: the coefficient of `ε^w` in `Π_i Δ_i(ε)^{α_i}` with
/// `Δ_i(ε) = (γ+ε)^{u_i} - γ^{u_i}`. Zero coefficients are omitted.
pub fn composition_coeffs(u: &[u64], w: u32, gamma: &CycloNumber) -> BTreeMap<Exponent, CycloNumber> {
    let field = gamma.field();
    let len = w as usize + 1;
    // powers[i][a] = Δ_i^a truncated at degree w
    let powers: Vec<Vec<Vec<CycloNumber>>> = u
        .iter()
        .map(|&ui| {
            let delta: Vec<CycloNumber> = (0..len)
                .map(|j| {
                    if j == 0 || j as u64 > ui {
                        field.zero()
                    } else {
                        gamma
                            .pow(ui - j as u64)
                            .scale_int(&binom_int(ui, j as u64))
                    }
                })
                .collect();
            let mut pw = vec![{
                let mut one = vec![field.zero(); len];
                one[0] = field.one();
                one
            }];
            for a in 1..len {
                pw.push(series_mul(&pw[a - 1], &delta, len));
            }
            pw
        })
        .collect();
    let mut out = BTreeMap::new();
    for alpha in orders_up_to(u.len(), w) {
        let mut acc = powers[0][alpha[0] as usize].clone();
        for (i, &a) in alpha.iter().enumerate().skip(1) {
            acc = series_mul(&acc, &powers[i][a as usize], len);
        }
        let b = acc.swap_remove(w as usize);
        if !b.is_zero() {
            out.insert(alpha, b);
        }
    }
    out
}

/// Interpolation data for `h = Π (y - a_i)^{m_i}`: `t[i][j]` with
/// `Σ t_{i,j} f^{(j)}(a_i) = f mod h`.
#[derive(Clone, Debug)]
pub struct HermiteCoeffs {
    pub h: CycloPoly,
    pub t: Vec<Vec<CycloPoly>>,
}

/// Inverse of a square matrix over `Q(ζ)` by Gauss-Jordan.
fn invert(field: CycloField, mut a: Vec<Vec<CycloNumber>>) -> Option<Vec<Vec<CycloNumber>>> {
    let n = a.len();
    for (i, row) in a.iter_mut().enumerate() {
        row.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].inv().ok()?;
        for x in a[col].iter_mut() {
            *x = &*x * &inv;
        }
        let prow = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                *x = &*x - &(&f * y);
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn hermite_coeffs(nodes: &[(CycloNumber, usize)]) -> Result<HermiteCoeffs> {
    let first = nodes
        .first()
        .ok_or_else(|| invalid("Hermite interpolation needs a node"))?;
    let field = first.0.field();
    for (i, (a, m)) in nodes.iter().enumerate() {
        if *m == 0 {
            return Err(invalid("node multiplicities must be positive"));
        }
        if nodes[..i].iter().any(|(b, _)| b == a) {
            return Err(invalid(format!("repeated node {a}")));
        }
    }
    let d: usize = nodes.iter().map(|(_, m)| m).sum();
    // row (i,j) evaluates f^{(j)}(a_i) from the coefficients of 1, z, …
    let mut rows = Vec::with_capacity(d);
    for (a, m) in nodes {
        for j in 0..*m {
            rows.push(
                (0..d)
                    .map(|e| {
                        if e < j {
                            field.zero()
                        } else {
                            a.pow((e - j) as u64).scale_int(&binom_int(e as u64, j as u64))
                        }
                    })
                    .collect(),
            );
        }
    }
    let inv = invert(field, rows)
        .ok_or_else(|| invalid("confluent Vandermonde system is singular"))?;
    let mut t = Vec::with_capacity(nodes.len());
    let mut col = 0;
    for (_, m) in nodes {
        let mut ti = Vec::with_capacity(*m);
        for _ in 0..*m {
            let coeffs = (0..d).map(|e| inv[e][col].clone()).collect();
            ti.push(CycloPoly::new(field, coeffs));
            col += 1;
        }
        t.push(ti);
    }
    let h = CycloPoly::from_roots(field, nodes);
    Ok(HermiteCoeffs { h, t })
}

/// `π` on the points of a line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    line: Line,
    weights: BTreeMap<Vec<u64>, u64>,
}

impl WeightFunction {
    pub fn new(line: Line, weights: BTreeMap<Vec<u64>, u64>) -> Result<Self> {
        let points: std::collections::BTreeSet<Vec<u64>> =
            crate::geometry::line_points(&line).into_iter().collect();
        if let Some(x) = weights.keys().find(|x| !points.contains(*x)) {
            return Err(invalid(format!("weight on {x:?}, which is off the line")));
        }
        let weights = weights.into_iter().filter(|(_, w)| *w > 0).collect();
        Ok(WeightFunction { line, weights })
    }

    /// `π(a + λu) = weights[λ]`.
    pub fn from_params(line: Line, weights: &[u64]) -> Result<Self> {
        if weights.len() as u64 > line.dir().modulus() {
            return Err(invalid("more weights than line points"));
        }
        let map = weights
            .iter()
            .enumerate()
            .map(|(l, &w)| (line.point(l as u64), w))
            .collect();
        Self::new(line, map)
    }

    pub fn uniform(line: Line, w: u64) -> Result<Self> {
        let len = line.dir().modulus() as usize;
        Self::from_params(line, &vec![w; len])
    }

    pub fn line(&self) -> &Line {
        &self.line
    }

    pub fn at(&self, x: &[u64]) -> u64 {
        self.weights.get(x).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.weights.values().sum()
    }

    /// Weights by line parameter `λ`.
    pub fn by_param(&self) -> Vec<u64> {
        (0..self.line.dir().modulus())
            .map(|l| self.at(&self.line.point(l)))
            .collect()
    }
}

/// Lowers weights at the largest `λ` first until they sum to `target`.
fn trim(mut weights: Vec<u64>, target: u64) -> Vec<u64> {
    let mut excess = weights.iter().sum::<u64>().saturating_sub(target);
    for w in weights.iter_mut().rev() {
        let cut = excess.min(*w);
        *w -= cut;
        excess -= cut;
    }
    weights
}

/// The coefficients `c_{λ,α} ∈ Q(ζ)[z]` of the decoding identity.
#[derive(Clone, Debug)]
pub struct DecodeCoefficients {
    pub field: CycloField,
    pub ell: u32,
    pub line: Line,
    pub lift: Vec<u64>,
    /// Trimmed weights by `λ`, summing to `p^ℓ`.
    pub weights: Vec<u64>,
    pub h: CycloPoly,
    pub coeffs: BTreeMap<(u64, Exponent), CycloPoly>,
}

impl DecodeCoefficients {
    /// `ζ^{a+λu}` coordinatewise.
    pub fn node(&self, lambda: u64) -> Vec<CycloNumber> {
        self.line
            .point(lambda)
            .iter()
            .map(|&x| self.field.zeta_pow(x as i64))
            .collect()
    }

    fn q(&self) -> u64 {
        self.field.p().pow(self.ell)
    }
}

pub fn decode_coeffs(
    line: &Line,
    lift: &[u64],
    pi: &WeightFunction,
    ell: u32,
) -> Result<DecodeCoefficients> {
    let modulus = line.dir().modulus();
    let f = factorize(modulus)?;
    if !f.is_prime_power() {
        return Err(invalid("decoding needs a prime-power modulus"));
    }
    let (p, k) = f.factors()[0];
    if ell < k {
        return Err(invalid(format!("need ell >= k = {k}")));
    }
    let q = pow_or_err(p, ell)?;
    let n = line.dir().dim();
    if lift.len() != n {
        return Err(Error::DimensionMismatch("lift length".into()));
    }
    if lift.iter().any(|&x| x >= q) {
        return Err(invalid(format!("lift entries must lie in [0, {q})")));
    }
    if lift.iter().zip(line.dir().rep()).any(|(&x, &u)| x % modulus != u) {
        return Err(invalid("lift does not reduce to the line's direction"));
    }
    if pi.line() != line {
        return Err(invalid("weight function lives on another line"));
    }
    if pi.total() < q {
        return Err(invalid(format!(
            "weights sum to {}, below p^ell = {q}",
            pi.total()
        )));
    }
    let field = CycloField::new(p, k)?;
    let weights = trim(pi.by_param(), q);
    let active: Vec<(u64, usize)> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0)
        .map(|(l, &w)| (l as u64, w as usize))
        .collect();
    let nodes: Vec<(CycloNumber, usize)> = active
        .iter()
        .map(|&(l, m)| (field.zeta_pow(l as i64), m))
        .collect();
    let herm = hermite_coeffs(&nodes)?;
    let base = line.base();
    let mut coeffs: BTreeMap<(u64, Exponent), CycloPoly> = BTreeMap::new();
    for (idx, (&(lambda, m), (gamma, _))) in active.iter().zip(&nodes).enumerate() {
        for w in 0..m {
            let t = &herm.t[idx][w];
            for (alpha, b) in composition_coeffs(lift, w as u32, gamma) {
                let twist: u64 = alpha.iter().zip(base).map(|(&a, &x)| a as u64 * x).sum();
                let term = t.scale(&(&b * &field.zeta_pow((twist % modulus) as i64)));
                let slot = coeffs
                    .entry((lambda, alpha))
                    .or_insert_with(|| CycloPoly::zero(field));
                *slot = slot.add(&term);
            }
        }
    }
    coeffs.retain(|_, c| !c.is_zero());
    Ok(DecodeCoefficients {
        field,
        ell,
        line: line.clone(),
        lift: lift.to_vec(),
        weights,
        h: herm.h,
        coeffs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DecodeMismatch {
    pub exponent: Exponent,
    pub expected: Vec<u64>,
    pub got: Option<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecodeReport {
    pub checked: usize,
    /// Monomials whose sum differs from `ζ^{⟨a,v⟩} z^{⟨v,u'⟩} mod h` in
    /// `Q(ζ)[z]`.
    pub exact_failures: Vec<Exponent>,
    /// Monomials whose image in `T̄_ℓ` differs from `z^{⟨v,u'⟩}`.
    pub mismatches: Vec<DecodeMismatch>,
}

impl DecodeReport {
    pub fn pass(&self) -> bool {
        self.exact_failures.is_empty() && self.mismatches.is_empty()
    }
}

fn expected_row_entry(v: &[u32], lift: &[u64], q: u64) -> Vec<u64> {
    let e: u64 = v.iter().zip(lift).map(|(&a, &b)| a as u64 * b % q).sum::<u64>() % q;
    let mut out = vec![0u64; q as usize];
    out[e as usize] = 1;
    out
}

/// `Σ_{λ,α} c_{λ,α} m_v^{(α)}(ζ^{a+λu}) mod h`.
fn decode_monomial(dc: &DecodeCoefficients, v: &[u32], nodes: &BTreeMap<u64, Vec<CycloNumber>>) -> Result<CycloPoly> {
    let mut acc = CycloPoly::zero(dc.field);
    for ((lambda, alpha), c) in &dc.coeffs {
        let val = monomial_hasse_eval(v, alpha, &nodes[lambda]);
        if !val.is_zero() {
            acc = acc.add(&c.scale(&val));
        }
    }
    acc.rem_monic(&dc.h)
}

/// Checks the decoding identity for each monomial `m_v`, both exactly in
/// `Q(ζ)[z]/⟨h⟩` and after `ψ` in `T̄_ℓ`.
pub fn verify_decode(dc: &DecodeCoefficients, exponents: &[Exponent]) -> Result<DecodeReport> {
    let n = dc.lift.len();
    if let Some(v) = exponents.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!("exponent {v:?}")));
    }
    let q = dc.q();
    let nodes: BTreeMap<u64, Vec<CycloNumber>> =
        dc.coeffs.keys().map(|(l, _)| (*l, dc.node(*l))).collect();
    let a = dc.line.base();
    let modulus = dc.field.order();
    let results: Vec<(Exponent, bool, Result<Vec<u64>>)> = exponents
        .par_iter()
        .map(|v| -> Result<_> {
            let got = decode_monomial(dc, v, &nodes)?;
            let e: u64 = v.iter().zip(&dc.lift).map(|(&x, &u)| x as u64 * u).sum();
            let av: u64 = v.iter().zip(a).map(|(&x, &y)| x as u64 * y % modulus).sum();
            let target = CycloPoly::monomial(dc.field, e as usize)
                .scale(&dc.field.zeta_pow((av % modulus) as i64))
                .rem_monic(&dc.h)?;
            Ok((v.clone(), got == target, psi_poly_tbar(&got, dc.ell)))
        })
        .collect::<Result<_>>()?;
    let mut report = DecodeReport {
        checked: exponents.len(),
        exact_failures: Vec::new(),
        mismatches: Vec::new(),
    };
    for (v, exact, image) in results {
        if !exact {
            report.exact_failures.push(v.clone());
        }
        let expected = expected_row_entry(&v, &dc.lift, q);
        let got = match image {
            Ok(img) => Some(img),
            Err(Error::NotPIntegral { .. }) => None,
            Err(e) => return Err(e),
        };
        if got.as_ref() != Some(&expected) {
            report.mismatches.push(DecodeMismatch {
                exponent: v,
                expected,
                got,
            });
        }
    }
    Ok(report)
}

/// `Σ_{λ,α} c_{λ,α} U_{p^ℓ}^{(α)}(ζ^{a+λu}) mod h`: the decoded row over
/// all monomials with exponents below `p^ℓ`, in `Q(ζ)[z]/⟨h⟩`.
pub fn decode_row_exact(dc: &DecodeCoefficients) -> Result<Vec<CycloPoly>> {
    let q = dc.q() as u32;
    let n = dc.lift.len();
    let cols = (q as usize).pow(n as u32);
    let mut sums = vec![CycloPoly::zero(dc.field); cols];
    for ((lambda, alpha), c) in &dc.coeffs {
        let row = eval_vector(q, alpha, &dc.node(*lambda))?;
        for (s, x) in sums.iter_mut().zip(&row) {
            if !x.is_zero() {
                *s = s.add(&c.scale(x));
            }
        }
    }
    sums.par_iter().map(|s| s.rem_monic(&dc.h)).collect()
}

/// [`decode_row_exact`] under `ψ`, each entry an element of `T̄_ℓ`.
pub fn decode_row(dc: &DecodeCoefficients) -> Result<Vec<Vec<u64>>> {
    decode_row_exact(dc)?
        .iter()
        .map(|s| psi_poly_tbar(s, dc.ell))
        .collect()
}

/// Row `u'` of `M_{p^ℓ,n}` as `T̄_ℓ` vectors, columns in the same order as
/// [`decode_row`].
pub fn m_row(lift: &[u64], p: u64, ell: u32) -> Result<Vec<Vec<u64>>> {
    let q = pow_or_err(p, ell)?;
    Ok(monomial_exponents(q as u32, lift.len())
        .iter()
        .map(|v| expected_row_entry(v, lift, q))
        .collect())
}
