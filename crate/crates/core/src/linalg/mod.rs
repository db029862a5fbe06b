//! Dense matrices over `F_p`, `F_p[z]/⟨f⟩`, `Q(ζ)` and `Q(ζ)[z]/⟨h⟩`:
//! coefficient expansion, rank, crank of families, Kronecker products and
//! the rank comparison under `ψ`.
//!
//! The rank of a matrix over a polynomial quotient `F[z]/⟨f⟩` always means
//! its `F`-rank: the largest number of `F`-linearly independent columns,
//! which equals the ordinary rank of the coefficient matrix.

mod echelon;
mod fp_echelon;
mod rings;

use std::fmt;

pub use echelon::Echelon;
pub use fp_echelon::FpEchelon;
pub use rings::{CycloQuot, Fp, FpQuot};

use crate::cyclotomic::psi_poly;
use crate::error::{Error, Result};

/// A commutative ring given by a runtime context (modulus, field, ...).
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(&self.zero(), a)
    }
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Whether `a` is a well-formed element of this ring.
    fn contains(&self, a: &Self::Elem) -> bool;
}

pub trait Field: Ring {
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
}

/// `F[z]/⟨f(z)⟩` for a field `F` and monic `f`.
pub trait QuotientRing: Ring {
    type Base: Field;

    fn base(&self) -> &Self::Base;
    fn degree(&self) -> usize;
    /// The `deg f` coefficients of `a`, constant term first.
    fn coefficients(&self, a: &Self::Elem) -> Vec<<Self::Base as Ring>::Elem>;
    fn embed(&self, c: &<Self::Base as Ring>::Elem) -> Self::Elem;
}

/// Rings whose matrices have a rank over a base field: the field itself, or
/// the coefficient field of a polynomial quotient.
pub trait BaseRank: Ring {
    fn base_rank(m: &RingMatrix<Self>) -> usize;
}

/// Dense row-major matrix over a [`Ring`].
#[derive(Clone, PartialEq)]
pub struct RingMatrix<R: Ring> {
    ring: R,
    rows: usize,
    cols: usize,
    entries: Vec<R::Elem>,
}

impl<R: Ring> RingMatrix<R> {
    pub fn new(ring: R, rows: usize, cols: usize, entries: Vec<R::Elem>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(bad) = entries.iter().find(|e| !ring.contains(e)) {
            return Err(Error::RingMismatch(format!("{bad:?} is not in {ring:?}")));
        }
        Ok(RingMatrix {
            ring,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        ring: R,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> R::Elem,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        RingMatrix {
            ring,
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(ring: R, rows: usize, cols: usize) -> Self {
        let z = ring.zero();
        Self::from_fn(ring, rows, cols, |_, _| z.clone())
    }

    pub fn identity(ring: R, n: usize) -> Self {
        let (z, o) = (ring.zero(), ring.one());
        Self::from_fn(ring, n, n, |r, c| if r == c { o.clone() } else { z.clone() })
    }

    pub fn ring(&self) -> &R {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &R::Elem {
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[R::Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[R::Elem] {
        &self.entries
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let ring = &self.ring;
        Ok(Self::from_fn(ring.clone(), self.rows, other.cols, |r, c| {
            (0..self.cols).fold(ring.zero(), |acc, i| {
                let (a, b) = (self.get(r, i), other.get(i, c));
                if ring.is_zero(a) || ring.is_zero(b) {
                    acc
                } else {
                    ring.add(&acc, &ring.mul(a, b))
                }
            })
        }))
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            entries.extend_from_slice(self.row(r));
        }
        RingMatrix {
            ring: self.ring.clone(),
            rows: rows.len(),
            cols: self.cols,
            entries,
        }
    }

    /// Row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        self.select_rows(perm)
    }

    /// Column `j` of the result is column `perm[j]` of `self`.
    pub fn permute_cols(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.ring.clone(), self.rows, perm.len(), |r, c| {
            self.get(r, perm[c]).clone()
        })
    }

    /// Vertical concatenation.
    pub fn stack(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                other.cols, self.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Ok(RingMatrix {
            ring: self.ring.clone(),
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        })
    }

    /// Entrywise map into another ring.
    pub fn map<S: Ring>(&self, ring: S, f: impl FnMut(&R::Elem) -> S::Elem) -> RingMatrix<S> {
        RingMatrix {
            ring,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_map<S: Ring>(
        &self,
        ring: S,
        f: impl FnMut(&R::Elem) -> Result<S::Elem>,
    ) -> Result<RingMatrix<S>> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        RingMatrix::new(ring, self.rows, self.cols, entries)
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!(
                "{:?} vs {:?}",
                self.ring, other.ring
            )));
        }
        Ok(())
    }
}

impl<R: BaseRank> RingMatrix<R> {
    /// Rank over the base field (see module docs).
    pub fn rank(&self) -> usize {
        R::base_rank(self)
    }
}

impl<R: Ring> fmt::Debug for RingMatrix<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {:?}", self.rows, self.cols, self.ring)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Coefficient matrix: `deg f · rows` rows, row `i · rows + j` holding the
/// `z^i` coefficients of row `j`.
pub fn coeff_matrix<Q: QuotientRing>(a: &RingMatrix<Q>) -> RingMatrix<Q::Base> {
    let d = a.ring.degree();
    let expanded: Vec<Vec<_>> = a.entries.iter().map(|e| a.ring.coefficients(e)).collect();
    RingMatrix::from_fn(a.ring.base().clone(), d * a.rows, a.cols, |r, c| {
        let (i, j) = (r / a.rows, r % a.rows);
        expanded[j * a.cols + c][i].clone()
    })
}

/// Exact column rank over a field.
pub fn rank<F: Field + BaseRank>(a: &RingMatrix<F>) -> usize {
    a.rank()
}

/// `F_p`-rank of a matrix over `F_p[z]/⟨f⟩`, i.e. the rank of its
/// coefficient matrix.
pub fn rank_fp_quot(a: &RingMatrix<FpQuot>) -> usize {
    a.rank()
}

/// Matrices over one ring sharing a column count.
#[derive(Clone, Debug)]
pub struct MatrixFamily<R: Ring> {
    members: Vec<RingMatrix<R>>,
}

impl<R: Ring> MatrixFamily<R> {
    pub fn new(members: Vec<RingMatrix<R>>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::InvalidArgument("matrix family is empty".into()))?;
        for m in &members[1..] {
            if m.cols != first.cols {
                return Err(Error::DimensionMismatch(format!(
                    "family members have {} and {} columns",
                    first.cols, m.cols
                )));
            }
            first.same_ring(m)?;
        }
        Ok(MatrixFamily { members })
    }

    pub fn members(&self) -> &[RingMatrix<R>] {
        &self.members
    }

    /// All members stacked vertically.
    pub fn concatenated(&self) -> RingMatrix<R> {
        let first = &self.members[0];
        let mut entries = Vec::new();
        let mut rows = 0;
        for m in &self.members {
            entries.extend_from_slice(&m.entries);
            rows += m.rows;
        }
        RingMatrix {
            ring: first.ring.clone(),
            rows,
            cols: first.cols,
            entries,
        }
    }
}

/// Rank of the concatenation of a family over the base field.
pub fn crank<R: BaseRank>(family: &MatrixFamily<R>) -> usize {
    family.concatenated().rank()
}

/// Kronecker product of two matrices over the same ring. Row and column
/// indices are lexicographic with the `a` index major.
pub fn kronecker<R: Ring>(a: &RingMatrix<R>, b: &RingMatrix<R>) -> Result<RingMatrix<R>> {
    a.same_ring(b)?;
    let ring = a.ring.clone();
    Ok(RingMatrix::from_fn(
        ring.clone(),
        a.rows * b.rows,
        a.cols * b.cols,
        |r, c| {
            let x = a.get(r / b.rows, c / b.cols);
            let y = b.get(r % b.rows, c % b.cols);
            ring.mul(x, y)
        },
    ))
}

/// `A ⊗ B` with `A` over `F[z]/⟨f⟩` and `B` over `F`.
pub fn kronecker_with_scalar<Q: QuotientRing>(
    a: &RingMatrix<Q>,
    b: &RingMatrix<Q::Base>,
) -> Result<RingMatrix<Q>> {
    if a.ring.base() != &b.ring {
        return Err(Error::RingMismatch(format!(
            "{:?} is not the base field of {:?}",
            b.ring, a.ring
        )));
    }
    let embedded = b.map(a.ring.clone(), |x| a.ring.embed(x));
    kronecker(a, &embedded)
}

/// `(rank over Q(ζ), F_p-rank of ψ(A))` for a matrix over
/// `Q(ζ)[z]/⟨h⟩` with `p`-integral entries and `h` in `Z(ζ)[z]`.
pub fn quotient_rank_pair(a: &RingMatrix<CycloQuot>) -> Result<(usize, usize)> {
    let p = a.ring.field().p();
    let image_modulus = psi_poly(a.ring.modulus())?;
    let target = FpQuot::new(p, image_modulus)?;
    let psi = psi_matrix(a, &target)?;
    Ok((a.rank(), psi.rank()))
}

/// Entrywise `ψ` into the given `F_p` quotient.
pub fn psi_matrix(a: &RingMatrix<CycloQuot>, target: &FpQuot) -> Result<RingMatrix<FpQuot>> {
    a.try_map(target.clone(), |e| Ok(target.reduce(&psi_poly(e)?)))
}

#[cfg(test)]
mod tests;
