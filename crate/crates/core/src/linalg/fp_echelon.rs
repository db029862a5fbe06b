use super::echelon::Echelon;
use super::rings::Fp;

/// Incremental row echelon basis over `F_p` tuned for dense rows.
///
/// `p = 2` rows are bit-packed; for `p < 2^16` reductions accumulate
/// unreduced in `u64` and are reduced once per inserted row; larger primes
/// fall back to the generic [`Echelon`].
pub struct FpEchelon {
    cols: usize,
    repr: Repr,
}

enum Repr {
    Bits(Vec<(usize, Vec<u64>)>),
    Lazy {
        p: u64,
        basis: Vec<(usize, Vec<u64>)>,
    },
    Generic(Echelon<Fp>),
}

fn pack(row: &[u64]) -> Vec<u64> {
    let mut words = vec![0u64; row.len().div_ceil(64)];
    for (i, &x) in row.iter().enumerate() {
        if x & 1 == 1 {
            words[i / 64] |= 1 << (i % 64);
        }
    }
    words
}

impl FpEchelon {
    pub fn new(field: Fp, cols: usize) -> Self {
        let p = field.p();
        let repr = if p == 2 {
            Repr::Bits(Vec::new())
        } else if p < 1 << 16 {
            Repr::Lazy {
                p,
                basis: Vec::new(),
            }
        } else {
            Repr::Generic(Echelon::new(field, cols))
        };
        FpEchelon { cols, repr }
    }

    pub fn rank(&self) -> usize {
        match &self.repr {
            Repr::Bits(b) => b.len(),
            Repr::Lazy { basis, .. } => basis.len(),
            Repr::Generic(e) => e.rank(),
        }
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.cols
    }

    /// Adds a row of residues in `[0, p)`; `true` if the rank went up.
    pub fn insert(&mut self, row: &[u64]) -> bool {
        debug_assert_eq!(row.len(), self.cols);
        match &mut self.repr {
            Repr::Bits(basis) => {
                let mut w = pack(row);
                for (pivot, b) in basis.iter() {
                    if w[pivot / 64] >> (pivot % 64) & 1 == 1 {
                        for (x, y) in w.iter_mut().zip(b).skip(pivot / 64) {
                            *x ^= y;
                        }
                    }
                }
                let Some(word) = w.iter().position(|&x| x != 0) else {
                    return false;
                };
                let pivot = word * 64 + w[word].trailing_zeros() as usize;
                basis.push((pivot, w));
                true
            }
            Repr::Lazy { p, basis } => {
                let p = *p;
                let mut r: Vec<u64> = row.to_vec();
                for (pivot, b) in basis.iter() {
                    let f = r[*pivot] % p;
                    if f == 0 {
                        continue;
                    }
                    let g = p - f;
                    for (x, y) in r[*pivot..].iter_mut().zip(&b[*pivot..]) {
                        *x += g * y;
                    }
                }
                for x in r.iter_mut() {
                    *x %= p;
                }
                let Some(pivot) = r.iter().position(|&x| x != 0) else {
                    return false;
                };
                let inv = crate::ring::inv_mod(r[pivot], p).expect("nonzero residue");
                for x in r[pivot..].iter_mut() {
                    *x = *x * inv % p;
                }
                basis.push((pivot, r));
                true
            }
            Repr::Generic(e) => e.insert(row.to_vec()),
        }
    }
}
