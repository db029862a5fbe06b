use super::Field;

/// Incremental row echelon basis over a field.
///
/// Each stored row has a pivot equal to one and zeros at the pivots of all
/// rows stored before it, so reducing a new row against the stored rows in
/// insertion order clears every existing pivot. The pivot of a new row is
/// its first nonzero column after reduction.
pub struct Echelon<F: Field> {
    field: F,
    cols: usize,
    basis: Vec<(usize, Vec<F::Elem>)>,
}

impl<F: Field> Echelon<F> {
    pub fn new(field: F, cols: usize) -> Self {
        Echelon {
            field,
            cols,
            basis: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.cols
    }

    /// Reduces `row` against the basis; returns what is left.
    pub fn reduce(&self, mut row: Vec<F::Elem>) -> Vec<F::Elem> {
        for (pivot, b) in &self.basis {
            let factor = row[*pivot].clone();
            if self.field.is_zero(&factor) {
                continue;
            }
            for (x, y) in row.iter_mut().zip(b).skip(*pivot) {
                if !self.field.is_zero(y) {
                    *x = self.field.sub(x, &self.field.mul(&factor, y));
                }
            }
        }
        row
    }

    /// Adds `row` to the span. Returns `true` if the rank went up.
    pub fn insert(&mut self, row: Vec<F::Elem>) -> bool {
        debug_assert_eq!(row.len(), self.cols);
        let mut row = self.reduce(row);
        let Some(pivot) = row.iter().position(|x| !self.field.is_zero(x)) else {
            return false;
        };
        let inv = self.field.inv(&row[pivot]).expect("nonzero pivot");
        for x in row.iter_mut().skip(pivot) {
            *x = self.field.mul(x, &inv);
        }
        self.basis.push((pivot, row));
        true
    }

    pub fn contains(&self, row: Vec<F::Elem>) -> bool {
        self.reduce(row).iter().all(|x| self.field.is_zero(x))
    }
}
