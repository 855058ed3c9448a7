//! Exact sparse integer matrices and rank over the rationals.
//!
//! Rank is computed by fraction-free sparse row elimination. Every reduced
//! row is divided by the gcd of its entries, which keeps coefficients small
//! on the incidence-like matrices this crate produces. Arithmetic runs in
//! checked `i128` first and restarts in `BigInt` on overflow.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// Integer matrix stored as sorted sparse rows.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<(usize, i64)>>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Vec::new(); rows],
        }
    }

    /// Builds a matrix from dense row vectors. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged row {i}");
            m.entries[i] = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(c, &v)| (c, v))
                .collect();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        let row = &self.entries[r];
        match row.binary_search_by_key(&c, |&(col, _)| col) {
            Ok(k) => row[k].1,
            Err(_) => 0,
        }
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        let row = &mut self.entries[r];
        match row.binary_search_by_key(&c, |&(col, _)| col) {
            Ok(k) if v == 0 => {
                row.remove(k);
            }
            Ok(k) => row[k].1 = v,
            Err(_) if v == 0 => {}
            Err(k) => row.insert(k, (c, v)),
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: i64) {
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }

    /// Nonzero entries of row `r`, sorted by column.
    pub fn row_entries(&self, r: usize) -> &[(usize, i64)] {
        &self.entries[r]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Vec::is_empty)
    }

    /// Number of rows with at least one nonzero entry.
    pub fn nonzero_rows(&self) -> usize {
        self.entries.iter().filter(|r| !r.is_empty()).count()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (r, row) in self.entries.iter().enumerate() {
            for &(c, v) in row {
                t.entries[c].push((r, v));
            }
        }
        t
    }

    /// Exact product; panics on `i64` overflow or shape mismatch.
    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        let mut acc: Vec<i64> = vec![0; other.cols];
        let mut touched = Vec::new();
        for (i, row) in self.entries.iter().enumerate() {
            for &(k, a) in row {
                for &(j, b) in &other.entries[k] {
                    if acc[j] == 0 {
                        touched.push(j);
                    }
                    acc[j] = acc[j]
                        .checked_add(a.checked_mul(b).expect("overflow"))
                        .expect("overflow");
                }
            }
            touched.sort_unstable();
            touched.dedup();
            out.entries[i] = touched
                .iter()
                .filter(|&&j| acc[j] != 0)
                .map(|&j| (j, acc[j]))
                .collect();
            for &j in &touched {
                acc[j] = 0;
            }
            touched.clear();
        }
        out
    }

    /// Reorders rows and columns: entry `(i, j)` of the result is entry
    /// `(row_perm[i], col_perm[j])` of `self`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> IntMatrix {
        let mut inv_col = vec![0; self.cols];
        for (j, &cj) in col_perm.iter().enumerate() {
            inv_col[cj] = j;
        }
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        for (i, &ri) in row_perm.iter().enumerate() {
            let mut row: Vec<(usize, i64)> = self.entries[ri]
                .iter()
                .map(|&(c, v)| (inv_col[c], v))
                .collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            out.entries[i] = row;
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        (0..self.rows)
            .map(|r| {
                let mut row = vec![0; self.cols];
                for &(c, v) in &self.entries[r] {
                    row[c] = v;
                }
                row
            })
            .collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (r, row) in self.entries.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] = v as f64;
            }
        }
        m
    }

    /// Rank over Q, exact.
    pub fn rank(&self) -> usize {
        sparse_rank(&self.entries, self.cols)
    }

    /// Dimension of the kernel of `x ↦ self · x` (over Q), exact.
    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }
}

/// Exact rank over Q of a sparse integer matrix given by rows of
/// `(column, value)` pairs. Columns must be `< ncols`.
pub fn sparse_rank(rows: &[Vec<(usize, i64)>], ncols: usize) -> usize {
    match echelon_rank::<i128>(rows, ncols) {
        Some(r) => r,
        None => echelon_rank::<BigInt>(rows, ncols).expect("bigint elimination cannot overflow"),
    }
}

trait ElimInt: Clone + Sized {
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// `a*x - b*y`, or `None` on overflow.
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self>;
    fn gcd(&self, other: &Self) -> Self;
    fn div_exact(&self, d: &Self) -> Self;
    fn is_unit(&self) -> bool;
}

impl ElimInt for i128 {
    fn from_i64(v: i64) -> Self {
        v as i128
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        a.checked_mul(*x)?.checked_sub(b.checked_mul(*y)?)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn is_unit(&self) -> bool {
        self.abs() == 1
    }
}

impl ElimInt for BigInt {
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn mul_sub(a: &Self, x: &Self, b: &Self, y: &Self) -> Option<Self> {
        Some(a * x - b * y)
    }
    fn gcd(&self, other: &Self) -> Self {
        Integer::gcd(self, other)
    }
    fn div_exact(&self, d: &Self) -> Self {
        self / d
    }
    fn is_unit(&self) -> bool {
        self.abs() == BigInt::from(1)
    }
}

type SparseRow<T> = Vec<(usize, T)>;

fn echelon_rank<T: ElimInt>(rows: &[Vec<(usize, i64)>], ncols: usize) -> Option<usize> {
    let mut pivots: Vec<Option<SparseRow<T>>> = vec![None; ncols];
    let mut rank = 0;
    for input in rows {
        let mut row: SparseRow<T> = input
            .iter()
            .filter(|(_, v)| *v != 0)
            .map(|&(c, v)| (c, T::from_i64(v)))
            .collect();
        row.sort_by_key(|&(c, _)| c);
        remove_content(&mut row);
        while let Some(lead) = row.first().map(|&(c, _)| c) {
            match &pivots[lead] {
                Some(p) => row = reduce(&row, p)?,
                None => {
                    pivots[lead] = Some(row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    Some(rank)
}

/// Cancels the common leading column of `row` against `pivot`.
fn reduce<T: ElimInt>(row: &SparseRow<T>, pivot: &SparseRow<T>) -> Option<SparseRow<T>> {
    let a = &pivot[0].1;
    let b = &row[0].1;
    let g = a.gcd(b);
    let (a, b) = (a.div_exact(&g), b.div_exact(&g));
    let zero = T::from_i64(0);
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut i, mut j) = (1, 1);
    while i < row.len() || j < pivot.len() {
        let ci = row.get(i).map_or(usize::MAX, |e| e.0);
        let cj = pivot.get(j).map_or(usize::MAX, |e| e.0);
        let (col, v) = if ci < cj {
            i += 1;
            (ci, T::mul_sub(&a, &row[i - 1].1, &b, &zero)?)
        } else if cj < ci {
            j += 1;
            (cj, T::mul_sub(&a, &zero, &b, &pivot[j - 1].1)?)
        } else {
            i += 1;
            j += 1;
            (ci, T::mul_sub(&a, &row[i - 1].1, &b, &pivot[j - 1].1)?)
        };
        if !v.is_zero() {
            out.push((col, v));
        }
    }
    remove_content(&mut out);
    Some(out)
}

fn remove_content<T: ElimInt>(row: &mut SparseRow<T>) {
    let Some(first) = row.first() else { return };
    let mut g = first.1.clone();
    for (_, v) in row.iter().skip(1) {
        if g.is_unit() {
            return;
        }
        g = g.gcd(v);
    }
    if g.is_unit() || g.is_zero() {
        return;
    }
    for (_, v) in row.iter_mut() {
        *v = v.div_exact(&g);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_of_small_matrices() {
        assert_eq!(IntMatrix::zeros(3, 4).rank(), 0);
        let m = IntMatrix::from_rows(&[vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let id = IntMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(id.rank(), 2);
    }

    #[test]
    fn circulant_rank() {
        // circulant(-1, 1, 0) of order 3 has rank 2
        let m = IntMatrix::from_rows(&[vec![-1, 1, 0], vec![0, -1, 1], vec![1, 0, -1]]);
        assert_eq!(m.rank(), 2);
        assert_eq!(m.nullity(), 1);
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        // Rows with huge coprime entries force i128 overflow during elimination.
        let big = i64::MAX / 3;
        let rows = vec![
            vec![(0, big), (1, big - 1), (2, 7)],
            vec![(0, big - 2), (1, big), (2, 11)],
            vec![(0, big - 4), (1, big - 3), (2, 13)],
        ];
        let r = sparse_rank(&rows, 3);
        assert!(r >= 2);
        assert_eq!(echelon_rank::<BigInt>(&rows, 3), Some(r));
    }

    #[test]
    fn product_and_transpose() {
        let a = IntMatrix::from_rows(&[vec![1, 2], vec![3, 4]]);
        let b = a.transpose();
        assert_eq!(b.get(0, 1), 3);
        let p = a.mul(&b);
        assert_eq!(p.get(0, 0), 5);
        assert_eq!(p.get(1, 1), 25);
    }
}
