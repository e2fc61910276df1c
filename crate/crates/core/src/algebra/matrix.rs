//! Small dense matrices with exact or tolerance-aware elimination.

use std::fmt;
use std::ops::{Index, IndexMut};

use super::scalar::Scalar;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

/// Rank together with a kernel basis in reduced column-echelon form
/// (each basis vector has a leading 1 and the leading positions are
/// cleared in every other basis vector).
#[derive(Clone, Debug, PartialEq)]
pub struct RankKernel<S> {
    pub rank: usize,
    pub kernel: Vec<Vec<S>>,
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = S::one();
        }
        m
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        DenseMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[S] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b)
            })
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).fold(S::zero(), |acc, k| acc + self[(r, k)].clone() * &other[(k, c)])
        })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> DenseMatrix<T> {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Matrix with column `c` removed.
    pub fn without_column(&self, c: usize) -> Self {
        Self::from_fn(self.rows, self.cols - 1, |r, k| self[(r, if k < c { k } else { k + 1 })].clone())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    /// Determinant of a square matrix. Exact scalars use Bareiss fraction-free
    /// elimination; floats use partial pivoting.
    pub fn determinant(&self) -> S {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return S::one();
        }
        let mut m = self.clone();
        let mut negate = false;
        if S::EXACT {
            let mut prev = S::one();
            for k in 0..n {
                if m[(k, k)].is_zero() {
                    let Some(p) = (k + 1..n).find(|&r| !m[(r, k)].is_zero()) else {
                        return S::zero();
                    };
                    m.swap_rows(k, p);
                    negate = !negate;
                }
                for i in k + 1..n {
                    for j in k + 1..n {
                        let v = (m[(i, j)].clone() * &m[(k, k)] - m[(i, k)].clone() * &m[(k, j)]) / &prev;
                        m[(i, j)] = v;
                    }
                }
                prev = m[(k, k)].clone();
            }
            let d = m[(n - 1, n - 1)].clone();
            if negate { -d } else { d }
        } else {
            let mut det = S::one();
            for k in 0..n {
                let p = (k..n)
                    .max_by(|&a, &b| m[(a, k)].magnitude().total_cmp(&m[(b, k)].magnitude()))
                    .expect("nonempty range");
                if m[(p, k)].is_zero() {
                    return S::zero();
                }
                if p != k {
                    m.swap_rows(k, p);
                    negate = !negate;
                }
                let piv = m[(k, k)].clone();
                det = det * &piv;
                for i in k + 1..n {
                    let f = m[(i, k)].clone() / &piv;
                    for j in k + 1..n {
                        let v = m[(i, j)].clone() - f.clone() * &m[(k, j)];
                        m[(i, j)] = v;
                    }
                }
            }
            if negate { -det } else { det }
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// In-place reduced row-echelon form. Returns pivot columns. For floats an
    /// entry counts as zero when its modulus is at most `tol * scale`.
    fn rref(&mut self, tol: f64, scale: f64) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let candidate = if S::EXACT {
                (row..self.rows).find(|&r| !self[(r, col)].is_zero())
            } else {
                (row..self.rows)
                    .max_by(|&a, &b| self[(a, col)].magnitude().total_cmp(&self[(b, col)].magnitude()))
                    .filter(|&r| !self[(r, col)].is_negligible(tol, scale))
            };
            let Some(p) = candidate else { continue };
            self.swap_rows(row, p);
            let inv = self[(row, col)].inv();
            for c in 0..self.cols {
                let v = self[(row, c)].clone() * &inv;
                self[(row, c)] = v;
            }
            for r in 0..self.rows {
                if r == row || self[(r, col)].is_zero() {
                    continue;
                }
                let f = self[(r, col)].clone();
                for c in 0..self.cols {
                    let v = self[(r, c)].clone() - f.clone() * &self[(row, c)];
                    self[(r, c)] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Rank and kernel basis. `tol` is ignored for exact scalars; for floats
    /// it is relative to the largest entry of the matrix.
    pub fn rank_kernel(&self, tol: f64) -> RankKernel<S> {
        let scale = self.max_abs();
        let mut m = self.clone();
        let pivots = m.rref(tol, scale);
        let rank = pivots.len();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let raw: Vec<Vec<S>> = free
            .iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.cols];
                v[f] = S::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -m[(r, f)].clone();
                }
                v
            })
            .collect();
        if raw.is_empty() {
            return RankKernel { rank, kernel: raw };
        }
        // column-echelon normal form of the basis = RREF of its transpose
        let mut basis = DenseMatrix::from_rows(raw);
        let bscale = basis.max_abs();
        let kdim = basis.rref(tol, bscale).len();
        let kernel = basis.to_rows().into_iter().take(kdim).collect();
        RankKernel { rank, kernel }
    }

    pub fn rank(&self, tol: f64) -> usize {
        let scale = self.max_abs();
        self.clone().rref(tol, scale).len()
    }
}

impl<S> Index<(usize, usize)> for DenseMatrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for DenseMatrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> fmt::Debug for DenseMatrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries((0..self.rows).map(|r| self.row(r))).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::GaussRat;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn gm(rows: &[&[i64]]) -> DenseMatrix<GaussRat> {
        DenseMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| GaussRat::from(v)).collect()).collect())
    }

    #[test]
    fn identity_rank_and_kernel() {
        let rk = DenseMatrix::<GaussRat>::identity(3).rank_kernel(0.0);
        assert_eq!(rk.rank, 3);
        assert!(rk.kernel.is_empty());
    }

    #[test]
    fn single_row_kernel() {
        let rk = gm(&[&[1, 1, 1]]).rank_kernel(0.0);
        assert_eq!(rk.rank, 1);
        assert_eq!(rk.kernel.len(), 2);
        // reduced column-echelon form: leading ones at positions 0 and 1
        let one = GaussRat::from(1);
        let zero = GaussRat::from(0);
        assert_eq!(rk.kernel[0], vec![one.clone(), zero.clone(), GaussRat::from(-1)]);
        assert_eq!(rk.kernel[1], vec![zero, one, GaussRat::from(-1)]);
    }

    #[test]
    fn exact_determinant() {
        assert_eq!(gm(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]).determinant(), GaussRat::from(18));
        assert_eq!(gm(&[&[0, 1], &[1, 0]]).determinant(), GaussRat::from(-1));
        assert_eq!(gm(&[&[1, 2], &[2, 4]]).determinant(), GaussRat::from(0));
    }

    #[test]
    fn float_kernel_with_tolerance() {
        let m = DenseMatrix::from_rows(vec![
            vec![Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)],
            vec![Complex64::new(2.0, 0.0), Complex64::new(4.0 + 1e-14, 0.0)],
        ]);
        let rk = m.rank_kernel(1e-10);
        assert_eq!(rk.rank, 1);
        assert_eq!(rk.kernel.len(), 1);
        let r = m.mul_vec(&rk.kernel[0]);
        assert!(r.iter().all(|v| v.norm() < 1e-10));
    }

    proptest! {
        #[test]
        fn rank_nullity(entries in prop::collection::vec(-3i64..4, 12), cols in 2usize..5) {
            let rows = entries.len() / cols;
            let m = DenseMatrix::from_fn(rows, cols, |r, c| GaussRat::from(entries[r * cols + c]));
            let rk = m.rank_kernel(0.0);
            prop_assert_eq!(rk.rank + rk.kernel.len(), cols);
            for v in &rk.kernel {
                prop_assert!(m.mul_vec(v).iter().all(Scalar::is_zero));
            }
        }
    }
}
