//! Dense exact matrices and Gaussian elimination over [`Rational`].

use num_traits::{One, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds a matrix from row vectors. Returns `None` on ragged input.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Option<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let n_rows = rows.len();
        Some(Self { rows: n_rows, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for i in 0..self.rows {
            for (k, &j) in cols.iter().enumerate() {
                out[(i, k)] = self[(i, j)].clone();
            }
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * &other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn column_matrix(v: &[Rational]) -> Matrix {
        Matrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Row rank by exact forward elimination.
pub fn rank(m: &Matrix) -> usize {
    let mut work = m.clone();
    let mut rank = 0;
    for col in 0..work.cols {
        if rank == work.rows {
            break;
        }
        let Some(pivot) = (rank..work.rows).find(|&i| !work[(i, col)].is_zero()) else {
            continue;
        };
        swap_rows(&mut work, rank, pivot);
        for i in rank + 1..work.rows {
            if work[(i, col)].is_zero() {
                continue;
            }
            let factor = &work[(i, col)] / &work[(rank, col)];
            for j in col..work.cols {
                let delta = &factor * &work[(rank, j)];
                work[(i, j)] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `a · X = rhs` for square `a` by Gauss-Jordan elimination.
/// Returns `None` when `a` is singular.
pub fn solve(a: &Matrix, rhs: &Matrix) -> Option<Matrix> {
    assert_eq!(a.rows, a.cols, "solve needs a square system");
    assert_eq!(a.rows, rhs.rows);
    let n = a.rows;
    let mut work = a.hstack(rhs);
    let width = work.cols;
    for col in 0..n {
        let pivot = (col..n).find(|&i| !work[(i, col)].is_zero())?;
        swap_rows(&mut work, col, pivot);
        let inv = work[(col, col)].recip();
        for j in col..width {
            let scaled = &work[(col, j)] * &inv;
            work[(col, j)] = scaled;
        }
        for i in 0..n {
            if i == col || work[(i, col)].is_zero() {
                continue;
            }
            let factor = work[(i, col)].clone();
            for j in col..width {
                let delta = &factor * &work[(col, j)];
                work[(i, j)] -= delta;
            }
        }
    }
    let mut out = Matrix::zeros(n, rhs.cols);
    for i in 0..n {
        for j in 0..rhs.cols {
            out[(i, j)] = std::mem::take(&mut work[(i, n + j)]);
        }
    }
    Some(out)
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for j in 0..m.cols {
        m.data.swap(a * m.cols + j, b * m.cols + j);
    }
}
