//! Exact dense linear algebra over arbitrary-precision rationals.
//!
//! Desk-scale dense matrices (a few hundred rows) are all this workspace ever
//! needs, so the representation is a flat row-major `Vec<Rat>`. Products
//! parallelize over output rows; everything else is sequential exact Gaussian
//! elimination with the first nonzero entry in each column as pivot, which
//! keeps nullspace bases deterministic.

use crate::scalar::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rayon::prelude::*;
use std::fmt;
use std::ops::Index;
use thiserror::Error;

/// Least common multiple of all denominators.
fn common_denominator(data: &[Rat]) -> BigInt {
    let mut acc = BigInt::one();
    for r in data {
        let d = r.denom();
        if !d.is_one() {
            acc = acc.lcm(d);
        }
    }
    acc
}

/// `data * denom`, entrywise, as exact integers.
fn scale_to_integers(data: &[Rat], denom: &BigInt) -> Vec<BigInt> {
    data.iter()
        .map(|r| {
            if denom.is_one() {
                r.numer().clone()
            } else {
                r.numer() * (denom / r.denom())
            }
        })
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: ({0}x{1}) vs ({2}x{3})")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("operation requires a square matrix, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("eigenvalue list contains duplicates")]
    DuplicateEigenvalues,
    #[error("eigenvalue list incomplete: product of (M - mu_j I) is nonzero")]
    IncompleteEigenvalues,
    #[error("target index {0} out of range for {1} eigenvalues")]
    BadTargetIndex(usize, usize),
}

/// Dense matrix with exact rational entries; dimensions fixed at construction.
#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rat::one();
        }
        m
    }

    /// `lambda * I`.
    pub fn scalar(n: usize, lambda: &Rat) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = lambda.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Rat::is_zero)
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Exact matrix product; rows of the result are computed in parallel.
    ///
    /// Denominators are cleared up front so the inner loop accumulates plain
    /// big integers (no per-operation gcd); the common denominator is divided
    /// back out once per entry at the end.
    pub fn mul(&self, other: &Mat) -> Result<Mat, LinAlgError> {
        if self.cols != other.rows {
            return Err(LinAlgError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        let da = common_denominator(&self.data);
        let db = common_denominator(&other.data);
        let a_int = scale_to_integers(&self.data, &da);
        let b_int = scale_to_integers(&other.data, &db);
        let denom = da * db;
        let cols = other.cols;
        let inner = self.cols;
        let mut data = vec![Rat::zero(); self.rows * cols];
        data.par_chunks_mut(cols).enumerate().for_each(|(i, out)| {
            let mut acc = vec![BigInt::zero(); cols];
            for k in 0..inner {
                let a = &a_int[i * inner + k];
                if a.is_zero() {
                    continue;
                }
                let brow = &b_int[k * cols..(k + 1) * cols];
                if a.is_one() {
                    for (o, b) in acc.iter_mut().zip(brow) {
                        if !b.is_zero() {
                            *o += b;
                        }
                    }
                } else {
                    for (o, b) in acc.iter_mut().zip(brow) {
                        if !b.is_zero() {
                            *o += a * b;
                        }
                    }
                }
            }
            for (o, v) in out.iter_mut().zip(acc) {
                if !v.is_zero() {
                    *o = Rat::new(v, denom.clone());
                }
            }
        });
        Ok(Mat {
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn add(&self, other: &Mat) -> Result<Mat, LinAlgError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat, LinAlgError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Mat, f: impl Fn(&Rat, &Rat) -> Rat) -> Result<Mat, LinAlgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinAlgError::DimensionMismatch(
                self.rows, self.cols, other.rows, other.cols,
            ));
        }
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, lambda: &Rat) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * lambda).collect(),
        }
    }

    pub fn trace(&self) -> Result<Rat, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::NotSquare(self.rows, self.cols));
        }
        Ok((0..self.rows).map(|i| self[(i, i)].clone()).sum())
    }

    /// Reduced row echelon form together with the pivot column list.
    fn rref(&self) -> (Mat, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            // first nonzero entry in this column at or below `row`
            let Some(p) = (row..m.rows).find(|&i| !m[(i, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = {
                let piv = m[(row, col)].clone();
                Rat::one() / piv
            };
            for j in col..m.cols {
                let v = &m.data[row * m.cols + j] * &inv;
                m.data[row * m.cols + j] = v;
            }
            for i in 0..m.rows {
                if i == row || m[(i, col)].is_zero() {
                    continue;
                }
                let factor = m[(i, col)].clone();
                for j in col..m.cols {
                    let v = &m.data[i * m.cols + j] - &factor * &m.data[row * m.cols + j];
                    m.data[i * m.cols + j] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Exact rational basis of the right nullspace `{v : Av = 0}`.
    ///
    /// The basis is the standard one read off the reduced row echelon form
    /// (one vector per free column, free coordinate set to 1), so the output
    /// is deterministic and `basis.len() + rank == cols`.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let (r, pivots) = self.rref();
        let pivot_of_col: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = Some(i);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_of_col[free].is_some() {
                continue;
            }
            let mut v = vec![Rat::zero(); self.cols];
            v[free] = Rat::one();
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = -r[(i, free)].clone();
            }
            basis.push(v);
        }
        basis
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Result<Vec<Rat>, LinAlgError> {
        if v.len() != self.cols {
            return Err(LinAlgError::DimensionMismatch(self.rows, self.cols, v.len(), 1));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(12) {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        if self.rows > 12 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// Spectral projection by Lagrange interpolation in the matrix.
///
/// Given a diagonalizable `m` whose complete eigenvalue list is `eigenvalues`
/// (pairwise distinct), returns the idempotent
/// `P = prod_{j != target} (m - mu_j I) / (mu_target - mu_j)`.
///
/// The completeness precondition `prod_j (m - mu_j I) = 0` is checked and its
/// failure reported as an error, as is any duplicate eigenvalue.
pub fn lagrange_projection(
    m: &Mat,
    eigenvalues: &[Rat],
    target: usize,
) -> Result<Mat, LinAlgError> {
    let n = m.rows();
    if m.cols() != n {
        return Err(LinAlgError::NotSquare(m.rows(), m.cols()));
    }
    if target >= eigenvalues.len() {
        return Err(LinAlgError::BadTargetIndex(target, eigenvalues.len()));
    }
    for (i, a) in eigenvalues.iter().enumerate() {
        for b in &eigenvalues[i + 1..] {
            if a == b {
                return Err(LinAlgError::DuplicateEigenvalues);
            }
        }
    }
    let mut num = Mat::identity(n);
    let mut denom = Rat::one();
    for (j, mu) in eigenvalues.iter().enumerate() {
        if j == target {
            continue;
        }
        num = num.mul(&m.sub(&Mat::scalar(n, mu))?)?;
        denom *= &eigenvalues[target] - mu;
    }
    // completeness: multiplying by the remaining factor must annihilate m
    let full = num.mul(&m.sub(&Mat::scalar(n, &eigenvalues[target]))?)?;
    if !full.is_zero() {
        return Err(LinAlgError::IncompleteEigenvalues);
    }
    Ok(num.scale(&(Rat::one() / denom)))
}
