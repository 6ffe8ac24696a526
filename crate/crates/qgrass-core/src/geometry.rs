//! Brute-force finite geometry over prime fields: enumeration of subspaces of
//! `F_p^n` in canonical reduced-row-echelon form, distances, spheres, the
//! GL(n, p) action and the transvection set.
//!
//! This is the oracle side of the crate. Everything closed-form elsewhere is
//! checked against exhaustive counts produced here; consequently the module
//! is deliberately restricted to prime `p` (no field towers) and guarded by
//! an enumeration budget so that an oversized request fails fast instead of
//! grinding.
//!
//! Canonical form: a subspace is stored as the unique RREF basis matrix of
//! its row space, so equal subspaces compare equal bitwise and enumeration
//! order (lexicographic on pivot columns, then on the free entries read in
//! row-major order) is reproducible across runs and platforms.

use crate::qcomb::QContext;
use crate::scalar::Rat;
use num_bigint::BigInt;
use rayon::prelude::*;
use std::collections::HashMap;
use thiserror::Error;

/// Default cap on the number of points a single enumerated space may have.
pub const DEFAULT_BUDGET: usize = 5000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    #[error("p = {0} is not prime; geometric oracles require a prime field")]
    NotPrime(u64),
    #[error("r = {r} out of range 0..={n}")]
    DimOutOfRange { r: usize, n: usize },
    #[error("X_{r}(F_{p}^{n}) has {size} points, exceeding the budget of {budget}")]
    BudgetExceeded {
        p: u64,
        n: usize,
        r: usize,
        size: String,
        budget: usize,
    },
    #[error("ambient space mismatch: F_{p1}^{n1} vs F_{p2}^{n2}")]
    AmbientMismatch { p1: u64, n1: usize, p2: u64, n2: usize },
    #[error("transvections need n >= 2, got n = {0}")]
    AmbientTooSmall(usize),
    #[error("point index {0} out of range ({1} points)")]
    BadIndex(usize, usize),
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn fp_inv(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p
    debug_assert!(a % p != 0);
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// In-place RREF over `F_p`; returns the rank. Zero rows are removed.
fn rref_mod(rows: &mut Vec<Vec<u64>>, p: u64) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&i| rows[i][col] % p != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = fp_inv(rows[rank][col], p);
        for v in rows[rank].iter_mut() {
            *v = *v * inv % p;
        }
        for i in 0..rows.len() {
            if i == rank || rows[i][col] == 0 {
                continue;
            }
            let f = rows[i][col];
            for j in 0..ncols {
                let sub = f * rows[rank][j] % p;
                rows[i][j] = (rows[i][j] + p - sub) % p;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    // sort by pivot column; RREF already yields this order
    rank
}

/// A linear subspace of `F_p^n`, stored as its unique RREF basis matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    p: u64,
    n: usize,
    rows: Vec<Vec<u64>>,
}

impl Subspace {
    /// Canonicalizes an arbitrary spanning set.
    pub fn from_rows(p: u64, n: usize, rows: Vec<Vec<u64>>) -> Subspace {
        let mut rows: Vec<Vec<u64>> = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), n, "row length must equal ambient dimension");
                r.iter().map(|&v| v % p).collect()
            })
            .collect();
        rref_mod(&mut rows, p);
        Subspace { p, n, rows }
    }

    pub fn zero(p: u64, n: usize) -> Subspace {
        Subspace { p, n, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn basis_rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    fn same_ambient(&self, other: &Subspace) -> Result<(), GeometryError> {
        if self.p != other.p || self.n != other.n {
            return Err(GeometryError::AmbientMismatch {
                p1: self.p,
                n1: self.n,
                p2: other.p,
                n2: other.n,
            });
        }
        Ok(())
    }

    /// `dim(self + other)` by exact rank over `F_p`.
    pub fn sum_dim(&self, other: &Subspace) -> Result<usize, GeometryError> {
        self.same_ambient(other)?;
        let mut stack: Vec<Vec<u64>> = self.rows.iter().chain(&other.rows).cloned().collect();
        Ok(rref_mod(&mut stack, self.p))
    }

    /// `x ⊆ y`?
    pub fn is_contained_in(&self, other: &Subspace) -> Result<bool, GeometryError> {
        Ok(self.sum_dim(other)? == other.dim())
    }
}

/// One-sided distances `(d_xy, d_yx) = (dim x - dim(x ∩ y), dim y - dim(x ∩ y))`.
pub fn distance(x: &Subspace, y: &Subspace) -> Result<(usize, usize), GeometryError> {
    let sum = x.sum_dim(y)?;
    let meet = x.dim() + y.dim() - sum;
    Ok((x.dim() - meet, y.dim() - meet))
}

/// The fully enumerated, indexed Grassmannian `X_r` of `F_p^n`.
#[derive(Clone, Debug)]
pub struct GrassmannSpace {
    p: u64,
    n: usize,
    r: usize,
    points: Vec<Subspace>,
    index: HashMap<Subspace, usize>,
}

/// Enumerates all `r`-dimensional subspaces of `F_p^n` in canonical order.
pub fn enumerate_subspaces(
    p: u64,
    n: usize,
    r: usize,
    budget: usize,
) -> Result<GrassmannSpace, GeometryError> {
    if !is_prime(p) {
        return Err(GeometryError::NotPrime(p));
    }
    if r > n {
        return Err(GeometryError::DimOutOfRange { r, n });
    }
    let ctx = QContext::new(p as i64, n as i64).expect("prime p >= 2");
    let expected: Rat = ctx.q_binomial(n as i64, r as i64);
    let expected_int = expected.to_integer();
    if expected_int > BigInt::from(budget) {
        return Err(GeometryError::BudgetExceeded {
            p,
            n,
            r,
            size: expected_int.to_string(),
            budget,
        });
    }

    let mut points = Vec::new();
    let mut pivots: Vec<usize> = (0..r).collect();
    loop {
        // free entry positions (row-major) for this pivot set
        let mut free = Vec::new();
        for (i, &pc) in pivots.iter().enumerate() {
            for j in pc + 1..n {
                if !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        let mut digits = vec![0u64; free.len()];
        loop {
            let mut rows = vec![vec![0u64; n]; r];
            for (i, &pc) in pivots.iter().enumerate() {
                rows[i][pc] = 1;
            }
            for (d, &(i, j)) in digits.iter().zip(&free) {
                rows[i][j] = *d;
            }
            points.push(Subspace { p, n, rows });
            // advance odometer; first position is the most significant digit
            let mut pos = free.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < p {
                    break;
                }
                digits[pos] = 0;
                if pos == 0 {
                    break;
                }
            }
            if digits.iter().all(|&d| d == 0) {
                break;
            }
        }
        // next r-combination of {0..n-1} in lexicographic order
        if r == 0 {
            break;
        }
        let mut advanced = false;
        let mut i = r;
        while i > 0 {
            i -= 1;
            if pivots[i] < n - r + i {
                pivots[i] += 1;
                for k in i + 1..r {
                    pivots[k] = pivots[k - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }

    assert_eq!(
        BigInt::from(points.len()),
        expected_int,
        "enumeration disagrees with the Gaussian binomial count"
    );
    let index = points
        .iter()
        .enumerate()
        .map(|(i, s)| (s.clone(), i))
        .collect();
    Ok(GrassmannSpace { p, n, r, points, index })
}

impl GrassmannSpace {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &Subspace {
        &self.points[i]
    }

    pub fn points(&self) -> &[Subspace] {
        &self.points
    }

    pub fn index_of(&self, x: &Subspace) -> Option<usize> {
        self.index.get(x).copied()
    }

    /// Indices of all points at graph distance 1 from point `x_index`.
    pub fn sphere_neighbors(&self, x_index: usize) -> Result<Vec<usize>, GeometryError> {
        if x_index >= self.points.len() {
            return Err(GeometryError::BadIndex(x_index, self.points.len()));
        }
        let x = &self.points[x_index];
        let mut out = Vec::new();
        for (i, y) in self.points.iter().enumerate() {
            if i == x_index {
                continue;
            }
            if distance(x, y)?.0 == 1 {
                out.push(i);
            }
        }
        Ok(out)
    }
}

/// An invertible matrix acting on `F_p^n` (hence on every `X_r`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElement {
    p: u64,
    mat: Vec<Vec<u64>>, // n x n, row i = image-of-basis coefficients
}

impl GroupElement {
    pub fn new(p: u64, mat: Vec<Vec<u64>>) -> Result<Self, GeometryError> {
        let n = mat.len();
        assert!(mat.iter().all(|r| r.len() == n), "matrix must be square");
        let mut probe = mat.clone();
        let rank = rref_mod(&mut probe, p);
        if rank != n {
            return Err(GeometryError::DimOutOfRange { r: rank, n });
        }
        Ok(GroupElement { p, mat })
    }

    pub fn identity(p: u64, n: usize) -> Self {
        let mut mat = vec![vec![0u64; n]; n];
        for (i, row) in mat.iter_mut().enumerate() {
            row[i] = 1;
        }
        GroupElement { p, mat }
    }

    pub fn n(&self) -> usize {
        self.mat.len()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.mat
    }

    /// Applies the element to a subspace and recanonicalizes.
    pub fn act(&self, x: &Subspace) -> Subspace {
        assert_eq!(self.mat.len(), x.n, "dimension mismatch in group action");
        assert_eq!(self.p, x.p, "field mismatch in group action");
        let n = x.n;
        let rows: Vec<Vec<u64>> = x
            .rows
            .iter()
            .map(|v| {
                (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| self.mat[i][j] * v[j] % self.p)
                            .sum::<u64>()
                            % self.p
                    })
                    .collect()
            })
            .collect();
        let y = Subspace::from_rows(self.p, n, rows);
        debug_assert_eq!(y.dim(), x.dim());
        y
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let n = self.mat.len();
        assert_eq!(n, other.mat.len());
        let mut mat = vec![vec![0u64; n]; n];
        for i in 0..n {
            for j in 0..n {
                mat[i][j] = (0..n)
                    .map(|k| self.mat[i][k] * other.mat[k][j] % self.p)
                    .sum::<u64>()
                    % self.p;
            }
        }
        GroupElement { p: self.p, mat }
    }

    pub fn inverse(&self) -> GroupElement {
        let n = self.mat.len();
        // Gauss-Jordan on [M | I]
        let mut aug: Vec<Vec<u64>> = self
            .mat
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut v = row.clone();
                v.extend((0..n).map(|j| u64::from(j == i)));
                v
            })
            .collect();
        let rank = rref_mod(&mut aug, self.p);
        assert_eq!(rank, n, "group element must be invertible");
        let mat = aug.into_iter().map(|row| row[n..].to_vec()).collect();
        GroupElement { p: self.p, mat }
    }
}

/// The set `T` of transvections: all `g` with `rank(g - 1) = 1` and
/// `(g - 1)^2 = 0`, i.e. `g = 1 + w (x) a` with `a` a nonzero functional and
/// `w` a nonzero vector of its kernel.
///
/// `(w, a)` and `(cw, a/c)` give the same element, so the enumeration runs
/// over projectively normalized functionals (first nonzero coordinate 1) and
/// produces each element exactly once:
/// `|T| = (p^n - 1)(p^(n-1) - 1)/(p - 1)`.
pub fn transvection_set(p: u64, n: usize) -> Result<Vec<GroupElement>, GeometryError> {
    if !is_prime(p) {
        return Err(GeometryError::NotPrime(p));
    }
    if n < 2 {
        return Err(GeometryError::AmbientTooSmall(n));
    }
    let mut out = Vec::new();
    // projective representatives: alpha_t = 1, alpha_j = 0 for j < t
    for t in 0..n {
        let tail = n - t - 1;
        let mut tail_digits = vec![0u64; tail];
        loop {
            let mut alpha = vec![0u64; n];
            alpha[t] = 1;
            alpha[t + 1..].copy_from_slice(&tail_digits);
            // kernel basis of the functional alpha (alpha[t] = 1):
            // e_j - alpha_j e_t for j != t
            let kernel_basis: Vec<Vec<u64>> = (0..n)
                .filter(|&j| j != t)
                .map(|j| {
                    let mut v = vec![0u64; n];
                    v[j] = 1;
                    v[t] = (p - alpha[j] % p) % p;
                    v
                })
                .collect();
            let mut coeffs = vec![0u64; n - 1];
            'omega: loop {
                // advance first so we skip the all-zero combination
                let mut pos = n - 1;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    coeffs[pos] += 1;
                    if coeffs[pos] < p {
                        break;
                    }
                    coeffs[pos] = 0;
                    if pos == 0 {
                        break;
                    }
                }
                if coeffs.iter().all(|&c| c == 0) {
                    break 'omega;
                }
                let mut omega = vec![0u64; n];
                for (c, basis) in coeffs.iter().zip(&kernel_basis) {
                    for (o, b) in omega.iter_mut().zip(basis) {
                        *o = (*o + c * b) % p;
                    }
                }
                let mut mat = vec![vec![0u64; n]; n];
                for i in 0..n {
                    for j in 0..n {
                        mat[i][j] = (u64::from(i == j) + omega[i] * alpha[j]) % p;
                    }
                }
                out.push(GroupElement { p, mat });
            }
            // next tail assignment
            if tail == 0 {
                break;
            }
            let mut pos = tail;
            loop {
                pos -= 1;
                tail_digits[pos] += 1;
                if tail_digits[pos] < p {
                    break;
                }
                tail_digits[pos] = 0;
                if pos == 0 {
                    break;
                }
            }
            if tail_digits.iter().all(|&d| d == 0) {
                break;
            }
        }
    }
    out.sort();
    debug_assert!(out.windows(2).all(|w| w[0] != w[1]), "duplicate transvections");
    Ok(out)
}

/// Exhaustive count of pairs `(x, y)` in `a x b` satisfying a predicate.
pub fn brute_count_pairs<F>(a: &GrassmannSpace, b: &GrassmannSpace, pred: F) -> Rat
where
    F: Fn(&Subspace, &Subspace) -> bool + Sync,
{
    let count: usize = a
        .points
        .par_iter()
        .map(|x| b.points.iter().filter(|y| pred(x, y)).count())
        .sum();
    Rat::from_integer(BigInt::from(count))
}

/// Exhaustive count over a single space.
pub fn brute_count<F>(space: &GrassmannSpace, pred: F) -> Rat
where
    F: Fn(&Subspace) -> bool + Sync,
{
    let count: usize = space.points.par_iter().filter(|x| pred(x)).count();
    Rat::from_integer(BigInt::from(count))
}
