//! Closed-form q-combinatorics: q-Pochhammer symbols, Gaussian binomial and
//! multinomial coefficients, and the subspace-counting formulas they encode.
//!
//! Everything evaluates exactly at a concrete integer base `q >= 2`. The base
//! is *not* required to be a prime power: the counting formulas are rational
//! identities in `q`, and evaluating them at, say, `q = 4` or `q = 6` is a
//! legitimate (and deliberately exercised) test point. Only the geometric
//! brute-force oracle in [`crate::geometry`] insists on a prime.
//!
//! Out-of-range indices return `0` instead of erroring; the identity sweeps
//! sum freely over indices and rely on that convention.

use crate::scalar::{choose2, int_pow, rat, Rat};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QCombError {
    #[error("base q must be an integer >= 2, got {0}")]
    BadBase(i64),
    #[error("{what} = {value} out of range 0..={limit}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        limit: i64,
    },
    #[error("multinomial parts {parts:?} sum to {sum}, expected {m}")]
    PartsSumMismatch { m: i64, parts: Vec<i64>, sum: i64 },
}

/// The pair `(q, n)`: evaluation base and ambient dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QContext {
    q: i64,
    n: i64,
}

/// `(u; base)_k = prod_{j=0}^{k-1} (1 - base^j u)`, the q-shifted factorial.
pub fn q_pochhammer(u: &Rat, base: &Rat, k: usize) -> Rat {
    let mut acc = Rat::one();
    let mut shift = u.clone();
    for _ in 0..k {
        acc *= Rat::one() - &shift;
        shift *= base;
    }
    acc
}

impl QContext {
    pub fn new(q: i64, n: i64) -> Result<Self, QCombError> {
        if q < 2 {
            return Err(QCombError::BadBase(q));
        }
        if n < 0 {
            return Err(QCombError::OutOfRange {
                what: "n",
                value: n,
                limit: i64::MAX,
            });
        }
        Ok(QContext { q, n })
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    /// Exact `q^e` for any integer `e`.
    pub fn qpow(&self, e: i64) -> Rat {
        int_pow(self.q, e)
    }

    /// Descending Pochhammer `(q^a; q^{-1})_k = prod_{j=0}^{k-1} (1 - q^{a-j})`.
    pub fn poch_desc(&self, a: i64, k: i64) -> Rat {
        assert!(k >= 0, "Pochhammer length must be nonnegative");
        let mut acc = Rat::one();
        for j in 0..k {
            acc *= Rat::one() - self.qpow(a - j);
        }
        acc
    }

    /// Gaussian binomial `[m k]_q`; zero whenever `k < 0`, `m < 0` or `k > m`.
    pub fn q_binomial(&self, m: i64, k: i64) -> Rat {
        if k < 0 || m < 0 || k > m {
            return Rat::zero();
        }
        let mut acc = Rat::one();
        for i in 1..=k {
            acc *= (self.qpow(m - k + i) - Rat::one()) / (self.qpow(i) - Rat::one());
        }
        acc
    }

    /// Gaussian multinomial `[m; parts]_q = (q;q)_m / prod_j (q;q)_{parts[j]}`.
    ///
    /// A negative part yields zero (the binomial convention extended); parts
    /// that are all nonnegative but do not sum to `m` are an error.
    pub fn q_multinomial(&self, m: i64, parts: &[i64]) -> Result<Rat, QCombError> {
        if parts.iter().any(|&p| p < 0) {
            return Ok(Rat::zero());
        }
        let sum: i64 = parts.iter().sum();
        if sum != m {
            return Err(QCombError::PartsSumMismatch {
                m,
                parts: parts.to_vec(),
                sum,
            });
        }
        let mut left = m;
        let mut acc = Rat::one();
        for &p in parts {
            acc *= self.q_binomial(left, p);
            left -= p;
        }
        Ok(acc)
    }

    /// `|GL(n, F_q)| = (-1)^n q^(n choose 2) (q; q)_n`.
    pub fn gl_order(&self) -> Rat {
        let mut poch = Rat::one();
        for i in 1..=self.n {
            poch *= Rat::one() - self.qpow(i);
        }
        let sign = if self.n % 2 == 0 { rat(1) } else { rat(-1) };
        sign * self.qpow(choose2(self.n)) * poch
    }

    /// Number of points of the Grassmannian `X_r`, i.e. `[n r]_q`.
    pub fn dim_vr(&self, r: i64) -> Rat {
        self.q_binomial(self.n, r)
    }

    /// Dimension of the `s`-th isotypic block: `[n s]_q - [n s-1]_q`.
    pub fn isotypic_dim(&self, s: i64) -> Rat {
        self.q_binomial(self.n, s) - self.q_binomial(self.n, s - 1)
    }

    /// Number of `x` of dimension `r` with `x1 ⊆ x ⊆ x2` for nested subspaces
    /// of dimensions `r1 ⊆ r2`: `[r2-r1, r-r1]_q`.
    pub fn count_between(&self, r1: i64, r: i64, r2: i64) -> Rat {
        self.q_binomial(r2 - r1, r - r1)
    }

    /// Number of complements of an `r`-dimensional subspace: `q^(r(n-r))`.
    pub fn count_complements(&self, r: i64) -> Result<Rat, QCombError> {
        if r < 0 || r > self.n {
            return Err(QCombError::OutOfRange {
                what: "r",
                value: r,
                limit: self.n,
            });
        }
        Ok(self.qpow(r * (self.n - r)))
    }

    /// Number of pairs `(x1, x2)` with `dim x1 = r1`, `dim x2 = r2` and
    /// `dim(x2 / (x2 ∩ x1)) = t`; zero when `t` is outside the feasible range.
    pub fn count_pairs_at_distance(&self, r1: i64, r2: i64, t: i64) -> Rat {
        let parts = [t, r2 - t, r1 - r2 + t, self.n - r1 - t];
        let multi = self
            .q_multinomial(self.n, &parts)
            .expect("parts always sum to n");
        if multi.is_zero() {
            return Rat::zero();
        }
        self.qpow(t * (r1 - r2 + t)) * multi
    }

    /// Number of `x_r` of dimension `r` in an `amb`-dimensional space at
    /// distance `k` from a fixed subspace of codimension `t`:
    /// `q^(k(amb-t-r+k)) [t k]_q [amb-t, r-k]_q`. Zero outside the valid range.
    pub fn m_count(&self, amb: i64, r: i64, t: i64, k: i64) -> Rat {
        let b1 = self.q_binomial(t, k);
        if b1.is_zero() {
            return Rat::zero();
        }
        let b2 = self.q_binomial(amb - t, r - k);
        if b2.is_zero() {
            return Rat::zero();
        }
        self.qpow(k * (amb - t - r + k)) * b1 * b2
    }
}
