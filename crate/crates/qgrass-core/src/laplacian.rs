//! Graph and group Laplacians on the Grassmann graphs `X_r`, their
//! closed-form neighbor-count coefficients, and the induced three-term
//! difference action on intertwiner kernels.
//!
//! The graph Laplacian sums `phi(y) - phi(x)` over the distance-1 sphere; the
//! group Laplacian sums `phi(hx) - phi(x)` over the transvection set and is
//! `q^(n-2)(q-1)` times the graph Laplacian. The coefficients `b(t)`, `c(t)`
//! are evaluated by formula (valid for any integer `q >= 2`); the geometric
//! suites check them against exhaustive neighbor counts at prime `q`.

use crate::geometry::{distance, GrassmannSpace, GroupElement};
use crate::kernels::{self, IntertwinerKernel, Normalization};
use crate::linalg::Mat;
use crate::qcomb::QContext;
use crate::scalar::{rat, Rat};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LaplacianError {
    #[error("r = {r} out of range 0..={n}")]
    DimOutOfRange { r: i64, n: i64 },
    #[error("transvection quantities need n >= 2, got n = {0}")]
    AmbientTooSmall(i64),
    #[error("space is over F_{p}^{n} but transvections are over F_{tp}^{tn}")]
    SpaceMismatch { p: u64, n: usize, tp: u64, tn: usize },
    #[error("coefficients are for ({r1}, {r2}) but kernel lives on ({kr1}, {kr2})")]
    IndexSetMismatch { r1: i64, r2: i64, kr1: i64, kr2: i64 },
}

/// `val(X_r) = q (q^r - 1)(q^(n-r) - 1) / (q - 1)^2`.
pub fn valence(ctx: QContext, r: i64) -> Result<Rat, LaplacianError> {
    if r < 0 || r > ctx.n() {
        return Err(LaplacianError::DimOutOfRange { r, n: ctx.n() });
    }
    let q1 = ctx.qpow(1) - Rat::one();
    Ok(ctx.qpow(1) * (ctx.qpow(r) - Rat::one()) * (ctx.qpow(ctx.n() - r) - Rat::one())
        / (&q1 * &q1))
}

/// Number of transvections: `(q^n - 1)(q^(n-1) - 1) / (q - 1)`.
///
/// The pair `(w, a)` determines `1 + w (x) a` only up to rescaling, whence
/// the `(q - 1)` divisor; at `q = 2` it is invisible.
pub fn transvection_count(ctx: QContext) -> Result<Rat, LaplacianError> {
    if ctx.n() < 2 {
        return Err(LaplacianError::AmbientTooSmall(ctx.n()));
    }
    let q1 = ctx.qpow(1) - Rat::one();
    Ok((ctx.qpow(ctx.n()) - Rat::one()) * (ctx.qpow(ctx.n() - 1) - Rat::one()) / q1)
}

/// `(gamma0, gamma1)` for the transvection set acting on `X_r`:
/// `gamma1 = q^(n-2)(q-1)` transvections map a point to each fixed neighbor,
/// and `gamma0 = |T| - val(X_r) gamma1` fix it.
pub fn gamma_factors(ctx: QContext, r: i64) -> Result<(Rat, Rat), LaplacianError> {
    if ctx.n() < 2 {
        return Err(LaplacianError::AmbientTooSmall(ctx.n()));
    }
    if r < 0 || r > ctx.n() {
        return Err(LaplacianError::DimOutOfRange { r, n: ctx.n() });
    }
    let gamma1 = ctx.qpow(ctx.n() - 2) * (ctx.qpow(1) - Rat::one());
    let gamma0 = transvection_count(ctx)? - valence(ctx, r)? * &gamma1;
    Ok((gamma0, gamma1))
}

/// Matrix of `phi -> sum_{y in S_1(x)} (phi(y) - phi(x))`; symmetric with
/// zero row sums.
pub fn graph_laplacian(space: &GrassmannSpace) -> Mat {
    let n = space.len();
    let mut m = Mat::zeros(n, n);
    let mut degree = vec![0i64; n];
    for i in 0..n {
        for j in i + 1..n {
            let (d, _) = distance(space.point(i), space.point(j)).expect("same ambient space");
            if d == 1 {
                m.set(i, j, Rat::one());
                m.set(j, i, Rat::one());
                degree[i] += 1;
                degree[j] += 1;
            }
        }
    }
    for (i, d) in degree.into_iter().enumerate() {
        m.set(i, i, -rat(d));
    }
    m
}

/// Matrix of `phi -> sum_{h in T} (phi(hx) - phi(x))`.
pub fn group_laplacian(
    space: &GrassmannSpace,
    transvections: &[GroupElement],
) -> Result<Mat, LaplacianError> {
    if let Some(g) = transvections.first() {
        if g.n() != space.n() || g.p() != space.p() {
            return Err(LaplacianError::SpaceMismatch {
                p: space.p(),
                n: space.n(),
                tp: g.p(),
                tn: g.n(),
            });
        }
    }
    let n = space.len();
    let total = rat(transvections.len() as i64);
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        let x = space.point(i);
        for h in transvections {
            if h.n() != space.n() {
                return Err(LaplacianError::SpaceMismatch {
                    p: space.p(),
                    n: space.n(),
                    tp: space.p(),
                    tn: h.n(),
                });
            }
            let j = space
                .index_of(&h.act(x))
                .expect("group action preserves the space");
            let bumped = &m[(i, j)] + Rat::one();
            m.set(i, j, bumped);
        }
        let diag = &m[(i, i)] - &total;
        m.set(i, i, diag);
    }
    Ok(m)
}

/// The three-term difference coefficients on a level pair, over the full
/// index set:
/// `b(t) = q^(r1-r2+1)(q^t - q^(r2))(q^t - q^(n-r1))/(q-1)^2`,
/// `c(t) = q^(r1-r2)  (q^t - 1)(q^t - q^(r2-r1))/(q-1)^2`.
///
/// `b` vanishes at the top index and `c` at the bottom one, so the difference
/// action never reads a kernel value outside the index set.
#[derive(Clone, Debug)]
pub struct LaplacianCoefficients {
    ctx: QContext,
    r1: i64,
    r2: i64,
    b: BTreeMap<i64, Rat>,
    c: BTreeMap<i64, Rat>,
}

pub fn bc_coefficients(ctx: QContext, r1: i64, r2: i64) -> LaplacianCoefficients {
    let n = ctx.n();
    let q1 = ctx.qpow(1) - Rat::one();
    let denom = &q1 * &q1;
    let mut b = BTreeMap::new();
    let mut c = BTreeMap::new();
    for t in kernels::index_set(n, r1, r2) {
        let qt = ctx.qpow(t);
        b.insert(
            t,
            ctx.qpow(r1 - r2 + 1) * (&qt - ctx.qpow(r2)) * (&qt - ctx.qpow(n - r1)) / &denom,
        );
        c.insert(
            t,
            ctx.qpow(r1 - r2) * (&qt - Rat::one()) * (&qt - ctx.qpow(r2 - r1)) / &denom,
        );
    }
    LaplacianCoefficients { ctx, r1, r2, b, c }
}

impl LaplacianCoefficients {
    pub fn ctx(&self) -> QContext {
        self.ctx
    }

    pub fn r1(&self) -> i64 {
        self.r1
    }

    pub fn r2(&self) -> i64 {
        self.r2
    }

    pub fn b(&self, t: i64) -> &Rat {
        &self.b[&t]
    }

    pub fn c(&self, t: i64) -> &Rat {
        &self.c[&t]
    }
}

/// Applies the level-pair Laplacian to a kernel:
/// `lambda'(t) = b(t)(lambda(t+1) - lambda(t)) + c(t)(lambda(t-1) - lambda(t))`.
///
/// Out-of-range neighbor values are never read because the corresponding
/// coefficient vanishes at the boundary.
pub fn kernel_difference_apply(
    coeffs: &LaplacianCoefficients,
    kernel: &IntertwinerKernel,
) -> Result<IntertwinerKernel, LaplacianError> {
    if coeffs.ctx != kernel.ctx() || coeffs.r1 != kernel.r1() || coeffs.r2 != kernel.r2() {
        return Err(LaplacianError::IndexSetMismatch {
            r1: coeffs.r1,
            r2: coeffs.r2,
            kr1: kernel.r1(),
            kr2: kernel.r2(),
        });
    }
    let mut values = BTreeMap::new();
    for t in kernel.index_set() {
        let mut acc = Rat::zero();
        let bt = coeffs.b(t);
        if !bt.is_zero() {
            acc += bt * (kernel.at(t + 1) - kernel.at(t));
        }
        let ct = coeffs.c(t);
        if !ct.is_zero() {
            acc += ct * (kernel.at(t - 1) - kernel.at(t));
        }
        values.insert(t, acc);
    }
    IntertwinerKernel::new(
        kernel.ctx(),
        kernel.r1(),
        kernel.r2(),
        kernel.s(),
        values,
        Normalization::Raw,
    )
    .map_err(|_| LaplacianError::IndexSetMismatch {
        r1: coeffs.r1,
        r2: coeffs.r2,
        kr1: kernel.r1(),
        kr2: kernel.r2(),
    })
}

/// Eigenvalue/multiplicity pairs of the graph Laplacian on `X_r`, verified by
/// exact nullity of `L + mu I` against the candidate list `{-mu_s}`.
pub fn spectrum(space: &GrassmannSpace) -> Vec<(Rat, usize)> {
    let ctx = QContext::new(space.p() as i64, space.n() as i64).expect("prime p");
    let r = space.r() as i64;
    let lap = graph_laplacian(space);
    let mut out = Vec::new();
    let mut total = 0;
    for s in 0..=r.min(ctx.n() - r) {
        let mu = kernels::mu_eigenvalue(ctx, s).expect("s within range");
        let shifted = lap
            .add(&Mat::scalar(space.len(), &mu))
            .expect("square matrices");
        let mult = shifted.nullspace().len();
        total += mult;
        out.push((-mu, mult));
    }
    assert_eq!(total, space.len(), "multiplicities must exhaust the space");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{enumerate_subspaces, transvection_set, DEFAULT_BUDGET};
    use crate::kernels::{cap_n, hyperop_apply, mu_eigenvalue, qhahn_kernel, DifferenceFactors, QHahnForm};

    fn ctx(q: i64, n: i64) -> QContext {
        QContext::new(q, n).unwrap()
    }

    fn space(p: u64, n: usize, r: usize) -> GrassmannSpace {
        enumerate_subspaces(p, n, r, DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn valence_values() {
        let c = ctx(2, 3);
        assert_eq!(valence(c, 0).unwrap(), rat(0));
        assert_eq!(valence(c, 1).unwrap(), rat(6));
        assert_eq!(valence(ctx(2, 4), 2).unwrap(), rat(18));
        assert!(valence(c, 4).is_err());
    }

    #[test]
    fn graph_laplacian_shapes() {
        let zero_level = space(2, 3, 0);
        let l0 = graph_laplacian(&zero_level);
        assert_eq!((l0.rows(), l0.cols()), (1, 1));
        assert!(l0.is_zero());

        // X_1(F_2^3) is the complete graph on 7 vertices
        let lines = space(2, 3, 1);
        let l = graph_laplacian(&lines);
        for i in 0..7 {
            for j in 0..7 {
                let expect = if i == j { rat(-6) } else { rat(1) };
                assert_eq!(l[(i, j)], expect);
            }
        }
        // zero row sums
        for i in 0..7 {
            let sum: Rat = l.row(i).iter().sum();
            assert!(sum.is_zero());
        }
    }

    #[test]
    fn group_laplacian_is_gamma1_times_graph() {
        for (p, n) in [(2u64, 3usize), (2, 4), (3, 3)] {
            let t = transvection_set(p, n).unwrap();
            let c = ctx(p as i64, n as i64);
            for r in 0..=n {
                let sp = space(p, n, r);
                let lt = group_laplacian(&sp, &t).unwrap();
                let (_, gamma1) = gamma_factors(c, r as i64).unwrap();
                let expect = graph_laplacian(&sp).scale(&gamma1);
                assert_eq!(lt, expect, "p={p} n={n} r={r}");
            }
        }
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_factors(ctx(2, 3), 1).unwrap(), (rat(9), rat(2)));
        assert_eq!(gamma_factors(ctx(2, 4), 2).unwrap().1, rat(4));
        assert_eq!(gamma_factors(ctx(3, 3), 1).unwrap(), (rat(32), rat(6)));
        assert!(gamma_factors(ctx(2, 1), 0).is_err());
    }

    #[test]
    fn gamma_identity_against_real_transvection_sets() {
        for (p, n) in [(2u64, 3usize), (2, 4), (3, 3)] {
            let c = ctx(p as i64, n as i64);
            let t_len = rat(transvection_set(p, n).unwrap().len() as i64);
            assert_eq!(transvection_count(c).unwrap(), t_len);
            for r in 0..=n as i64 {
                let (g0, g1) = gamma_factors(c, r).unwrap();
                assert_eq!(g0 + valence(c, r).unwrap() * g1, t_len, "p={p} n={n} r={r}");
            }
        }
    }

    #[test]
    fn bc_spot_values() {
        let coeffs = bc_coefficients(ctx(2, 4), 2, 2);
        assert_eq!(coeffs.b(0), &rat(18));
        assert_eq!(coeffs.c(0), &rat(0));
        assert_eq!(coeffs.c(1), &rat(1));
        assert_eq!(coeffs.b(2), &rat(0));
    }

    #[test]
    fn bc_boundary_zeros() {
        for q in [2, 3, 4] {
            for n in 1..=5 {
                let c = ctx(q, n);
                for r1 in 0..=n {
                    for r2 in 0..=n {
                        let coeffs = bc_coefficients(c, r1, r2);
                        let lo = 0.max(r2 - r1);
                        let hi = r2.min(n - r1);
                        assert!(coeffs.b(hi).is_zero());
                        assert!(coeffs.c(lo).is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn difference_of_constant_kernel_vanishes() {
        let c = ctx(2, 4);
        let k = qhahn_kernel(c, 1, 2, 0, QHahnForm::Form1).unwrap();
        let out = kernel_difference_apply(&bc_coefficients(c, 1, 2), &k).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn difference_equation_spot() {
        let c = ctx(2, 3);
        let k = qhahn_kernel(c, 1, 1, 1, QHahnForm::Form1).unwrap();
        let out = kernel_difference_apply(&bc_coefficients(c, 1, 1), &k).unwrap();
        assert_eq!(out, k.scale(&rat(-7)));
    }

    #[test]
    fn difference_equation_sweep_and_hyperop_agreement() {
        for q in [2, 3, 4] {
            for n in 1..=5 {
                let c = ctx(q, n);
                for r1 in 0..=n {
                    for r2 in 0..=n {
                        let coeffs = bc_coefficients(c, r1, r2);
                        let factors = DifferenceFactors::new(c, r1, r2);
                        for s in 0..=cap_n(n, r1, r2) {
                            let k = qhahn_kernel(c, r1, r2, s, QHahnForm::Form1).unwrap();
                            let diff = kernel_difference_apply(&coeffs, &k).unwrap();
                            let mu = mu_eigenvalue(c, s).unwrap();
                            assert_eq!(diff, k.scale(&-mu), "q={q} n={n} r1={r1} r2={r2} s={s}");
                            let hyper = hyperop_apply(&factors, &k).unwrap();
                            assert_eq!(hyper, diff, "routes disagree q={q} n={n} r1={r1} r2={r2} s={s}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mismatched_kernel_is_rejected() {
        let c = ctx(2, 3);
        let k = qhahn_kernel(c, 1, 2, 0, QHahnForm::Form1).unwrap();
        assert!(kernel_difference_apply(&bc_coefficients(c, 1, 1), &k).is_err());
    }

    #[test]
    fn spectrum_of_complete_graph() {
        let lines = space(2, 3, 1);
        assert_eq!(spectrum(&lines), vec![(rat(0), 1), (rat(-7), 6)]);
    }

    #[test]
    fn spectrum_of_planes_in_dim_four() {
        let planes = space(2, 4, 2);
        assert_eq!(
            spectrum(&planes),
            vec![(rat(0), 1), (rat(-15), 14), (rat(-21), 20)]
        );
    }
}
