//! Identity-verification suites.
//!
//! Each suite sweeps a family of exact identities at a given `(q, n)` and
//! returns one [`Check`] per instance; nothing is sampled with a tolerance,
//! every comparison is an exact equality of rationals or matrices. Suites
//! that need actual geometry (spaces, group actions, matrices) require a
//! prime `q`; the purely closed-form suites accept any integer `q >= 2` and
//! silently skip their geometric cross-checks when `q` is not prime.
//!
//! Check ordering is deterministic: instances are generated in lexicographic
//! order of their parameter tuples, so identical configurations produce
//! byte-identical check lists regardless of thread count.

use crate::algebra::{
    self, adjoint_constant_d_route, adjoint_constant_kernel_route, adjoint_constant_oracle,
    complement_constant, fixed_s_check, hs_norm_squared_closed,
    lambda_oracle, operator_from_kernel, product_constant, projection_op, radon_complement,
    radon_subset, radon_weights, AlgebraError, FixedSVariant, IntertwinerOp, Spaces,
};
use crate::geometry::{self, distance, is_prime, transvection_set};
use crate::kernels::{
    self, cap_n, extremal_closed_form, hyperop_apply, index_set, kernel_inner_product,
    mu_eigenvalue, qhahn_kernel, rho_s_grid, rodrigues_eval, summation_by_parts,
    weight_sum, weight_sum_closed, DifferenceFactors, ExtremalKind, GridFunction,
    IntertwinerKernel, QHahnForm,
};
use crate::laplacian::{
    self, bc_coefficients, gamma_factors, graph_laplacian, group_laplacian, kernel_difference_apply,
    transvection_count, valence,
};
use crate::linalg::Mat;
use crate::qcomb::QContext;
use crate::scalar::{choose2, QuadExt, Rat};
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("unknown suite '{0}'; available: {1}")]
    UnknownSuite(String, String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// One verified identity instance.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub params: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// A suite result, serializable as the CLI's JSON report.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub q: i64,
    pub n: i64,
    pub checks: Vec<Check>,
    pub elapsed_ms: u128,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

fn eq_check<T: PartialEq + ToString>(name: &str, params: String, lhs: T, rhs: T) -> Check {
    let status = if lhs == rhs { Status::Pass } else { Status::Fail };
    Check {
        name: name.to_string(),
        params,
        status,
        lhs: Some(lhs.to_string()),
        rhs: Some(rhs.to_string()),
        constant: None,
    }
}

fn with_constant(mut check: Check, constant: impl ToString) -> Check {
    check.constant = Some(constant.to_string());
    check
}

fn mat_check(name: &str, params: String, lhs: &Mat, rhs: &Mat) -> Check {
    if lhs == rhs {
        let summary = format!("equal {}x{}", lhs.rows(), lhs.cols());
        Check {
            name: name.to_string(),
            params,
            status: Status::Pass,
            lhs: Some(summary.clone()),
            rhs: Some(summary),
            constant: None,
        }
    } else {
        let mut mismatch = ("?".to_string(), "?".to_string(), (0usize, 0usize));
        'outer: for i in 0..lhs.rows().min(rhs.rows()) {
            for j in 0..lhs.cols().min(rhs.cols()) {
                if lhs[(i, j)] != rhs[(i, j)] {
                    mismatch = (lhs[(i, j)].to_string(), rhs[(i, j)].to_string(), (i, j));
                    break 'outer;
                }
            }
        }
        Check {
            name: name.to_string(),
            params: format!("{params} first-mismatch=({},{})", mismatch.2 .0, mismatch.2 .1),
            status: Status::Fail,
            lhs: Some(mismatch.0),
            rhs: Some(mismatch.1),
            constant: None,
        }
    }
}

fn kernel_to_string(k: &IntertwinerKernel) -> String {
    let parts: Vec<String> = k.iter().map(|(t, v)| format!("{t}:{v}")).collect();
    parts.join(" ")
}

fn kernel_check(name: &str, params: String, lhs: &IntertwinerKernel, rhs: &IntertwinerKernel) -> Check {
    eq_check(name, params, kernel_to_string(lhs), kernel_to_string(rhs))
}

fn ctx_for(q: i64, n: i64) -> Result<QContext, AlgebraError> {
    QContext::new(q, n).map_err(|_| AlgebraError::NonPrimeBase(q))
}

fn require_prime(q: i64) -> Result<u64, AlgebraError> {
    if q >= 2 && is_prime(q as u64) {
        Ok(q as u64)
    } else {
        Err(AlgebraError::NonPrimeBase(q))
    }
}

/// Spectrum checks for the listed levels: eigenvalues `{-mu_s}` with
/// multiplicity `[n s]_q - [n s-1]_q`, by exact nullity.
pub fn spectrum_checks(q: i64, n: i64, levels: &[i64], budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let p = require_prime(q)?;
    let ctx = ctx_for(q, n)?;
    let mut checks = Vec::new();
    for &r in levels {
        let space = geometry::enumerate_subspaces(p, n as usize, r as usize, budget)?;
        let observed = laplacian::spectrum(&space);
        let mut total = 0usize;
        for (s, (eig, mult)) in observed.iter().enumerate() {
            let s = s as i64;
            let expect_eig = -mu_eigenvalue(ctx, s)?;
            let expect_mult = ctx.isotypic_dim(s);
            total += mult;
            checks.push(eq_check(
                "spectrum-eigenvalue",
                format!("r={r} s={s}"),
                eig.to_string(),
                expect_eig.to_string(),
            ));
            checks.push(eq_check(
                "spectrum-multiplicity",
                format!("r={r} s={s}"),
                Rat::from_integer((*mult as i64).into()),
                expect_mult,
            ));
        }
        checks.push(eq_check(
            "spectrum-exhausts-space",
            format!("r={r}"),
            total.to_string(),
            space.len().to_string(),
        ));
    }
    Ok(checks)
}

fn suite_spectrum(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let levels: Vec<i64> = (0..=n).collect();
    spectrum_checks(q, n, &levels, budget)
}

fn suite_group_laplacian(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let p = require_prime(q)?;
    let ctx = ctx_for(q, n)?;
    let t = transvection_set(p, n as usize)?;
    let mut checks = vec![eq_check(
        "transvection-count",
        String::new(),
        Rat::from_integer((t.len() as i64).into()),
        transvection_count(ctx)?,
    )];
    for r in 0..=n {
        let space = geometry::enumerate_subspaces(p, n as usize, r as usize, budget)?;
        let (gamma0, gamma1) = gamma_factors(ctx, r)?;
        let graph = graph_laplacian(&space);
        let group = group_laplacian(&space, &t)?;
        checks.push(mat_check(
            "group-laplacian-ratio",
            format!("r={r} gamma1={gamma1}"),
            &group,
            &graph.scale(&gamma1),
        ));
        checks.push(eq_check(
            "transvection-partition",
            format!("r={r}"),
            gamma0 + valence(ctx, r)? * gamma1,
            Rat::from_integer((t.len() as i64).into()),
        ));
    }
    Ok(checks)
}

/// Kernel-agreement checks: the four hypergeometric forms, the Rodrigues
/// route, the extremal closed forms where applicable, and (at prime `q`) the
/// spectral-projection oracle all produce the same normalized kernel.
fn suite_pentagon(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let ctx = ctx_for(q, n)?;
    let geometric = q >= 2 && is_prime(q as u64);
    let spaces = Spaces::new(budget);
    let mut checks = Vec::new();
    for r1 in 0..=n {
        for r2 in 0..=n {
            for s in 0..=cap_n(n, r1, r2) {
                let params = format!("r1={r1} r2={r2} s={s}");
                let reference = qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1)?;
                for (label, form) in [
                    ("form2", QHahnForm::Form2),
                    ("form3", QHahnForm::Form3),
                    ("form4", QHahnForm::Form4),
                ] {
                    let other = qhahn_kernel(ctx, r1, r2, s, form)?;
                    checks.push(kernel_check(
                        &format!("qhahn-{label}-agrees"),
                        params.clone(),
                        &other,
                        &reference,
                    ));
                }
                let rod = rodrigues_eval(ctx, r1, r2, s)?;
                checks.push(kernel_check("rodrigues-agrees", params.clone(), &rod, &reference));
                if r2 == s && s <= r1 && r1 <= n - s {
                    let ext = extremal_closed_form(ctx, r1, s, ExtremalKind::ToMinimal)?;
                    checks.push(kernel_check("extremal-to-minimal-agrees", params.clone(), &ext, &reference));
                }
                if r1 == n - s && s <= r2 && r2 <= n - s {
                    let ext = extremal_closed_form(ctx, r2, s, ExtremalKind::FromMaximal)?;
                    checks.push(kernel_check("extremal-from-maximal-agrees", params.clone(), &ext, &reference));
                }
                if geometric {
                    let (_, oracle) = lambda_oracle(&spaces, ctx, r1, r2, s)?;
                    checks.push(kernel_check("oracle-agrees", params.clone(), &oracle, &reference));
                }
            }
        }
    }
    // transformation identity relating the (r1, r2) and (r2, r1) kernels on
    // the shifted grid, checked pointwise
    for r1 in 0..=n {
        for r2 in 0..=n {
            for s in 0..=cap_n(n, r1, r2) {
                let fwd = qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1)?;
                let bwd = qhahn_kernel(ctx, r2, r1, s, QHahnForm::Form1)?;
                let c = adjoint_constant_kernel_route(ctx, r1, r2, s);
                let ok = index_set(n, r1, r2)
                    .all(|t| fwd.at(t) == &(&c * bwd.at(r1 - r2 + t)));
                checks.push(Check {
                    name: "transformation-identity".into(),
                    params: format!("r1={r1} r2={r2} s={s}"),
                    status: if ok { Status::Pass } else { Status::Fail },
                    lhs: None,
                    rhs: None,
                    constant: Some(c.to_string()),
                });
            }
        }
    }
    // anchor ratios against the interpolated polynomial and the main
    // coefficient
    for r1 in 0..=n {
        for r2 in 0..=n {
            for s in 0..=cap_n(n, r1, r2) {
                let k = qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1)?;
                let main = kernels::main_coefficient(ctx, r1, r2, s)?;
                for (label, point) in [
                    ("one", kernels::AnchorPoint::One),
                    ("q-neg-r2", kernels::AnchorPoint::QNegR2),
                    ("q-r1-minus-n", kernels::AnchorPoint::QR1MinusN),
                    ("q-r1-minus-r2", kernels::AnchorPoint::QR1MinusR2),
                ] {
                    let u = point.u(ctx, r1, r2);
                    let expect = &main * kernels::anchor_over_main_coefficient(ctx, r1, r2, s, point)?;
                    checks.push(eq_check(
                        &format!("anchor-ratio-{label}"),
                        format!("r1={r1} r2={r2} s={s}"),
                        k.eval_poly(&u),
                        expect,
                    ));
                }
            }
        }
    }
    Ok(checks)
}

/// Difference-equation checks: the three-term action returns `-mu_s` times
/// the kernel, the grid-operator route agrees, and (at prime `q`) the
/// coefficient formulas match exhaustive neighbor counts.
fn suite_difference(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let ctx = ctx_for(q, n)?;
    let geometric = q >= 2 && is_prime(q as u64);
    let mut checks = Vec::new();
    for r1 in 0..=n {
        for r2 in 0..=n {
            let coeffs = bc_coefficients(ctx, r1, r2);
            let factors = DifferenceFactors::new(ctx, r1, r2);
            for s in 0..=cap_n(n, r1, r2) {
                let params = format!("r1={r1} r2={r2} s={s}");
                let k = qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1)?;
                let diff = kernel_difference_apply(&coeffs, &k)?;
                let expect = k.scale(&-mu_eigenvalue(ctx, s)?);
                checks.push(kernel_check("difference-eigenrelation", params.clone(), &diff, &expect));
                let hyper = hyperop_apply(&factors, &k)?;
                checks.push(kernel_check("hyperop-route-agrees", params, &hyper, &diff));
            }
        }
    }
    if geometric {
        // spaces small enough that matrix-level intertwining checks stay cheap
        const INTERTWINE_MAX_POINTS: usize = 60;
        let p = q as u64;
        for r1 in 0..=n {
            for r2 in 0..=n {
                let src = geometry::enumerate_subspaces(p, n as usize, r1 as usize, budget)?;
                let dst = geometry::enumerate_subspaces(p, n as usize, r2 as usize, budget)?;
                if src.len() <= INTERTWINE_MAX_POINTS && dst.len() <= INTERTWINE_MAX_POINTS {
                    let l_src = graph_laplacian(&src);
                    let l_dst = graph_laplacian(&dst);
                    for s in 0..=cap_n(n, r1, r2) {
                        let k = qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1)?;
                        let lam = operator_from_kernel(&k, &src, &dst)?;
                        checks.push(mat_check(
                            "laplacian-intertwines",
                            format!("r1={r1} r2={r2} s={s}"),
                            &l_dst.mul(&lam.matrix)?,
                            &lam.matrix.mul(&l_src)?,
                        ));
                    }
                }
                let coeffs = bc_coefficients(ctx, r1, r2);
                let x2 = dst.point(0);
                for t in index_set(n, r1, r2) {
                    let x1 = src
                        .points()
                        .iter()
                        .find(|x1| distance(x2, x1).expect("same ambient").0 as i64 == t)
                        .expect("every index-set distance is realized");
                    let count_at = |target: i64| -> Rat {
                        geometry::brute_count(&dst, |y| {
                            let dyx2 = distance(y, x2).expect("same ambient").0;
                            let dyx1 = distance(y, x1).expect("same ambient").0;
                            dyx2 == 1 && dyx1 as i64 == target
                        })
                    };
                    checks.push(eq_check(
                        "b-coefficient-brute-force",
                        format!("r1={r1} r2={r2} t={t}"),
                        coeffs.b(t).clone(),
                        count_at(t + 1),
                    ));
                    checks.push(eq_check(
                        "c-coefficient-brute-force",
                        format!("r1={r1} r2={r2} t={t}"),
                        coeffs.c(t).clone(),
                        count_at(t - 1),
                    ));
                }
            }
        }
    }
    Ok(checks)
}

/// Cache of closed-form intertwiner operators, keyed by `(r1, r2, s)`.
struct OpCache<'a> {
    spaces: &'a Spaces,
    ctx: QContext,
    ops: HashMap<(i64, i64, i64), IntertwinerOp>,
}

impl<'a> OpCache<'a> {
    fn new(spaces: &'a Spaces, ctx: QContext) -> Self {
        OpCache {
            spaces,
            ctx,
            ops: HashMap::new(),
        }
    }

    /// The operator realizing the closed-form kernel `lambda_s^{r1,r2}`.
    fn get(&mut self, r1: i64, r2: i64, s: i64) -> Result<&IntertwinerOp, AlgebraError> {
        if !self.ops.contains_key(&(r1, r2, s)) {
            let p = self.ctx.q() as u64;
            let src = self.spaces.space(p, self.ctx.n() as usize, r1 as usize)?;
            let dst = self.spaces.space(p, self.ctx.n() as usize, r2 as usize)?;
            let k = qhahn_kernel(self.ctx, r1, r2, s, QHahnForm::Form1)?;
            let op = operator_from_kernel(&k, &src, &dst)?;
            self.ops.insert((r1, r2, s), op);
        }
        Ok(&self.ops[&(r1, r2, s)])
    }
}

fn suite_product(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    require_prime(q)?;
    let ctx = ctx_for(q, n)?;
    let spaces = Spaces::new(budget);
    let mut cache = OpCache::new(&spaces, ctx);
    let mut checks = Vec::new();
    for r1 in 0..=n {
        for r2 in 0..=n {
            for r3 in 0..=n {
                let cap = cap_n(n, r1, r2).min(cap_n(n, r2, r3));
                for s in 0..=cap {
                    let a = cache.get(r1, r2, s)?.clone();
                    let b = cache.get(r2, r3, s)?.clone();
                    let k = product_constant(ctx, r2, s);
                    let lhs = b.compose(&a)?;
                    let rhs = cache.get(r1, r3, s)?.scale(&k);
                    checks.push(with_constant(
                        mat_check(
                            "product-formula",
                            format!("r1={r1} r2={r2} r3={r3} s={s}"),
                            &lhs.matrix,
                            &rhs.matrix,
                        ),
                        &k,
                    ));
                    // annihilation across distinct eigenindices
                    for s2 in 0..=cap {
                        if s2 == s {
                            continue;
                        }
                        let b2 = cache.get(r2, r3, s2)?.clone();
                        let prod = b2.compose(&a)?;
                        checks.push(eq_check(
                            "product-annihilation",
                            format!("r1={r1} r2={r2} r3={r3} s={s} s2={s2}"),
                            prod.matrix.is_zero().to_string(),
                            true.to_string(),
                        ));
                    }
                }
            }
        }
    }
    Ok(checks)
}

fn suite_radon(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let p = require_prime(q)?;
    let ctx = ctx_for(q, n)?;
    let spaces = Spaces::new(budget);
    let mut cache = OpCache::new(&spaces, ctx);
    let mut checks = Vec::new();
    // composition of inclusion transforms
    for r1 in 0..=n {
        for r2 in r1..=n {
            for r3 in r2..=n {
                let s1 = spaces.space(p, n as usize, r1 as usize)?;
                let s2 = spaces.space(p, n as usize, r2 as usize)?;
                let s3 = spaces.space(p, n as usize, r3 as usize)?;
                let r12 = radon_subset(&s1, &s2)?;
                let r23 = radon_subset(&s2, &s3)?;
                let r13 = radon_subset(&s1, &s3)?;
                let c = ctx.q_binomial(r3, r2) * ctx.q_binomial(r2, r1) / ctx.q_binomial(r3, r1);
                checks.push(with_constant(
                    mat_check(
                        "radon-composition",
                        format!("r1={r1} r2={r2} r3={r3}"),
                        &r23.compose(&r12)?.matrix,
                        &r13.scale(&c).matrix,
                    ),
                    &c,
                ));
            }
        }
    }
    // decomposition over the canonical intertwiners + the trace identity
    for r1 in 0..=n {
        for r2 in r1..=n {
            let s1 = spaces.space(p, n as usize, r1 as usize)?;
            let s2 = spaces.space(p, n as usize, r2 as usize)?;
            let radon = radon_subset(&s1, &s2)?;
            let weights = radon_weights(ctx, r1, r2);
            let mut acc = Mat::zeros(s2.len(), s1.len());
            for (s, w) in weights.iter().enumerate() {
                let op = cache.get(r1, r2, s as i64)?.clone();
                acc = acc.add(&op.matrix.scale(w))?;
                let back = cache.get(r2, r1, s as i64)?.clone();
                checks.push(eq_check(
                    "radon-trace-identity",
                    format!("r1={r1} r2={r2} s={s}"),
                    back.compose(&radon)?.matrix.trace()?,
                    ctx.dim_vr(r2) * ctx.q_binomial(r2, r1),
                ));
            }
            let wstr: Vec<String> = weights.iter().map(|w| w.to_string()).collect();
            checks.push(with_constant(
                mat_check(
                    "radon-decomposition",
                    format!("r1={r1} r2={r2}"),
                    &radon.matrix,
                    &acc,
                ),
                wstr.join(","),
            ));
        }
    }
    // complement identity
    for r1 in 0..=n {
        for r2 in 0..=n - r1 {
            let src2 = spaces.space(p, n as usize, r2 as usize)?;
            let dst2 = spaces.space(p, n as usize, (n - r2) as usize)?;
            let rc = radon_complement(&src2, &dst2)?;
            for s in 0..=cap_n(n, r1, r2) {
                let lam = cache.get(r1, r2, s)?.clone();
                let target = cache.get(r1, n - r2, s)?.clone();
                let m = complement_constant(ctx, r2, s);
                checks.push(with_constant(
                    mat_check(
                        "radon-complement-identity",
                        format!("r1={r1} r2={r2} s={s}"),
                        &rc.compose(&lam)?.matrix,
                        &target.scale(&m).matrix,
                    ),
                    &m,
                ));
            }
        }
    }
    Ok(checks)
}

fn suite_norms(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    require_prime(q)?;
    let ctx = ctx_for(q, n)?;
    let spaces = Spaces::new(budget);
    let mut cache = OpCache::new(&spaces, ctx);
    let mut checks = Vec::new();
    for r in 0..=n {
        for s in 0..=cap_n(n, r, r) {
            let lam = cache.get(r, r, s)?;
            checks.push(eq_check(
                "intertwiner-trace",
                format!("r={r} s={s}"),
                lam.matrix.trace()?,
                ctx.dim_vr(r),
            ));
            let proj = projection_op(&spaces, ctx, r, s)?;
            checks.push(eq_check(
                "projection-trace",
                format!("r={r} s={s}"),
                proj.matrix.trace()?,
                ctx.isotypic_dim(s),
            ));
        }
    }
    for r1 in 0..=n {
        for r2 in 0..=n {
            for s in 0..=cap_n(n, r1, r2) {
                let params = format!("r1={r1} r2={r2} s={s}");
                let closed = hs_norm_squared_closed(ctx, r1, r2, s);
                let lam = cache.get(r1, r2, s)?.clone();
                let gram = lam.matrix.transpose().mul(&lam.matrix)?;
                checks.push(eq_check(
                    "hs-norm-matrix-route",
                    params.clone(),
                    gram.trace()?,
                    closed.clone(),
                ));
                let k = qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1)?;
                checks.push(eq_check(
                    "hs-norm-weighted-kernel-route",
                    params,
                    kernel_inner_product(&k, &k)?,
                    closed,
                ));
            }
        }
    }
    Ok(checks)
}

/// Samples the interpolating polynomial of a kernel on an extended integer
/// window of the grid.
fn sampled_kernel_grid(k: &IntertwinerKernel, margin: i64) -> GridFunction {
    let coeffs = k.polynomial();
    let ctx = k.ctx();
    let (lo, hi) = (
        *k.index_set().start() - margin,
        *k.index_set().end() + margin,
    );
    GridFunction::from_integer_points(
        ctx.q(),
        (lo..=hi).map(|t| {
            (
                t,
                QuadExt::from_rat(kernels::poly_eval(&coeffs, &ctx.qpow(-t)), ctx.q()),
            )
        }),
    )
}

fn suite_rodrigues(q: i64, n: i64, _budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let ctx = ctx_for(q, n)?;
    let mut checks = Vec::new();
    for r1 in 0..=n {
        for r2 in 0..=n {
            let params = format!("r1={r1} r2={r2}");
            let factors = DifferenceFactors::new(ctx, r1, r2);
            // functional equation of the base weight on consecutive grid points
            let idx = index_set(n, r1, r2);
            let mut fe_ok = true;
            for t in *idx.start()..*idx.end() {
                let u = QuadExt::from_rat(ctx.qpow(-t), q);
                let u_next = QuadExt::from_rat(ctx.qpow(-t - 1), q);
                let lhs = &QuadExt::from_rat(kernels::rho_weight(ctx, r1, r2, t), q)
                    * &factors.eval_up(&u);
                let rhs = &QuadExt::from_rat(kernels::rho_weight(ctx, r1, r2, t + 1), q)
                    * &factors.eval_down(&u_next);
                if lhs != rhs {
                    fe_ok = false;
                }
            }
            checks.push(Check {
                name: "weight-functional-equation".into(),
                params: params.clone(),
                status: if fe_ok { Status::Pass } else { Status::Fail },
                lhs: None,
                rhs: None,
                constant: None,
            });
            // both ladder recurrences reproduce the closed-form grid
            for s in 1..=cap_n(n, r1, r2) {
                let prev = rho_s_grid(ctx, r1, r2, s - 1);
                let here = rho_s_grid(ctx, r1, r2, s);
                let mut rec_ok = true;
                let (lo, hi) = here.support_range().unwrap_or((s, s));
                for k in (lo - 2)..=(hi + 2) {
                    if k.rem_euclid(2) != s.rem_euclid(2) {
                        continue;
                    }
                    let via_up =
                        &prev.value(k - 1) * &factors.eval_up(&QuadExt::half_pow(q, -(k + s - 2)));
                    let via_down =
                        &prev.value(k + 1) * &factors.eval_down(&QuadExt::half_pow(q, s - 2 - k));
                    if via_up != here.value(k) || via_down != here.value(k) {
                        rec_ok = false;
                    }
                }
                checks.push(Check {
                    name: "ladder-recurrences-agree".into(),
                    params: format!("r1={r1} r2={r2} s={s}"),
                    status: if rec_ok { Status::Pass } else { Status::Fail },
                    lhs: None,
                    rhs: None,
                    constant: None,
                });
            }
            // weight sums against their closed forms
            for s in 0..=cap_n(n, r1, r2) {
                checks.push(eq_check(
                    "weight-sum-closed-form",
                    format!("r1={r1} r2={r2} s={s}"),
                    weight_sum(ctx, r1, r2, s)?,
                    weight_sum_closed(ctx, r1, r2, s),
                ));
            }
            // s-fold difference of the kernel polynomial is the predicted
            // constant
            for s in 0..=cap_n(n, r1, r2) {
                let k = qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1)?;
                let mut g = sampled_kernel_grid(&k, s + 1);
                let (glo, ghi) = g.support_range().expect("nonempty sample");
                for _ in 0..s {
                    g = g.apply_d();
                }
                let sign = if s % 2 == 0 { Rat::one() } else { -Rat::one() };
                let expect = &QuadExt::from_rat(
                    sign * kernels::main_coefficient(ctx, r1, r2, s)? * ctx.poch_desc(s, s)
                        / crate::scalar::int_pow(q - 1, s),
                    q,
                ) * &QuadExt::half_pow(q, -choose2(s));
                let mut law_ok = true;
                for key in (glo + s)..=(ghi - s) {
                    if key.rem_euclid(2) != s.rem_euclid(2) {
                        continue;
                    }
                    if g.value(key) != expect {
                        law_ok = false;
                    }
                }
                checks.push(Check {
                    name: "iterated-difference-leading-law".into(),
                    params: format!("r1={r1} r2={r2} s={s}"),
                    status: if law_ok { Status::Pass } else { Status::Fail },
                    lhs: None,
                    rhs: None,
                    constant: Some(expect.to_string()),
                });
            }
            // structured summation-by-parts pairing: the reversed kernel
            // against the next-to-last ladder difference
            for s in 1..=cap_n(n, r1, r2) {
                let kb = qhahn_kernel(ctx, r2, r1, s, QHahnForm::Form1)?;
                // s-1 differences leave the ladder on the half-integer grid
                let mut ladder = rho_s_grid(ctx, r1, r2, s);
                for _ in 0..s - 1 {
                    ladder = ladder.apply_d();
                }
                let f = sampled_kernel_grid(&kb, s + n + 2);
                let (lhs, rhs) = summation_by_parts(&f, &ladder)?;
                checks.push(eq_check(
                    "parts-kernel-ladder-pairing",
                    format!("r1={r1} r2={r2} s={s}"),
                    lhs.to_string(),
                    rhs.to_string(),
                ));
            }
        }
    }
    // randomized summation-by-parts instances with fixed seed
    let mut rng = ChaCha8Rng::seed_from_u64(0x0071_a550);
    let mut failures = 0usize;
    const PAIR_COUNT: usize = 100;
    for _ in 0..PAIR_COUNT {
        let f = random_grid(&mut rng, q, 0);
        let g = random_grid(&mut rng, q, 1);
        let (lhs, rhs) = summation_by_parts(&f, &g)?;
        if lhs != rhs {
            failures += 1;
        }
    }
    checks.push(eq_check(
        "parts-randomized",
        format!("pairs={PAIR_COUNT}"),
        format!("{failures} failures"),
        "0 failures".to_string(),
    ));
    Ok(checks)
}

fn random_grid(rng: &mut ChaCha8Rng, q: i64, parity: u8) -> GridFunction {
    let start: i64 = rng.gen_range(-6..=6);
    let len: i64 = rng.gen_range(0..=8);
    let mut g = GridFunction::new(q, parity);
    for i in 0..len {
        let k = 2 * (start + i) + parity as i64;
        let a = Rat::from_integer(rng.gen_range(-9i64..=9).into());
        let b = Rat::from_integer(rng.gen_range(-9i64..=9).into());
        g.set(k, QuadExt::new(a, b, q));
    }
    g
}

fn suite_spherical(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let p = require_prime(q)?;
    let ctx = ctx_for(q, n)?;
    let mut checks = Vec::new();
    for r in 0..=n {
        let space = geometry::enumerate_subspaces(p, n as usize, r as usize, budget)?;
        let x0 = 0usize;
        let dist = |a: usize, b: usize| {
            distance(space.point(a), space.point(b)).expect("same ambient").0 as i64
        };
        // one representative point per distance class around x0
        let mut reps: Vec<(i64, usize)> = Vec::new();
        for i in 0..space.len() {
            let d = dist(i, x0);
            if !reps.iter().any(|(dd, _)| *dd == d) {
                reps.push((d, i));
            }
        }
        reps.sort_unstable();
        for s in 0..=r.min(n - r) {
            let psi = qhahn_kernel(ctx, r, r, s, QHahnForm::Form1)?;
            for &(d1, x1) in &reps {
                for &(d2, x2) in &reps {
                    let (lhs, rhs) = algebra::spherical_check(&space, &psi, x0, x1, x2)?;
                    checks.push(eq_check(
                        "spherical-functional-equation",
                        format!("r={r} s={s} d1={d1} d2={d2}"),
                        lhs,
                        rhs,
                    ));
                }
            }
        }
    }
    Ok(checks)
}

fn suite_adjoint(q: i64, n: i64, budget: usize) -> Result<Vec<Check>, AlgebraError> {
    require_prime(q)?;
    let ctx = ctx_for(q, n)?;
    let spaces = Spaces::new(budget);
    let mut checks = Vec::new();
    // winner: does the matrix-transpose oracle match the kernel-relation
    // expression or the d-factor expression?
    let mut winners: Vec<&'static str> = Vec::new();
    for r1 in 0..=n {
        for r2 in 0..=n {
            for s in 0..=cap_n(n, r1, r2) {
                let thm = adjoint_constant_kernel_route(ctx, r1, r2, s);
                let alt = adjoint_constant_d_route(ctx, r1, r2, s);
                let oracle = adjoint_constant_oracle(&spaces, ctx, r1, r2, s)?;
                let winner = if thm == alt {
                    "tie"
                } else if oracle == thm {
                    "kernel-relation"
                } else if oracle == alt {
                    "d-factor"
                } else {
                    "neither"
                };
                if winner != "tie" {
                    winners.push(winner);
                }
                checks.push(Check {
                    name: "adjoint-arbitration".into(),
                    params: format!("r1={r1} r2={r2} s={s} winner={winner}"),
                    status: if winner == "neither" { Status::Fail } else { Status::Pass },
                    lhs: Some(thm.to_string()),
                    rhs: Some(alt.to_string()),
                    constant: Some(oracle.to_string()),
                });
            }
        }
    }
    let consistent = !winners.is_empty() && winners.iter().all(|w| *w == winners[0]);
    checks.push(Check {
        name: "adjoint-winner-consistent".into(),
        params: format!("instances={}", winners.len()),
        status: if consistent { Status::Pass } else { Status::Fail },
        lhs: None,
        rhs: None,
        constant: winners.first().map(|w| w.to_string()),
    });
    Ok(checks)
}

fn suite_fixed_s(q: i64, n: i64, _budget: usize) -> Result<Vec<Check>, AlgebraError> {
    let ctx = ctx_for(q, n)?;
    let mut checks = Vec::new();
    for variant in FixedSVariant::ALL {
        for r1 in 0..=n {
            for r2 in 0..=n {
                for r3 in 0..=n {
                    if !variant.applicable(r1, r2, r3) {
                        continue;
                    }
                    for s in 0..=n / 2 {
                        let report = fixed_s_check(ctx, r1, r2, r3, s, variant)?;
                        checks.push(Check {
                            name: format!("fixed-s-{variant:?}").to_lowercase(),
                            params: format!("r1={r1} r2={r2} r3={r3} s={s}"),
                            status: if report.holds { Status::Pass } else { Status::Fail },
                            lhs: None,
                            rhs: None,
                            constant: report.constant.map(|c| c.to_string()),
                        });
                    }
                }
            }
        }
    }
    Ok(checks)
}

/// Names of the individual suites, in `verify all` execution order.
pub const SUITE_NAMES: [&str; 10] = [
    "spectrum",
    "group-laplacian",
    "pentagon",
    "difference",
    "product",
    "radon",
    "norms",
    "rodrigues",
    "spherical",
    "adjoint",
];

/// All suite names plus `fixed-s` (listed separately because its sweep is
/// large) and the aggregate `all`.
pub fn available_suites() -> Vec<&'static str> {
    let mut v = SUITE_NAMES.to_vec();
    v.push("fixed-s");
    v.push("all");
    v
}

fn dispatch(suite: &str, q: i64, n: i64, budget: usize) -> Result<Vec<Check>, VerifyError> {
    let checks = match suite {
        "spectrum" => suite_spectrum(q, n, budget),
        "group-laplacian" => suite_group_laplacian(q, n, budget),
        "pentagon" => suite_pentagon(q, n, budget),
        "difference" => suite_difference(q, n, budget),
        "product" => suite_product(q, n, budget),
        "radon" => suite_radon(q, n, budget),
        "norms" => suite_norms(q, n, budget),
        "rodrigues" => suite_rodrigues(q, n, budget),
        "spherical" => suite_spherical(q, n, budget),
        "adjoint" => suite_adjoint(q, n, budget),
        "fixed-s" => suite_fixed_s(q, n, budget),
        other => {
            return Err(VerifyError::UnknownSuite(
                other.to_string(),
                available_suites().join(", "),
            ))
        }
    };
    Ok(checks?)
}

/// Runs one suite (or `all`) and wraps the result in a timed report.
pub fn run_suite(suite: &str, q: i64, n: i64, budget: usize) -> Result<SuiteReport, VerifyError> {
    let start = Instant::now();
    let checks = if suite == "all" {
        let mut all = Vec::new();
        for name in SUITE_NAMES {
            all.extend(dispatch(name, q, n, budget)?);
        }
        all.extend(dispatch("fixed-s", q, n, budget)?);
        all
    } else {
        dispatch(suite, q, n, budget)?
    };
    Ok(SuiteReport {
        suite: suite.to_string(),
        q,
        n,
        checks,
        elapsed_ms: start.elapsed().as_millis(),
    })
}
