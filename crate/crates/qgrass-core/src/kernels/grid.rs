//! Finitely supported functions on the geometric grid `u = q^(-k/2)` and the
//! averaging / divided-difference operators acting on them.
//!
//! Grid points are indexed by the integer `k` with `u = q^(-k/2)`; a function
//! has a parity (all support keys congruent mod 2), and both operators flip
//! it. Values live in `Q(sqrt(q))`; points outside the stored support are
//! treated as exact zeros, which is correct for the compactly supported
//! weight ladders this module exists to differentiate.

use super::{index_set, IntertwinerKernel, KernelError, Normalization};
use crate::qcomb::QContext;
use crate::scalar::{QuadExt, Rat};
use std::collections::BTreeMap;

/// A finitely supported function on the half-integer geometric grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridFunction {
    q: i64,
    parity: u8,
    values: BTreeMap<i64, QuadExt>,
}

impl GridFunction {
    pub fn new(q: i64, parity: u8) -> Self {
        assert!(parity < 2);
        GridFunction {
            q,
            parity,
            values: BTreeMap::new(),
        }
    }

    /// Builds a parity-0 grid from integer-indexed values (`t` maps to key `2t`).
    pub fn from_integer_points<I: IntoIterator<Item = (i64, QuadExt)>>(q: i64, pts: I) -> Self {
        let mut g = GridFunction::new(q, 0);
        for (t, v) in pts {
            g.set(2 * t, v);
        }
        g
    }

    /// Samples a kernel on its index set (key `2t` holds `lambda(t)`).
    pub fn from_kernel(kernel: &IntertwinerKernel) -> Self {
        let q = kernel.ctx().q();
        GridFunction::from_integer_points(
            q,
            kernel.iter().map(|(t, v)| (t, QuadExt::from_rat(v.clone(), q))),
        )
    }

    pub fn q(&self) -> i64 {
        self.q
    }

    /// 0 when the support lies on integer points `q^(-t)`, 1 for the
    /// half-integer offset grid.
    pub fn parity(&self) -> u8 {
        self.parity
    }

    pub fn set(&mut self, k: i64, v: QuadExt) {
        assert_eq!(
            k.rem_euclid(2) as u8,
            self.parity,
            "key {k} has the wrong parity for this grid"
        );
        self.values.insert(k, v);
    }

    /// Value at key `k`; zero outside the stored support.
    pub fn value(&self, k: i64) -> QuadExt {
        debug_assert_eq!(k.rem_euclid(2) as u8, self.parity);
        self.values
            .get(&k)
            .cloned()
            .unwrap_or_else(|| QuadExt::zero(self.q))
    }

    pub fn support(&self) -> impl Iterator<Item = (i64, &QuadExt)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn support_range(&self) -> Option<(i64, i64)> {
        match (self.values.keys().next(), self.values.keys().next_back()) {
            (Some(a), Some(b)) => Some((*a, *b)),
            _ => None,
        }
    }

    fn output_keys(&self) -> Vec<i64> {
        // both operators read keys k-1 and k+1, so the support can grow by
        // one half-step on each side
        let Some((lo, hi)) = self.support_range() else {
            return Vec::new();
        };
        ((lo - 1)..=(hi + 1))
            .filter(|k| k.rem_euclid(2) as u8 != self.parity)
            .collect()
    }

    /// The divided-difference operator:
    /// `Df(u) = (f(q^(1/2) u) - f(q^(-1/2) u)) / ((q^(1/2) - q^(-1/2)) u)`.
    pub fn apply_d(&self) -> GridFunction {
        let q = self.q;
        let dq = &QuadExt::half_pow(q, 1) - &QuadExt::half_pow(q, -1);
        let mut out = GridFunction::new(q, 1 - self.parity);
        for k in self.output_keys() {
            let num = &self.value(k - 1) - &self.value(k + 1);
            // divide by (q^(1/2) - q^(-1/2)) q^(-k/2)
            let v = &num * &(&QuadExt::half_pow(q, k) / &dq);
            out.values.insert(k, v);
        }
        out
    }

    /// The averaging operator `Sf(u) = (f(q^(1/2) u) + f(q^(-1/2) u)) / 2`.
    pub fn apply_s(&self) -> GridFunction {
        let q = self.q;
        let half = QuadExt::from_rat(Rat::new(1.into(), 2.into()), q);
        let mut out = GridFunction::new(q, 1 - self.parity);
        for k in self.output_keys() {
            let v = &(&self.value(k - 1) + &self.value(k + 1)) * &half;
            out.values.insert(k, v);
        }
        out
    }
}

/// The quadratic factor pair driving the three-term difference relation on a
/// level pair `(r1, r2)`: `up` vanishes at the top of the index range, `down`
/// at the bottom, and their symmetric/antisymmetric combinations are the
/// `sigma`/`tau` coefficients of the second-order operator
/// `L = sigma D^2 + tau S D`.
#[derive(Clone, Debug)]
pub struct DifferenceFactors {
    ctx: QContext,
    r1: i64,
    r2: i64,
    up: [QuadExt; 3],
    down: [QuadExt; 3],
}

impl DifferenceFactors {
    /// `up(u) = q^(r1-r2-1/2) (1 - q^(r2) u)(1 - q^(n-r1) u)`,
    /// `down(u) = q^(r1-r2-1/2) (1 - u)(1 - q^(r2-r1) u)`.
    pub fn new(ctx: QContext, r1: i64, r2: i64) -> Self {
        let q = ctx.q();
        let n = ctx.n();
        let c = QuadExt::half_pow(q, 2 * (r1 - r2) - 1);
        let rq = |e: i64| QuadExt::from_rat(ctx.qpow(e), q);
        let up = [
            c.clone(),
            -&(&c * &(&rq(r2) + &rq(n - r1))),
            &c * &rq(n - r1 + r2),
        ];
        let down = [
            c.clone(),
            -&(&c * &(&rq(0) + &rq(r2 - r1))),
            &c * &rq(r2 - r1),
        ];
        DifferenceFactors { ctx, r1, r2, up, down }
    }

    pub fn ctx(&self) -> QContext {
        self.ctx
    }

    pub fn r1(&self) -> i64 {
        self.r1
    }

    pub fn r2(&self) -> i64 {
        self.r2
    }

    fn eval(coeffs: &[QuadExt; 3], u: &QuadExt) -> QuadExt {
        &coeffs[0] + &(u * &(&coeffs[1] + &(u * &coeffs[2])))
    }

    pub fn eval_up(&self, u: &QuadExt) -> QuadExt {
        Self::eval(&self.up, u)
    }

    pub fn eval_down(&self, u: &QuadExt) -> QuadExt {
        Self::eval(&self.down, u)
    }

    /// `sigma = (up + down)/2`, degree 2.
    pub fn sigma(&self, u: &QuadExt) -> QuadExt {
        let half = QuadExt::from_rat(Rat::new(1.into(), 2.into()), self.ctx.q());
        &(&self.eval_up(u) + &self.eval_down(u)) * &half
    }

    /// `tau = (up - down) / ((q^(-1/2) - q^(1/2)) u)`, degree 1.
    pub fn tau(&self, u: &QuadExt) -> QuadExt {
        let q = self.ctx.q();
        let denom = &(&QuadExt::half_pow(q, -1) - &QuadExt::half_pow(q, 1)) * u;
        &(&self.eval_up(u) - &self.eval_down(u)) / &denom
    }
}

/// Applies the hypergeometric operator `sigma D^2 + tau S D` to a kernel
/// sampled on the integer grid.
///
/// The result is rational on the index set (all `sqrt(q)` contributions
/// cancel) and equals the three-term difference form
/// `b(t)(f(t+1) - f(t)) + c(t)(f(t-1) - f(t))`; a surviving irrational part
/// signals an implementation bug and is reported as an error. Zero padding at
/// the window edges is sound because the boundary coefficients vanish there.
pub fn hyperop_apply(
    factors: &DifferenceFactors,
    kernel: &IntertwinerKernel,
) -> Result<IntertwinerKernel, KernelError> {
    let ctx = factors.ctx();
    if kernel.ctx() != ctx || kernel.r1() != factors.r1() || kernel.r2() != factors.r2() {
        return Err(KernelError::IndexSetMismatch {
            n1: ctx.n(),
            r1a: factors.r1(),
            r2a: factors.r2(),
            n2: kernel.ctx().n(),
            r1b: kernel.r1(),
            r2b: kernel.r2(),
        });
    }
    let q = ctx.q();
    let f = GridFunction::from_kernel(kernel);
    let df = f.apply_d();
    let d2f = df.apply_d();
    let sdf = df.apply_s();
    let mut values = BTreeMap::new();
    for t in index_set(ctx.n(), kernel.r1(), kernel.r2()) {
        let u = QuadExt::from_rat(ctx.qpow(-t), q);
        let v = &(&factors.sigma(&u) * &d2f.value(2 * t)) + &(&factors.tau(&u) * &sdf.value(2 * t));
        let v = v.to_rat().ok_or(KernelError::IrrationalResidue {
            context: "hypergeometric operator output",
        })?;
        values.insert(t, v);
    }
    IntertwinerKernel::new(
        ctx,
        kernel.r1(),
        kernel.r2(),
        kernel.s(),
        values,
        Normalization::Raw,
    )
}

/// Both sides of the summation-by-parts identity
/// `sum_{t in Z} f(q^-t) Dg(q^-t) q^-t = - sum_{t in Z+1/2} Df(q^-t) g(q^-t) q^-t`
/// for `f` on the integer grid and `g` on the half-integer grid.
pub fn summation_by_parts(
    f: &GridFunction,
    g: &GridFunction,
) -> Result<(QuadExt, QuadExt), KernelError> {
    if f.parity() != 0 || g.parity() != 1 {
        return Err(KernelError::OffsetMismatch(f.parity(), g.parity()));
    }
    let q = f.q();
    assert_eq!(q, g.q(), "grid bases differ");
    let dg = g.apply_d();
    let mut lhs = QuadExt::zero(q);
    let mut keys: Vec<i64> = f.support().map(|(k, _)| k).collect();
    keys.extend(dg.support().map(|(k, _)| k));
    keys.sort_unstable();
    keys.dedup();
    for k in keys {
        let term = &(&f.value(k) * &dg.value(k)) * &QuadExt::half_pow(q, -k);
        lhs = &lhs + &term;
    }
    let df = f.apply_d();
    let mut rhs = QuadExt::zero(q);
    let mut keys: Vec<i64> = df.support().map(|(k, _)| k).collect();
    keys.extend(g.support().map(|(k, _)| k));
    keys.sort_unstable();
    keys.dedup();
    for k in keys {
        let term = &(&df.value(k) * &g.value(k)) * &QuadExt::half_pow(q, -k);
        rhs = &rhs - &term;
    }
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{qhahn_kernel, QHahnForm};
    use crate::scalar::{rat, rat_frac};

    fn qctx(q: i64, n: i64) -> QContext {
        QContext::new(q, n).unwrap()
    }

    fn from_rat_points(q: i64, pts: &[(i64, Rat)]) -> GridFunction {
        GridFunction::from_integer_points(
            q,
            pts.iter().map(|(t, v)| (*t, QuadExt::from_rat(v.clone(), q))),
        )
    }

    #[test]
    fn difference_of_constant_vanishes_on_interior() {
        let f = from_rat_points(2, &[(-1, rat(5)), (0, rat(5)), (1, rat(5)), (2, rat(5))]);
        let df = f.apply_d();
        // interior keys of the flipped grid: -1, 1, 3
        for k in [-1, 1, 3] {
            assert!(df.value(k).is_zero(), "k = {k}");
        }
    }

    #[test]
    fn difference_and_average_of_linear_function() {
        let q = 3;
        let pts: Vec<(i64, Rat)> = (-2..=2).map(|t| (t, crate::scalar::int_pow(q, -t))).collect();
        let f = from_rat_points(q, &pts);
        let df = f.apply_d();
        let sf = f.apply_s();
        let half = QuadExt::from_rat(rat_frac(1, 2), q);
        let srate = &(&QuadExt::half_pow(q, 1) + &QuadExt::half_pow(q, -1)) * &half;
        for k in [-3, -1, 1, 3] {
            assert_eq!(df.value(k), QuadExt::one(q), "D of u at key {k}");
            let u = QuadExt::half_pow(q, -k);
            assert_eq!(sf.value(k), &srate * &u, "S of u at key {k}");
        }
    }

    #[test]
    fn factor_pair_shares_constant_term() {
        for (q, n, r1, r2) in [(2i64, 4i64, 1i64, 2i64), (3, 5, 2, 2), (2, 3, 2, 1)] {
            let fx = DifferenceFactors::new(qctx(q, n), r1, r2);
            let zero = QuadExt::zero(q);
            assert_eq!(fx.eval_up(&zero), fx.eval_down(&zero));
        }
    }

    #[test]
    fn sigma_tau_reconstruct_factors() {
        let ctx = qctx(2, 4);
        let fx = DifferenceFactors::new(ctx, 1, 2);
        let q = 2;
        let half = QuadExt::from_rat(rat_frac(1, 2), q);
        let shift = &(&QuadExt::half_pow(q, -1) - &QuadExt::half_pow(q, 1)) * &half;
        for k in [-2i64, -1, 0, 1, 3] {
            let u = QuadExt::half_pow(q, k);
            let recon_up = &fx.sigma(&u) + &(&(&shift * &u) * &fx.tau(&u));
            let recon_down = &fx.sigma(&u) - &(&(&shift * &u) * &fx.tau(&u));
            assert_eq!(recon_up, fx.eval_up(&u));
            assert_eq!(recon_down, fx.eval_down(&u));
        }
    }

    #[test]
    fn hyperop_annihilates_constants() {
        let ctx = qctx(2, 4);
        let k = qhahn_kernel(ctx, 2, 2, 0, QHahnForm::Form1).unwrap();
        let out = hyperop_apply(&DifferenceFactors::new(ctx, 2, 2), &k).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn hyperop_eigenrelation_on_line_kernel() {
        // sigma D^2 + tau S D applied to the degree-1 kernel at q=2, n=3
        // returns -7 times the kernel
        let ctx = qctx(2, 3);
        let k = qhahn_kernel(ctx, 1, 1, 1, QHahnForm::Form1).unwrap();
        let out = hyperop_apply(&DifferenceFactors::new(ctx, 1, 1), &k).unwrap();
        assert_eq!(out, k.scale(&rat(-7)));
    }

    #[test]
    fn parts_of_zero() {
        let f = GridFunction::new(2, 0);
        let g = GridFunction::new(2, 1);
        let (lhs, rhs) = summation_by_parts(&f, &g).unwrap();
        assert!(lhs.is_zero() && rhs.is_zero());
    }

    #[test]
    fn parts_small_hand_case() {
        // f supported at t = 0, g at t = 1/2 (key 1)
        let q = 2;
        let mut f = GridFunction::new(q, 0);
        f.set(0, QuadExt::from_rat(rat(3), q));
        let mut g = GridFunction::new(q, 1);
        g.set(1, QuadExt::from_rat(rat(5), q));
        let (lhs, rhs) = summation_by_parts(&f, &g).unwrap();
        assert_eq!(lhs, rhs);
        assert!(!lhs.is_zero());
    }

    #[test]
    fn parts_rejects_swapped_offsets() {
        let f = GridFunction::new(2, 1);
        let g = GridFunction::new(2, 0);
        assert!(matches!(
            summation_by_parts(&f, &g),
            Err(KernelError::OffsetMismatch(1, 0))
        ));
    }
}
