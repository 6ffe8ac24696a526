//! Closed-form evaluation of the intertwiner kernels between Grassmann
//! levels.
//!
//! A kernel is a function `lambda` on the distance index set
//! `I_n(r1, r2) = { max(0, r2-r1) .. min(r2, n-r1) }` which extends to a
//! unique polynomial `f` of degree `s` in the variable `u = q^(-t)`. This
//! module evaluates the kernels several algebraically independent ways:
//!
//! * four terminating basic hypergeometric series (all agreeing after the
//!   shared `f(1) = 1` normalization),
//! * truncated q-Gauss closed forms for the extremal parameter shapes,
//! * a Rodrigues-type formula driven by the divided-difference operator on a
//!   geometric grid (see [`grid`] and [`rodrigues`]),
//!
//! and the verification suites demand exact agreement between all of them and
//! the spectral-projection oracle of [`crate::algebra`].

mod grid;
mod rodrigues;

pub use grid::{hyperop_apply, summation_by_parts, DifferenceFactors, GridFunction};
pub use rodrigues::{
    kernel_inner_product, rho_grid, rho_s_grid, rho_s_weight, rho_weight, rodrigues_eval,
    weight_sum, weight_sum_closed,
};

use crate::qcomb::QContext;
use crate::scalar::{choose2, int_pow, Rat};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("{what} = {value} out of range 0..={limit}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        limit: i64,
    },
    #[error("eigenindex s = {s} out of range 0..={cap}")]
    SOutOfRange { s: i64, cap: i64 },
    #[error("series denominator factor vanishes at term {k}")]
    SeriesDenominatorVanishes { k: i64 },
    #[error("kernels live on different index sets: I({n1};{r1a},{r2a}) vs I({n2};{r1b},{r2b})")]
    IndexSetMismatch {
        n1: i64,
        r1a: i64,
        r2a: i64,
        n2: i64,
        r1b: i64,
        r2b: i64,
    },
    #[error("nonzero sqrt(q) component survived where a rational was required ({context})")]
    IrrationalResidue { context: &'static str },
    #[error("extremal closed form needs s <= r <= n-s, got r={r}, s={s}, n={n}")]
    ExtremalNotApplicable { r: i64, s: i64, n: i64 },
    #[error("grid offsets incompatible: expected parities (0, 1), got ({0}, {1})")]
    OffsetMismatch(u8, u8),
    #[error("cannot normalize: interpolated value at u = 1 is zero")]
    UnnormalizableKernel,
}

/// The distance index set `I_n(r1, r2)`.
pub fn index_set(n: i64, r1: i64, r2: i64) -> RangeInclusive<i64> {
    0.max(r2 - r1)..=r2.min(n - r1)
}

/// `N(r1, r2) = min(r1, r2, n-r1, n-r2)`; the index set has `N + 1` points.
pub fn cap_n(n: i64, r1: i64, r2: i64) -> i64 {
    r1.min(r2).min(n - r1).min(n - r2)
}

fn check_dims(ctx: QContext, r1: i64, r2: i64) -> Result<(), KernelError> {
    for (what, value) in [("r1", r1), ("r2", r2)] {
        if value < 0 || value > ctx.n() {
            return Err(KernelError::OutOfRange {
                what,
                value,
                limit: ctx.n(),
            });
        }
    }
    Ok(())
}

/// Whether the kernel values are scaled so the interpolating polynomial
/// satisfies `f(1) = 1` (the canonical normalization).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    PolyAtOne,
    Raw,
}

/// A kernel `lambda: I_n(r1, r2) -> Q` with its parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntertwinerKernel {
    ctx: QContext,
    r1: i64,
    r2: i64,
    s: i64,
    values: BTreeMap<i64, Rat>,
    normalization: Normalization,
}

impl IntertwinerKernel {
    /// Wraps a value table, checking it covers the index set exactly.
    ///
    /// `s` larger than `N(r1, r2)` is allowed only for the all-zero kernel
    /// (the standing convention for out-of-range eigenindices).
    pub fn new(
        ctx: QContext,
        r1: i64,
        r2: i64,
        s: i64,
        values: BTreeMap<i64, Rat>,
        normalization: Normalization,
    ) -> Result<Self, KernelError> {
        check_dims(ctx, r1, r2)?;
        let expected: Vec<i64> = index_set(ctx.n(), r1, r2).collect();
        let got: Vec<i64> = values.keys().copied().collect();
        if expected != got {
            return Err(KernelError::IndexSetMismatch {
                n1: ctx.n(),
                r1a: r1,
                r2a: r2,
                n2: ctx.n(),
                r1b: *got.first().unwrap_or(&0),
                r2b: *got.last().unwrap_or(&0),
            });
        }
        if s < 0 || (s > cap_n(ctx.n(), r1, r2) && values.values().any(|v| !v.is_zero())) {
            return Err(KernelError::SOutOfRange {
                s,
                cap: cap_n(ctx.n(), r1, r2),
            });
        }
        Ok(IntertwinerKernel {
            ctx,
            r1,
            r2,
            s,
            values,
            normalization,
        })
    }

    /// The all-zero kernel (used when `s` exceeds `N(r1, r2)`).
    pub fn zero(ctx: QContext, r1: i64, r2: i64, s: i64) -> Self {
        let values = index_set(ctx.n(), r1, r2)
            .map(|t| (t, Rat::zero()))
            .collect();
        IntertwinerKernel {
            ctx,
            r1,
            r2,
            s,
            values,
            normalization: Normalization::Raw,
        }
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

    pub fn s(&self) -> i64 {
        self.s
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn index_set(&self) -> RangeInclusive<i64> {
        index_set(self.ctx.n(), self.r1, self.r2)
    }

    pub fn value(&self, t: i64) -> Option<&Rat> {
        self.values.get(&t)
    }

    /// Value at `t`, which must lie in the index set.
    pub fn at(&self, t: i64) -> &Rat {
        self.values
            .get(&t)
            .unwrap_or_else(|| panic!("t = {t} outside I_{}({}, {})", self.ctx.n(), self.r1, self.r2))
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &Rat)> {
        self.values.iter().map(|(t, v)| (*t, v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(Rat::is_zero)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        IntertwinerKernel {
            ctx: self.ctx,
            r1: self.r1,
            r2: self.r2,
            s: self.s,
            values: self.values.iter().map(|(t, v)| (*t, v * c)).collect(),
            normalization: Normalization::Raw,
        }
    }

    pub fn same_index_set(&self, other: &Self) -> bool {
        self.ctx.n() == other.ctx.n()
            && self.ctx.q() == other.ctx.q()
            && self.index_set() == other.index_set()
    }

    /// Monomial coefficients (constant first) of the unique interpolating
    /// polynomial through the points `(q^(-t), lambda(t))`.
    pub fn polynomial(&self) -> Vec<Rat> {
        let pts: Vec<(Rat, Rat)> = self
            .values
            .iter()
            .map(|(t, v)| (int_pow(self.ctx.q(), -t), v.clone()))
            .collect();
        lagrange_coefficients(&pts)
    }

    /// Exact evaluation of the interpolating polynomial at any rational `u`
    /// (also off-grid points such as `u = 1` when `0` is not in the index set).
    pub fn eval_poly(&self, u: &Rat) -> Rat {
        poly_eval(&self.polynomial(), u)
    }

    /// Degree of the interpolating polynomial; `None` for the zero kernel.
    pub fn poly_degree(&self) -> Option<usize> {
        let coeffs = self.polynomial();
        coeffs.iter().rposition(|c| !c.is_zero())
    }
}

/// Monomial coefficients of the Lagrange interpolant through `pts`.
pub fn lagrange_coefficients(pts: &[(Rat, Rat)]) -> Vec<Rat> {
    let n = pts.len();
    let mut acc = vec![Rat::zero(); n.max(1)];
    for (i, (xi, yi)) in pts.iter().enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = vec![Rat::one()];
        let mut denom = Rat::one();
        for (j, (xj, _)) in pts.iter().enumerate() {
            if i == j {
                continue;
            }
            basis = poly_mul_linear(&basis, xj);
            denom *= xi - xj;
        }
        let scale = yi / denom;
        for (a, b) in acc.iter_mut().zip(&basis) {
            *a += b * &scale;
        }
    }
    acc
}

/// Multiplies a polynomial by `(u - root)`.
fn poly_mul_linear(poly: &[Rat], root: &Rat) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); poly.len() + 1];
    for (i, c) in poly.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c * root;
    }
    out
}

/// Horner evaluation.
pub fn poly_eval(coeffs: &[Rat], u: &Rat) -> Rat {
    let mut acc = Rat::zero();
    for c in coeffs.iter().rev() {
        acc = acc * u + c;
    }
    acc
}

/// The Laplacian eigenvalue `mu_s(n) = (q^s - 1)(q^(n-s+1) - 1)/(q - 1)^2`.
///
/// These are pairwise distinct over `0 <= s <= n/2`, which is what makes the
/// spectral projections well defined.
pub fn mu_eigenvalue(ctx: QContext, s: i64) -> Result<Rat, KernelError> {
    if s < 0 || 2 * s > ctx.n() {
        return Err(KernelError::OutOfRange {
            what: "s",
            value: s,
            limit: ctx.n() / 2,
        });
    }
    let q1 = ctx.qpow(1) - Rat::one();
    Ok((ctx.qpow(s) - Rat::one()) * (ctx.qpow(ctx.n() - s + 1) - Rat::one()) / (&q1 * &q1))
}

/// Truncated basic hypergeometric sum
/// `sum_{k=0}^{cutoff} [(a1,a2,a3; b)_k / ((b,d1,d2; b)_k)] z^k`.
///
/// The `(b; b)_k` factor in the denominator is implicit, as usual. Terms past
/// `cutoff` are ignored by construction; a vanishing denominator factor at or
/// before the cutoff is an error.
pub fn phi32_truncated(
    num: &[Rat; 3],
    den: &[Rat; 2],
    base: &Rat,
    z: &Rat,
    cutoff: i64,
) -> Result<Rat, KernelError> {
    let mut total = Rat::one();
    let mut term = Rat::one();
    let mut bpow = Rat::one(); // base^k
    for k in 0..cutoff {
        let mut numfac = Rat::one();
        for a in num {
            numfac *= Rat::one() - &bpow * a;
        }
        let mut denfac = Rat::one() - &bpow * base;
        for d in den {
            denfac *= Rat::one() - &bpow * d;
        }
        if denfac.is_zero() {
            return Err(KernelError::SeriesDenominatorVanishes { k: k + 1 });
        }
        term = term * numfac / denfac * z;
        total += &term;
        bpow *= base;
    }
    Ok(total)
}

/// The four hypergeometric expressions for a kernel. They differ in which
/// anchor point carries the normalization; this module converts each one to
/// the shared `f(1) = 1` normalization, so all four return identical tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QHahnForm {
    Form1,
    Form2,
    Form3,
    Form4,
}

impl QHahnForm {
    pub const ALL: [QHahnForm; 4] = [
        QHahnForm::Form1,
        QHahnForm::Form2,
        QHahnForm::Form3,
        QHahnForm::Form4,
    ];
}

/// Anchor values of the normalized kernel polynomial, i.e. `f(u0)` for the
/// four distinguished points `u0` with `f(1) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnchorPoint {
    /// `u0 = 1`
    One,
    /// `u0 = q^(-r2)`
    QNegR2,
    /// `u0 = q^(r1-n)`
    QR1MinusN,
    /// `u0 = q^(r1-r2)`
    QR1MinusR2,
}

impl AnchorPoint {
    pub fn u(&self, ctx: QContext, r1: i64, r2: i64) -> Rat {
        match self {
            AnchorPoint::One => Rat::one(),
            AnchorPoint::QNegR2 => ctx.qpow(-r2),
            AnchorPoint::QR1MinusN => ctx.qpow(r1 - ctx.n()),
            AnchorPoint::QR1MinusR2 => ctx.qpow(r1 - r2),
        }
    }
}

/// `f(u0) / f(1)` for the normalized kernel, in closed form.
pub fn anchor_ratio(
    ctx: QContext,
    r1: i64,
    r2: i64,
    s: i64,
    point: AnchorPoint,
) -> Result<Rat, KernelError> {
    check_s(ctx, r1, r2, s)?;
    let n = ctx.n();
    let sign = if s % 2 == 0 { Rat::one() } else { -Rat::one() };
    Ok(match point {
        AnchorPoint::One => Rat::one(),
        AnchorPoint::QNegR2 => {
            sign * ctx.qpow(choose2(s) - r1 * s) * ctx.poch_desc(r1, s) / ctx.poch_desc(n - r1, s)
        }
        AnchorPoint::QR1MinusN => {
            sign * ctx.qpow(choose2(s) + s * (r2 - n)) * ctx.poch_desc(n - r2, s)
                / ctx.poch_desc(r2, s)
        }
        AnchorPoint::QR1MinusR2 => {
            ctx.qpow(s * (r2 - r1)) * ctx.poch_desc(r1, s) * ctx.poch_desc(n - r2, s)
                / (ctx.poch_desc(n - r1, s) * ctx.poch_desc(r2, s))
        }
    })
}

/// `f(u0) / partial_s f` for the normalized kernel: the anchor value divided
/// by the leading coefficient, in closed form.
pub fn anchor_over_main_coefficient(
    ctx: QContext,
    r1: i64,
    r2: i64,
    s: i64,
    point: AnchorPoint,
) -> Result<Rat, KernelError> {
    check_s(ctx, r1, r2, s)?;
    let n = ctx.n();
    let sign = if s % 2 == 0 { Rat::one() } else { -Rat::one() };
    let top = ctx.poch_desc(n - s + 1, s);
    Ok(match point {
        AnchorPoint::One => {
            sign * ctx.qpow(s * (r1 - r2) - choose2(s)) * ctx.poch_desc(n - r1, s)
                * ctx.poch_desc(r2, s)
                / top
        }
        AnchorPoint::QNegR2 => {
            ctx.qpow(-s * r2) * ctx.poch_desc(r1, s) * ctx.poch_desc(r2, s) / top
        }
        AnchorPoint::QR1MinusN => {
            ctx.qpow(-s * (n - r1)) * ctx.poch_desc(n - r1, s) * ctx.poch_desc(n - r2, s) / top
        }
        AnchorPoint::QR1MinusR2 => {
            sign * ctx.qpow(-choose2(s)) * ctx.poch_desc(r1, s) * ctx.poch_desc(n - r2, s) / top
        }
    })
}

/// Leading coefficient of the degree-`s` kernel polynomial under `f(1) = 1`:
/// `(-1)^s q^(s(r2-r1) + C(s,2)) (q^(n-s+1); q^-1)_s /
///  ((q^(n-r1); q^-1)_s (q^(r2); q^-1)_s)`.
pub fn main_coefficient(ctx: QContext, r1: i64, r2: i64, s: i64) -> Result<Rat, KernelError> {
    check_s(ctx, r1, r2, s)?;
    let n = ctx.n();
    let sign = if s % 2 == 0 { Rat::one() } else { -Rat::one() };
    Ok(sign * ctx.qpow(s * (r2 - r1) + choose2(s)) * ctx.poch_desc(n - s + 1, s)
        / (ctx.poch_desc(n - r1, s) * ctx.poch_desc(r2, s)))
}

fn check_s(ctx: QContext, r1: i64, r2: i64, s: i64) -> Result<(), KernelError> {
    check_dims(ctx, r1, r2)?;
    let cap = cap_n(ctx.n(), r1, r2);
    if s < 0 || s > cap {
        return Err(KernelError::SOutOfRange { s, cap });
    }
    Ok(())
}

/// Evaluates the kernel `lambda_s^{r1,r2}` through one of the four
/// hypergeometric forms, normalized to `f(1) = 1`.
pub fn qhahn_kernel(
    ctx: QContext,
    r1: i64,
    r2: i64,
    s: i64,
    form: QHahnForm,
) -> Result<IntertwinerKernel, KernelError> {
    check_s(ctx, r1, r2, s)?;
    let n = ctx.n();
    let base = ctx.qpow(-1);
    let mut values = BTreeMap::new();
    for t in index_set(n, r1, r2) {
        let val = match form {
            QHahnForm::Form1 => phi32_truncated(
                &[ctx.qpow(s), ctx.qpow(t), ctx.qpow(n - s + 1)],
                &[ctx.qpow(n - r1), ctx.qpow(r2)],
                &base,
                &ctx.qpow(r2 - r1 - 1 - t),
                s,
            )?,
            QHahnForm::Form2 => {
                anchor_ratio(ctx, r1, r2, s, AnchorPoint::QNegR2)?
                    * phi32_truncated(
                        &[ctx.qpow(s), ctx.qpow(r2 - t), ctx.qpow(n - s + 1)],
                        &[ctx.qpow(r1), ctx.qpow(r2)],
                        &base,
                        &base,
                        s,
                    )?
            }
            QHahnForm::Form3 => {
                anchor_ratio(ctx, r1, r2, s, AnchorPoint::QR1MinusN)?
                    * phi32_truncated(
                        &[ctx.qpow(s), ctx.qpow(n - r1 - t), ctx.qpow(n - s + 1)],
                        &[ctx.qpow(n - r1), ctx.qpow(n - r2)],
                        &base,
                        &base,
                        s,
                    )?
            }
            QHahnForm::Form4 => {
                anchor_ratio(ctx, r1, r2, s, AnchorPoint::QR1MinusR2)?
                    * phi32_truncated(
                        &[ctx.qpow(s), ctx.qpow(r1 - r2 + t), ctx.qpow(n - s + 1)],
                        &[ctx.qpow(r1), ctx.qpow(n - r2)],
                        &base,
                        &ctx.qpow(-1 - t),
                        s,
                    )?
            }
        };
        values.insert(t, val);
    }
    IntertwinerKernel::new(ctx, r1, r2, s, values, Normalization::PolyAtOne)
}

/// The normalized kernel, or the zero kernel when `s > N(r1, r2)`.
pub fn kernel_or_zero(ctx: QContext, r1: i64, r2: i64, s: i64) -> IntertwinerKernel {
    if s > cap_n(ctx.n(), r1, r2) {
        IntertwinerKernel::zero(ctx, r1, r2, s)
    } else {
        qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1).expect("in-range kernel")
    }
}

/// Which extremal parameter shape a truncated q-Gauss evaluation applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtremalKind {
    /// Kernel from level `r` down to level `s` (so `r2 = s`).
    ToMinimal,
    /// Kernel from level `n - s` to level `r` (so `r1 = n - s`).
    FromMaximal,
}

/// Single-ratio closed form for the extremal kernels, anchored at `t = 0`.
///
/// `ToMinimal` evaluates `lambda_s^{r,s}(t) = (q^(s-r-1); q^-1)_t /
/// (q^(n-r); q^-1)_t`; `FromMaximal` evaluates `lambda_s^{n-s,r}(t) =
/// (q^(r+s-n-1); q^-1)_t / (q^r; q^-1)_t`. Both require `s <= r <= n-s`, and
/// both agree with [`qhahn_kernel`] because `t = 0` carries `f(1) = 1`.
pub fn extremal_closed_form(
    ctx: QContext,
    r: i64,
    s: i64,
    kind: ExtremalKind,
) -> Result<IntertwinerKernel, KernelError> {
    let n = ctx.n();
    if s < 0 || s > r || r > n - s {
        return Err(KernelError::ExtremalNotApplicable { r, s, n });
    }
    let (r1, r2) = match kind {
        ExtremalKind::ToMinimal => (r, s),
        ExtremalKind::FromMaximal => (n - s, r),
    };
    let mut values = BTreeMap::new();
    for t in index_set(n, r1, r2) {
        let val = match kind {
            ExtremalKind::ToMinimal => ctx.poch_desc(s - r - 1, t) / ctx.poch_desc(n - r, t),
            ExtremalKind::FromMaximal => ctx.poch_desc(r + s - n - 1, t) / ctx.poch_desc(r, t),
        };
        values.insert(t, val);
    }
    IntertwinerKernel::new(ctx, r1, r2, s, values, Normalization::PolyAtOne)
}
