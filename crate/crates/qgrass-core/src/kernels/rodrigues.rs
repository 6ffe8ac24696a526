//! Orthogonality weights on the geometric grid, the weight ladder, and the
//! Rodrigues-type evaluation of the kernels.
//!
//! The base weight `rho` is integer valued on the index set and vanishes at
//! every other integer grid point; `rho(q^-t) q^-t` counts the pairs of
//! subspaces at distance `t`, which is what makes it the right weight for the
//! kernel inner product. The ladder functions `rho_s` live on shifted grids
//! `u = q^(-t-s/2)` and reproduce the kernels through an `s`-fold divided
//! difference.

use super::grid::GridFunction;
use super::{cap_n, index_set, IntertwinerKernel, KernelError, Normalization};
use crate::qcomb::QContext;
use crate::scalar::{choose2, int_pow, QuadExt, Rat};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

fn check_s(ctx: QContext, r1: i64, r2: i64, s: i64) -> Result<(), KernelError> {
    let cap = cap_n(ctx.n(), r1, r2);
    if s < 0 || s > cap {
        return Err(KernelError::SOutOfRange { s, cap });
    }
    Ok(())
}

/// The base weight at `u = q^(-t)`:
/// `rho(q^-t) = q^(t(r1-r2+t+1)) [n; t, r2-t, r1-r2+t, n-r1-t]_q`,
/// zero for every integer `t` outside the index set.
pub fn rho_weight(ctx: QContext, r1: i64, r2: i64, t: i64) -> Rat {
    let parts = [t, r2 - t, r1 - r2 + t, ctx.n() - r1 - t];
    let multi = ctx
        .q_multinomial(ctx.n(), &parts)
        .expect("parts always sum to n");
    if multi.is_zero() {
        return Rat::zero();
    }
    ctx.qpow(t * (r1 - r2 + t + 1)) * multi
}

/// The ladder weight at `u = q^(-t-s/2)`:
/// `rho_s(q^(-t-s/2)) = q^(s(r1-r2-1/2) + t(r1-r2+t+1)) (q^n; q^-1)_{2s}
///  [n-2s; t, r2-s-t, r1-r2+t, n-r1-s-t]_q`,
/// zero for every integer `t` outside `I_{n-2s}(r1-s, r2-s)`.
pub fn rho_s_weight(ctx: QContext, r1: i64, r2: i64, s: i64, t: i64) -> QuadExt {
    let q = ctx.q();
    let m = ctx.n() - 2 * s;
    let parts = [t, r2 - s - t, r1 - r2 + t, ctx.n() - r1 - s - t];
    let multi = ctx.q_multinomial(m, &parts).expect("parts always sum to n - 2s");
    if multi.is_zero() {
        return QuadExt::zero(q);
    }
    let rational =
        ctx.qpow(s * (r1 - r2) + t * (r1 - r2 + t + 1)) * ctx.poch_desc(ctx.n(), 2 * s) * multi;
    &QuadExt::from_rat(rational, q) * &QuadExt::half_pow(q, -s)
}

/// The base weight as a parity-0 grid function supported on the index set.
pub fn rho_grid(ctx: QContext, r1: i64, r2: i64) -> GridFunction {
    GridFunction::from_integer_points(
        ctx.q(),
        index_set(ctx.n(), r1, r2)
            .map(|t| (t, QuadExt::from_rat(rho_weight(ctx, r1, r2, t), ctx.q()))),
    )
}

/// The ladder weight `rho_s` as a grid function of parity `s mod 2`,
/// supported on keys `2t + s` for `t` in `I_{n-2s}(r1-s, r2-s)`.
pub fn rho_s_grid(ctx: QContext, r1: i64, r2: i64, s: i64) -> GridFunction {
    let mut g = GridFunction::new(ctx.q(), (s.rem_euclid(2)) as u8);
    for t in index_set(ctx.n() - 2 * s, r1 - s, r2 - s) {
        g.set(2 * t + s, rho_s_weight(ctx, r1, r2, s, t));
    }
    g
}

/// Evaluates the kernel through the Rodrigues formula:
/// `rho(u) f_s(u) = (-1)^s q^(s(r2-r1) - C(s,2)/2) (q-1)^s /
///  ((q^(n-r1); q^-1)_s (q^(r2); q^-1)_s) * D^s rho_s(u)`.
///
/// All `sqrt(q)` components cancel in the final division; a nonzero residue
/// would indicate an implementation bug and is reported as an error.
pub fn rodrigues_eval(
    ctx: QContext,
    r1: i64,
    r2: i64,
    s: i64,
) -> Result<IntertwinerKernel, KernelError> {
    check_s(ctx, r1, r2, s)?;
    let q = ctx.q();
    let n = ctx.n();
    let mut ladder = rho_s_grid(ctx, r1, r2, s);
    for _ in 0..s {
        ladder = ladder.apply_d();
    }
    let sign = if s % 2 == 0 { Rat::one() } else { -Rat::one() };
    let rational_part = sign * ctx.qpow(s * (r2 - r1)) * int_pow(q - 1, s)
        / (ctx.poch_desc(n - r1, s) * ctx.poch_desc(r2, s));
    let constant = &QuadExt::from_rat(rational_part, q) * &QuadExt::half_pow(q, -choose2(s));
    let mut values = BTreeMap::new();
    for t in index_set(n, r1, r2) {
        let rho_t = rho_weight(ctx, r1, r2, t);
        debug_assert!(!rho_t.is_zero(), "base weight vanishes inside the index set");
        let v = &(&constant * &ladder.value(2 * t)) / &QuadExt::from_rat(rho_t, q);
        let v = v.to_rat().ok_or(KernelError::IrrationalResidue {
            context: "Rodrigues evaluation",
        })?;
        values.insert(t, v);
    }
    IntertwinerKernel::new(ctx, r1, r2, s, values, Normalization::PolyAtOne)
}

/// `sum_t rho_s(q^(-t-s/2)) q^(-t-s/2)` over the full (finite) support.
pub fn weight_sum(ctx: QContext, r1: i64, r2: i64, s: i64) -> Result<Rat, KernelError> {
    check_s(ctx, r1, r2, s)?;
    let q = ctx.q();
    let mut acc = QuadExt::zero(q);
    for (k, v) in rho_s_grid(ctx, r1, r2, s).support() {
        acc = &acc + &(v * &QuadExt::half_pow(q, -k));
    }
    acc.to_rat().ok_or(KernelError::IrrationalResidue {
        context: "weight sum",
    })
}

/// Closed form of the same sum:
/// `q^(s(r1-r2-1)) (q^n; q^-1)_{2s} [n-2s, r1-s]_q [n-2s, r2-s]_q`
/// (for `s = 0` this is `[n r1]_q [n r2]_q`).
pub fn weight_sum_closed(ctx: QContext, r1: i64, r2: i64, s: i64) -> Rat {
    let m = ctx.n() - 2 * s;
    ctx.qpow(s * (r1 - r2 - 1))
        * ctx.poch_desc(ctx.n(), 2 * s)
        * ctx.q_binomial(m, r1 - s)
        * ctx.q_binomial(m, r2 - s)
}

/// The weighted inner product
/// `<a, b> = sum_t rho(q^-t) q^-t a(t) b(t)` of two kernels on the same
/// index set (real kernels, so no conjugation).
pub fn kernel_inner_product(
    a: &IntertwinerKernel,
    b: &IntertwinerKernel,
) -> Result<Rat, KernelError> {
    if !a.same_index_set(b) || a.r1() != b.r1() || a.r2() != b.r2() {
        return Err(KernelError::IndexSetMismatch {
            n1: a.ctx().n(),
            r1a: a.r1(),
            r2a: a.r2(),
            n2: b.ctx().n(),
            r1b: b.r1(),
            r2b: b.r2(),
        });
    }
    let ctx = a.ctx();
    let mut acc = Rat::zero();
    for t in a.index_set() {
        acc += rho_weight(ctx, a.r1(), a.r2(), t) * ctx.qpow(-t) * a.at(t) * b.at(t);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{qhahn_kernel, QHahnForm};
    use crate::scalar::{rat, rat_frac};

    fn ctx(q: i64, n: i64) -> QContext {
        QContext::new(q, n).unwrap()
    }

    #[test]
    fn rho_values_on_lines_of_f2_cubed() {
        let c = ctx(2, 3);
        assert_eq!(rho_weight(c, 1, 1, 0), rat(7));
        assert_eq!(rho_weight(c, 1, 1, 1), rat(84));
        assert_eq!(rho_weight(c, 1, 1, -1), rat(0));
        assert_eq!(rho_weight(c, 1, 1, 2), rat(0));
    }

    #[test]
    fn rho_times_point_counts_pairs() {
        for q in [2, 3] {
            for n in 1..=4 {
                let c = ctx(q, n);
                for r1 in 0..=n {
                    for r2 in 0..=n {
                        for t in index_set(n, r1, r2) {
                            assert_eq!(
                                rho_weight(c, r1, r2, t) * c.qpow(-t),
                                c.count_pairs_at_distance(r1, r2, t),
                                "q={q} n={n} r1={r1} r2={r2} t={t}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rho_ladder_values() {
        let c = ctx(2, 3);
        // level 1 of the ladder on (r1, r2) = (1, 1): support is the single
        // point u = q^(-1/2) with value (21/2) sqrt(2)
        let v = rho_s_weight(c, 1, 1, 1, 0);
        assert_eq!(v, QuadExt::new(rat(0), rat_frac(21, 2), 2));
        assert!(rho_s_weight(c, 1, 1, 1, 1).is_zero());
        assert!(rho_s_weight(c, 1, 1, 1, -1).is_zero());
        // s = 0 agrees with the base weight
        for t in -1..=2 {
            assert_eq!(
                rho_s_weight(c, 1, 1, 0, t),
                QuadExt::from_rat(rho_weight(c, 1, 1, t), 2)
            );
        }
    }

    #[test]
    fn difference_of_ladder_level_one() {
        // D rho_1 at u = 1/2 equals 42 for q=2, n=3, r1=r2=1
        let c = ctx(2, 3);
        let d = rho_s_grid(c, 1, 1, 1).apply_d();
        assert_eq!(d.value(2), QuadExt::from_rat(rat(42), 2));
    }

    #[test]
    fn ladder_recurrences_match_closed_form() {
        // rho_s from rho_{s-1} via either one-step recurrence equals the
        // closed form, on every grid point
        for q in [2i64, 3] {
            for n in 1..=5 {
                let c = ctx(q, n);
                for r1 in 0..=n {
                    for r2 in 0..=n {
                        let cap = cap_n(n, r1, r2);
                        for s in 1..=cap {
                            let prev = rho_s_grid(c, r1, r2, s - 1);
                            let here = rho_s_grid(c, r1, r2, s);
                            let factors = crate::kernels::DifferenceFactors::new(c, r1, r2);
                            let (lo, hi) = here
                                .support_range()
                                .map(|(a, b)| (a - 2, b + 2))
                                .unwrap_or((s - 2, s + 2));
                            for k in lo..=hi {
                                if k.rem_euclid(2) != s.rem_euclid(2) {
                                    continue;
                                }
                                let up_arg = QuadExt::half_pow(q, -(k + s - 2));
                                let via_up = &prev.value(k - 1) * &factors.eval_up(&up_arg);
                                let down_arg = QuadExt::half_pow(q, s - 2 - k);
                                let via_down = &prev.value(k + 1) * &factors.eval_down(&down_arg);
                                assert_eq!(via_up, here.value(k), "up q={q} n={n} r1={r1} r2={r2} s={s} k={k}");
                                assert_eq!(via_down, here.value(k), "down q={q} n={n} r1={r1} r2={r2} s={s} k={k}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rodrigues_degenerate_level() {
        let c = ctx(2, 4);
        let k = rodrigues_eval(c, 2, 2, 0).unwrap();
        assert!(k.iter().all(|(_, v)| v == &rat(1)));
    }

    #[test]
    fn rodrigues_hand_values() {
        let c = ctx(2, 3);
        let k = rodrigues_eval(c, 1, 1, 1).unwrap();
        assert_eq!(k.at(0), &rat(1));
        // (-1/3) * 42 / 84 = -1/6
        assert_eq!(k.at(1), &rat_frac(-1, 6));
        let k = rodrigues_eval(c, 1, 2, 1).unwrap();
        assert_eq!(k.at(1), &rat_frac(2, 9));
        assert_eq!(k.at(2), &rat_frac(-1, 6));
    }

    #[test]
    fn rodrigues_matches_qhahn() {
        for q in [2, 3] {
            for n in 1..=5 {
                let c = ctx(q, n);
                for r1 in 0..=n {
                    for r2 in 0..=n {
                        for s in 0..=cap_n(n, r1, r2) {
                            assert_eq!(
                                rodrigues_eval(c, r1, r2, s).unwrap(),
                                qhahn_kernel(c, r1, r2, s, QHahnForm::Form1).unwrap(),
                                "q={q} n={n} r1={r1} r2={r2} s={s}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn weight_sums_spot_values() {
        let c = ctx(2, 3);
        assert_eq!(weight_sum(c, 1, 1, 0).unwrap(), rat(49));
        assert_eq!(weight_sum_closed(c, 1, 1, 0), rat(49));
        assert_eq!(weight_sum(c, 1, 1, 1).unwrap(), rat_frac(21, 2));
        assert_eq!(weight_sum_closed(c, 1, 1, 1), rat_frac(21, 2));
    }

    #[test]
    fn weight_sums_match_closed_form() {
        for q in [2, 3, 4] {
            for n in 1..=5 {
                let c = ctx(q, n);
                for r1 in 0..=n {
                    for r2 in 0..=n {
                        for s in 0..=cap_n(n, r1, r2) {
                            assert_eq!(
                                weight_sum(c, r1, r2, s).unwrap(),
                                weight_sum_closed(c, r1, r2, s),
                                "q={q} n={n} r1={r1} r2={r2} s={s}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn inner_product_orthogonality() {
        let c = ctx(2, 3);
        let k0 = qhahn_kernel(c, 1, 1, 0, QHahnForm::Form1).unwrap();
        let k1 = qhahn_kernel(c, 1, 1, 1, QHahnForm::Form1).unwrap();
        assert_eq!(kernel_inner_product(&k0, &k1).unwrap(), rat(0));
        assert_eq!(kernel_inner_product(&k0, &k0).unwrap(), rat(49));
    }

    #[test]
    fn inner_product_orthogonality_sweep() {
        for q in [2, 3] {
            for n in 1..=5 {
                let c = ctx(q, n);
                for r1 in 0..=n {
                    for r2 in 0..=n {
                        let cap = cap_n(n, r1, r2);
                        let kernels: Vec<_> = (0..=cap)
                            .map(|s| qhahn_kernel(c, r1, r2, s, QHahnForm::Form1).unwrap())
                            .collect();
                        for (i, a) in kernels.iter().enumerate() {
                            for (j, b) in kernels.iter().enumerate() {
                                let ip = kernel_inner_product(a, b).unwrap();
                                if i == j {
                                    assert!(!ip.is_zero());
                                } else {
                                    assert!(ip.is_zero(), "q={q} n={n} r1={r1} r2={r2} s={i},{j}");
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn inner_product_rejects_mismatched_kernels() {
        let c = ctx(2, 3);
        let a = qhahn_kernel(c, 1, 1, 0, QHahnForm::Form1).unwrap();
        let b = qhahn_kernel(c, 1, 2, 0, QHahnForm::Form1).unwrap();
        assert!(kernel_inner_product(&a, &b).is_err());
    }
}
