//! Property-based invariants over randomized inputs.

use proptest::prelude::*;
use qgrass_core::geometry::Subspace;
use qgrass_core::kernels::{
    cap_n, qhahn_kernel, summation_by_parts, GridFunction, QHahnForm,
};
use qgrass_core::linalg::Mat;
use qgrass_core::scalar::{QuadExt, Rat};
use qgrass_core::QContext;
use num_traits::Zero;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (-50i64..=50, 1i64..=20).prop_map(|(num, den)| Rat::new(num.into(), den.into()))
}

fn arb_quad(q: i64) -> impl Strategy<Value = QuadExt> {
    (arb_rat(), arb_rat()).prop_map(move |(a, b)| QuadExt::new(a, b, q))
}

proptest! {
    #[test]
    fn rat_normalization_is_idempotent(num in -1000i64..=1000, den in 1i64..=1000) {
        let r = Rat::new(num.into(), den.into());
        let again = Rat::new(r.numer().clone(), r.denom().clone());
        prop_assert_eq!(&r, &again);
        prop_assert!(num_traits::Signed::is_positive(r.denom()) || num == 0);
    }

    #[test]
    fn quad_conjugate_product_is_rational(a in arb_quad(3), _pad in 0..1u8) {
        let prod = &a * &a.conj();
        prop_assert_eq!(prod.to_rat().unwrap(), a.norm());
    }

    #[test]
    fn quad_ring_identities(a in arb_quad(5), b in arb_quad(5), c in arb_quad(5)) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a - &a, QuadExt::zero(5));
        if let Some(inv) = b.inv() {
            prop_assert_eq!(&(&a * &b) * &inv, a);
        }
    }

    #[test]
    fn nullspace_vectors_annihilate(entries in proptest::collection::vec(arb_rat(), 12)) {
        let m = Mat::from_fn(3, 4, |i, j| entries[i * 4 + j].clone());
        let basis = m.nullspace();
        prop_assert_eq!(basis.len() + m.rank(), 4);
        for v in &basis {
            let image = m.mul_vec(v).unwrap();
            prop_assert!(image.iter().all(Rat::is_zero));
        }
    }

    #[test]
    fn rref_canonical_under_row_operations(
        rows in proptest::collection::vec(proptest::collection::vec(0u64..3, 4), 2),
        scale in 1u64..3,
    ) {
        // a subspace is the same regardless of the spanning set presented
        let a = Subspace::from_rows(3, 4, rows.clone());
        let mut messed = rows.clone();
        // add a multiple of row 0 to row 1 and rescale row 0
        for j in 0..4 {
            messed[1][j] = (messed[1][j] + scale * messed[0][j]) % 3;
        }
        for j in 0..4 {
            messed[0][j] = messed[0][j] * scale % 3;
        }
        let b = Subspace::from_rows(3, 4, messed);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn summation_by_parts_on_random_grids(
        f_vals in proptest::collection::vec((arb_rat(), arb_rat()), 0..8),
        g_vals in proptest::collection::vec((arb_rat(), arb_rat()), 0..8),
        f_start in -5i64..5,
        g_start in -5i64..5,
    ) {
        let q = 2;
        let mut f = GridFunction::new(q, 0);
        for (i, (a, b)) in f_vals.iter().enumerate() {
            f.set(2 * (f_start + i as i64), QuadExt::new(a.clone(), b.clone(), q));
        }
        let mut g = GridFunction::new(q, 1);
        for (i, (a, b)) in g_vals.iter().enumerate() {
            g.set(2 * (g_start + i as i64) + 1, QuadExt::new(a.clone(), b.clone(), q));
        }
        let (lhs, rhs) = summation_by_parts(&f, &g).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn kernel_polynomial_degree_is_exactly_s(
        q in 2i64..=5,
        n in 1i64..=5,
        r1 in 0i64..=5,
        r2 in 0i64..=5,
        s_seed in 0i64..=5,
    ) {
        prop_assume!(r1 <= n && r2 <= n);
        let cap = cap_n(n, r1, r2);
        let s = s_seed.min(cap);
        let ctx = QContext::new(q, n).unwrap();
        let k = qhahn_kernel(ctx, r1, r2, s, QHahnForm::Form1).unwrap();
        prop_assert_eq!(k.poly_degree(), Some(s as usize));
    }

    #[test]
    fn difference_flips_grid_parity_and_kills_constants(
        vals in proptest::collection::vec(arb_rat(), 2..7),
        start in -4i64..4,
    ) {
        let q = 3;
        let mut f = GridFunction::new(q, 0);
        let constant = vals[0].clone();
        for i in 0..vals.len() as i64 {
            f.set(2 * (start + i), QuadExt::from_rat(constant.clone(), q));
        }
        let df = f.apply_d();
        prop_assert_eq!(df.parity(), 1);
        // interior keys see the constant on both sides
        for k in (2 * start + 1)..(2 * (start + vals.len() as i64) - 1) {
            if k.rem_euclid(2) == 1 {
                prop_assert!(df.value(k).is_zero());
            }
        }
    }
}
