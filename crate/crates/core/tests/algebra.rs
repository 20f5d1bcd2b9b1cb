use mlab_core::algebra::{nullspace, sturm_count, Mat};
use mlab_core::scalar::{int, rat};
use mlab_core::{PolyQ, Rational};
use num_traits::Zero;
use proptest::prelude::*;

fn poly(c: Vec<i64>) -> PolyQ {
    PolyQ::new(c.into_iter().map(int).collect())
}

fn small_poly() -> impl Strategy<Value = PolyQ> {
    prop::collection::vec(-6i64..=6, 0..6).prop_map(poly)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in small_poly(), b in small_poly(), c in small_poly()) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a - &b) + &b, a);
    }

    #[test]
    fn division_reconstructs(a in small_poly(), b in small_poly()) {
        prop_assume!(!b.is_zero());
        let (q, r) = a.div_rem(&b);
        prop_assert_eq!(&(&q * &b) + &r, a);
        prop_assert!(r.degree() < b.degree());
    }

    #[test]
    fn planted_roots_are_counted(
        roots in prop::collection::vec((-12i64..=12, 1i64..=4), 1..6),
        bump in 1i64..=5,
        lo in -4i64..=0,
        width in 1i64..=5,
    ) {
        let rs: Vec<Rational> = roots.iter().map(|&(p, q)| rat(p, q)).collect();
        // A factor without real roots must not change the count.
        let p = &PolyQ::from_roots(&rs) * &poly(vec![bump, 0, 1]);
        let (a, b) = (int(lo), int(lo + width));
        let mut distinct = rs.clone();
        distinct.sort();
        distinct.dedup();
        let expected = distinct.iter().filter(|r| **r > a && **r < b).count();
        prop_assert_eq!(sturm_count(&p, &a, &b).unwrap(), expected);
    }

    #[test]
    fn kernel_vectors_annihilate(
        entries in prop::collection::vec(-5i64..=5, 12),
        rows in 1usize..=3,
    ) {
        let cols = 4;
        let m = Mat::from_rows((0..rows).map(|r| (0..cols).map(|c| int(entries[r * cols + c])).collect()).collect());
        let kernel = nullspace(&m);
        prop_assert!(kernel.len() >= cols - rows);
        for v in kernel {
            prop_assert!(v.iter().any(|x| !x.is_zero()));
            prop_assert!(m.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
    }
}
