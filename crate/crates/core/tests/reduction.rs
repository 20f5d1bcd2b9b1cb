mod common;

use mlab_core::perturbation::{Component, Side};
use mlab_core::quadrature::MonomialIndex;
use mlab_core::reduction::{melnikov_symbolic, reduce_monomial, recurrence_residual, verify_degrees, Recurrence, ReductionError};
use mlab_core::scalar::{int, rat};
use mlab_core::{FamilyKind, PerturbationSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn reduction_agrees_with_quadrature() {
    for case in common::cases() {
        let q = common::quad(&case);
        for h in common::grid(&case, 7) {
            let gv = q.generator_vector(h).unwrap();
            for d in 0..=6 {
                for i in 0..=d {
                    let idx = MonomialIndex::new(i, d - i);
                    let comb = reduce_monomial(&case, idx).unwrap();
                    let direct = q.j_integral(h, idx).unwrap();
                    let value = comb.evaluate(&gv);
                    assert!((value - direct).abs() <= 1e-6 * direct.abs().max(1e-3), "{} {idx} h={h}", case.label());
                }
            }
        }
    }
}

#[test]
fn every_identity_holds_numerically() {
    for case in common::families() {
        let q = common::quad(&case);
        for which in Recurrence::ALL.into_iter().filter(|r| r.applies_to(case.kind())) {
            for d in 0..=5 {
                for i in 0..=d {
                    for h in common::grid(&case, 3) {
                        match recurrence_residual(&q, h, MonomialIndex::new(i, d - i), which) {
                            Ok(r) => assert!(r.relative() < 1e-9, "{} {which:?} ({i},{}) {r:?}", case.label(), d - i),
                            Err(ReductionError::NegativeIndex | ReductionError::OffIdentity(_)) => {}
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn foreign_identities_are_rejected() {
    let q = common::quad(&mlab_core::FamilyCase::triangle());
    let r = recurrence_residual(&q, 0.1, MonomialIndex::new(1, 1), Recurrence::SegmentLowerX);
    assert!(matches!(r, Err(ReductionError::WrongFamily(_))));
}

#[test]
fn folded_even_terms_cancel() {
    // q⁺ = q⁻ on even powers of y folds to zero.
    for case in common::families() {
        let an = case.primary_annulus().id;
        let mut p = PerturbationSpec::zero(4);
        for (i, j, c) in [(0, 0, rat(3, 2)), (1, 2, int(-4)), (2, 0, rat(1, 7)), (0, 4, int(5))] {
            p = p.with(Side::Plus, Component::Q, i, j, c.clone()).with(Side::Minus, Component::Q, i, j, c);
        }
        assert!(melnikov_symbolic(&case, an, &p).unwrap().is_zero(), "{}", case.label());
    }
}

#[test]
fn random_perturbations_respect_the_ceilings() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in common::families() {
        let an = case.primary_annulus().id;
        let lo = if case.kind() == FamilyKind::ParabolicSegment { 2 } else { 3 };
        for n in lo..=9 {
            for _ in 0..10 {
                let pert = PerturbationSpec::random(n, &mut rng);
                let rep = verify_degrees(&melnikov_symbolic(&case, an, &pert).unwrap(), n);
                assert!(rep.pass, "{} n={n}: {:?}", case.label(), rep.entries);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn melnikov_is_linear(seed in any::<u64>(), num in -7i64..=7, den in 1i64..=5, k in 0usize..4) {
        let case = &common::families()[k];
        let an = case.primary_annulus().id;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = PerturbationSpec::random(3, &mut rng);
        let b = PerturbationSpec::random(3, &mut rng);
        let c = rat(num, den);
        let ma = melnikov_symbolic(case, an, &a).unwrap();
        let mb = melnikov_symbolic(case, an, &b).unwrap();
        let mut sum = ma.clone();
        sum.add_scaled(&mb, &mlab_core::PolyQ::constant(int(1)));
        prop_assert_eq!(melnikov_symbolic(case, an, &a.sum(&b)).unwrap(), sum);
        prop_assert_eq!(melnikov_symbolic(case, an, &a.scaled(&c)).unwrap(), ma.scaled(&c));
    }
}
