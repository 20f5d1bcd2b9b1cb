mod common;

use mlab_core::picard_fuchs::pf_system;
use mlab_core::reduction::melnikov_symbolic;
use mlab_core::scalar::{int, rat};
use mlab_core::synthesis::{annihilator_residual, eliminate_and_form_f1, sqrt_mix_zero_bound, synthesize_l, ReducedForm};
use mlab_core::{FamilyCase, PerturbationSpec, PolyQ};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn operators_annihilate_phi1() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for case in [FamilyCase::elliptic(int(1)).unwrap(), FamilyCase::triangle()] {
        let an = case.primary_annulus().id;
        let sys = pf_system(&case, an).unwrap();
        let q = common::quad(&case);
        for _ in 0..10 {
            let comb = melnikov_symbolic(&case, an, &PerturbationSpec::random(3, &mut rng)).unwrap();
            let elim = eliminate_and_form_f1(&sys, &comb, 3).unwrap();
            let syn = synthesize_l(&sys, &elim.f1.phi1(), 3).unwrap();
            assert!(syn.nullity >= 1 && syn.degrees_pass);
            assert_eq!((syn.equations, syn.unknowns), (41, 42));
            for h in common::grid(&case, 30) {
                assert!(annihilator_residual(&q, &syn.operator, &elim.f1.phi1(), h).unwrap() <= 1e-5);
            }
        }
    }
}

#[test]
fn elimination_identity_holds_for_every_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for case in common::families() {
        let an = case.primary_annulus().id;
        let sys = pf_system(&case, an).unwrap();
        let q = common::quad(&case);
        for n in [3, 4, 5] {
            let comb = melnikov_symbolic(&case, an, &PerturbationSpec::random(n, &mut rng)).unwrap();
            let elim = eliminate_and_form_f1(&sys, &comb, n).unwrap();
            for h in common::grid(&case, 8) {
                let jets = q.generator_jets::<5>(h).unwrap();
                let r = elim.residual(&comb, &jets);
                assert!(r.relative() <= 1e-7, "{} n={n} h={h} {r:?}", case.label());
            }
            let syn = synthesize_l(&sys, &elim.f1.phi1(), n).unwrap();
            assert!(syn.nullity >= 1, "{} n={n}", case.label());
        }
    }
}

fn scaled(form: &ReducedForm, c: &PolyQ) -> ReducedForm {
    ReducedForm::new(form.kind, form.parts.iter().map(|(q, p)| (*q, p * c)).collect(), form.phi1_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn operator_ignores_constant_rescaling(seed in any::<u64>(), num in 1i64..=9, den in 1i64..=9, neg in any::<bool>()) {
        let case = FamilyCase::triangle();
        let an = case.primary_annulus().id;
        let sys = pf_system(&case, an).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let comb = melnikov_symbolic(&case, an, &PerturbationSpec::random(3, &mut rng)).unwrap();
        let phi1 = eliminate_and_form_f1(&sys, &comb, 3).unwrap().f1.phi1();
        let c = if neg { -rat(num, den) } else { rat(num, den) };
        let a = synthesize_l(&sys, &phi1, 3).unwrap();
        let b = synthesize_l(&sys, &scaled(&phi1, &PolyQ::constant(c)), 3).unwrap();
        prop_assert_eq!(a.operator, b.operator);
    }

    #[test]
    fn zero_bound_is_monotone(
        d0 in -1isize..8,
        degs in prop::collection::vec(-1isize..8, 0..4),
        which in 0usize..5,
    ) {
        let poly = |d: isize| if d < 0 { PolyQ::zero() } else { PolyQ::monomial(int(1), d as usize) };
        let parts: Vec<(PolyQ, mlab_core::Rational)> = degs.iter().enumerate().map(|(k, d)| (poly(*d), int(k as i64 + 2))).collect();
        let base = sqrt_mix_zero_bound(&poly(d0), &parts);
        let bumped = if which >= parts.len() {
            sqrt_mix_zero_bound(&poly(d0 + 1), &parts)
        } else {
            let mut p = parts.clone();
            p[which].0 = poly(degs[which] + 1);
            sqrt_mix_zero_bound(&poly(d0), &p)
        };
        prop_assert!(bumped >= base);
    }
}

use num_traits::Zero;
