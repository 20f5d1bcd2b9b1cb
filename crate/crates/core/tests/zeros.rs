mod common;

use mlab_core::quadrature::MonomialIndex;
use mlab_core::reduction::melnikov_symbolic;
use mlab_core::scalar::{int, rat, rational_to_f64};
use mlab_core::zeros::{melnikov_numeric, scan_zeros, stress, theorem_bound, ScanSettings, ZeroKind};
use mlab_core::{FamilyKind, PerturbationSpec};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn coarse() -> ScanSettings {
    ScanSettings { grid_size: 300, ..Default::default() }
}

#[test]
fn bound_formulas() {
    for n in 3..20 {
        let k = n as i64;
        assert_eq!(theorem_bound(FamilyKind::EllipticSegment, n).unwrap(), 25 * k + 161);
        assert_eq!(theorem_bound(FamilyKind::HyperbolicSegment, n).unwrap(), 25 * k + 161);
        assert_eq!(theorem_bound(FamilyKind::HamiltonianTriangle, n).unwrap(), 24 * k + 126);
    }
    for n in 2..20 {
        assert_eq!(theorem_bound(FamilyKind::ParabolicSegment, n).unwrap(), 12 * n as i64 + 24);
    }
    assert!(theorem_bound(FamilyKind::EllipticSegment, 2).is_err());
}

#[test]
fn constructed_zero_is_found() {
    for case in common::families() {
        let (pert, h) = common::one_zero_perturbation(&case, 0.4);
        let q = common::quad(&case);
        let rep = scan_zeros(&case, &q, &pert, &coarse()).unwrap();
        assert_eq!(rep.count_sign_changes, 1, "{}", case.label());
        let z = rep.zeros.iter().find(|z| z.kind == ZeroKind::SignChange).unwrap();
        assert!((z.h - h).abs() < 1e-8 * case.primary_annulus().length::<f64>(), "{}: {} vs {h}", case.label(), z.h);
    }
}

#[test]
fn scans_stay_within_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in common::families() {
        let an = case.primary_annulus().id;
        let n = if case.kind() == FamilyKind::ParabolicSegment { 2 } else { 3 };
        for r in stress::<f64, _>(&case, an, n, 25, &mut rng, &coarse()).unwrap() {
            assert!(r.within_bound && r.dropped_points == 0);
        }
    }
}

#[test]
fn reports_are_reproducible() {
    let case = mlab_core::FamilyCase::triangle();
    let run = || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        stress::<f64, _>(&case, case.primary_annulus().id, 3, 5, &mut rng, &coarse()).unwrap()
    };
    assert_eq!(run(), run());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn scaling_preserves_the_zero_set(seed in any::<u64>(), num in 1i64..=9, den in 1i64..=9, neg in any::<bool>(), k in 0usize..4) {
        let case = &common::families()[k];
        let q = common::quad(case);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pert = PerturbationSpec::random(3, &mut rng);
        let c = if neg { -rat(num, den) } else { rat(num, den) };
        let a = scan_zeros(case, &q, &pert, &coarse()).unwrap();
        let b = scan_zeros(case, &q, &pert.scaled(&c), &coarse()).unwrap();
        let brackets = |r: &mlab_core::zeros::ZeroReport| r.zeros.iter().filter(|z| z.kind == ZeroKind::SignChange).map(|z| (z.lo, z.hi)).collect::<Vec<_>>();
        prop_assert_eq!(brackets(&a), brackets(&b));
        let cf = rational_to_f64(&c);
        for ((_, ma), (_, mb)) in a.samples.iter().zip(&b.samples) {
            prop_assert!((mb - cf * ma).abs() <= 1e-12 * (cf * ma).abs().max(1e-300) + 1e-15);
        }
    }

    #[test]
    fn symbolic_matches_direct(seed in any::<u64>(), n in 2usize..=5, k in 0usize..4) {
        let case = &common::families()[k];
        prop_assume!(n >= 3 || case.kind() == FamilyKind::ParabolicSegment);
        let an = case.primary_annulus().id;
        let q = common::quad(case);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pert = PerturbationSpec::random(n, &mut rng);
        let comb = melnikov_symbolic(case, an, &pert).unwrap();
        let pairs: Vec<(f64, f64)> = common::grid(case, 20)
            .into_iter()
            .map(|h| (comb.evaluate(&q.generator_vector(h).unwrap()), melnikov_numeric(&q, &pert, h).unwrap()))
            .collect();
        let scale = pairs.iter().fold(1f64, |m, p| m.max(p.1.abs()));
        for (s, d) in pairs {
            prop_assert!((s - d).abs() <= 1e-6 * scale);
        }
    }
}

#[test]
fn single_monomial_melnikov_is_the_integral() {
    let case = mlab_core::FamilyCase::parabolic();
    let q = common::quad(&case);
    let pert = PerturbationSpec::zero(2).with(mlab_core::perturbation::Side::Plus, mlab_core::perturbation::Component::Q, 1, 0, int(1));
    for h in common::grid(&case, 5) {
        let m = melnikov_numeric(&q, &pert, h).unwrap();
        assert!((m - q.j_integral(h, MonomialIndex::new(1, 0)).unwrap()).abs() < 1e-14);
    }
}
