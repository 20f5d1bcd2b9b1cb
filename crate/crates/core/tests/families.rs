mod common;

use mlab_core::family::case_from_ab;
use mlab_core::oval::Curve;
use mlab_core::scalar::rat;
use mlab_core::{CriticalKind, FamilyCase, FamilyKind};
use proptest::prelude::*;

#[test]
fn center_energies_close_exactly_one_annulus() {
    for case in common::cases() {
        let pts = case.critical_points();
        let annuli = case.annuli();
        let saddle_levels: Vec<_> = pts.iter().filter(|p| p.kind == CriticalKind::Saddle).map(|p| p.energy_exact.clone()).collect();
        for c in pts.iter().filter(|p| p.kind == CriticalKind::Center) {
            let touching = annuli.iter().filter(|a| a.center_energy == c.energy_exact).count();
            assert_eq!(touching, 1, "{} center at {}", case.label(), c.x);
        }
        for a in &annuli {
            let other = if a.lower == a.center_energy { &a.upper } else { &a.lower };
            assert!(saddle_levels.contains(other), "{} annulus {}", case.label(), a.id);
        }
    }
}

#[test]
fn saddles_share_one_level() {
    for case in [FamilyCase::elliptic(rat(1, 2)).unwrap(), FamilyCase::elliptic(rat(3, 2)).unwrap(), FamilyCase::triangle()] {
        let e: Vec<f64> = case.critical_points().iter().filter(|p| p.kind == CriticalKind::Saddle).map(|p| p.energy).collect();
        assert!(e.len() >= 2);
        for x in &e {
            assert!((x - e[0]).abs() <= 1e-12, "{}", case.label());
        }
    }
}

#[test]
fn elliptic_sweep_keeps_four_critical_points() {
    for l in [rat(1, 2), rat(1, 1), rat(3, 2)] {
        assert_eq!(FamilyCase::elliptic(l).unwrap().critical_points().len(), 4);
    }
}

#[test]
fn boundary_points_classify() {
    assert_eq!(case_from_ab(1.0, 0.0).unwrap().kind(), FamilyKind::HamiltonianTriangle);
    assert_eq!(case_from_ab(0.5, 0.5 * 2f64.sqrt()).unwrap().kind(), FamilyKind::ParabolicSegment);
    assert!(case_from_ab(2.0, 0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn critical_points_are_stationary(num in 1i64..40, hyperbolic in any::<bool>()) {
        let case = if hyperbolic {
            FamilyCase::hyperbolic(rat(-num, 41)).unwrap()
        } else {
            FamilyCase::elliptic(rat(num, 20)).unwrap()
        };
        for p in case.critical_points() {
            let (hx, hy) = case.gradient(p.x, p.y);
            prop_assert!(hx.abs() < 1e-9 && hy.abs() < 1e-9, "{} at ({}, {})", case.label(), p.x, p.y);
            prop_assert!((case.hamiltonian(p.x, p.y) - p.energy).abs() < 1e-9);
        }
    }

    #[test]
    fn upper_arc_lies_on_the_level(t in 0.01f64..0.99, s in 0.001f64..0.999, k in 0usize..6) {
        let case = &common::cases()[k];
        let curve = Curve::<f64>::new(case, case.primary_annulus().id).unwrap();
        let h = common::at(case, t);
        let ends = curve.endpoints(h).unwrap();
        let x = ends.x_a + s * ends.width();
        let y = curve.upper_y(h, x).unwrap();
        prop_assert!(y > 0.0);
        prop_assert!((curve.hamiltonian(x, y) - h).abs() <= 1e-12 * h.abs().max(1.0));
    }

    #[test]
    fn endpoint_motion_matches_axis_derivative(t in 0.05f64..0.95, k in 0usize..6) {
        let case = &common::cases()[k];
        let curve = Curve::<f64>::new(case, case.primary_annulus().id).unwrap();
        let h = common::at(case, t);
        let step = 1e-6 * case.primary_annulus().length::<f64>();
        let (up, down) = (curve.endpoints(h + step).unwrap(), curve.endpoints(h - step).unwrap());
        let ends = curve.endpoints(h).unwrap();
        for (fd, x) in [((up.x_a - down.x_a) / (2.0 * step), ends.x_a), ((up.x_b - down.x_b) / (2.0 * step), ends.x_b)] {
            let exact = curve.dx_dh_on_axis(x).unwrap();
            prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs(), "{} fd {fd} exact {exact}", case.label());
        }
    }

    #[test]
    fn ovals_grow_away_from_the_center(t in 0.02f64..0.9, k in 0usize..6) {
        let case = &common::cases()[k];
        let iv = case.primary_annulus();
        let curve = Curve::<f64>::new(case, iv.id).unwrap();
        // Step from the center energy toward the polycycle energy.
        let toward = if iv.center_energy == iv.lower { 1.0 } else { -1.0 };
        let center = iv.center_energy.clone();
        let h0 = mlab_core::scalar::rational_to_f64(&center) + toward * t * iv.length::<f64>();
        let h1 = h0 + toward * 0.05 * iv.length::<f64>();
        let (a, b) = (curve.endpoints(h0).unwrap(), curve.endpoints(h1).unwrap());
        let cx = curve.center_x();
        prop_assert!(a.x_a < cx && cx < a.x_b);
        prop_assert!(b.x_a < a.x_a && b.x_b > a.x_b);
    }
}
