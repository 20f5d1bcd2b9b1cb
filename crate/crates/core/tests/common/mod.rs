#![allow(dead_code)]

use mlab_core::quadrature::Quadrature;
use mlab_core::scalar::{int, rat};
use mlab_core::FamilyCase;

/// One representative per family, plus the other two elliptic parameters.
pub fn cases() -> Vec<FamilyCase> {
    vec![
        FamilyCase::elliptic(rat(1, 2)).unwrap(),
        FamilyCase::elliptic(int(1)).unwrap(),
        FamilyCase::elliptic(rat(3, 2)).unwrap(),
        FamilyCase::hyperbolic(rat(-1, 2)).unwrap(),
        FamilyCase::parabolic(),
        FamilyCase::triangle(),
    ]
}

pub fn families() -> Vec<FamilyCase> {
    vec![
        FamilyCase::elliptic(int(1)).unwrap(),
        FamilyCase::hyperbolic(rat(-1, 2)).unwrap(),
        FamilyCase::parabolic(),
        FamilyCase::triangle(),
    ]
}

pub fn quad(case: &FamilyCase) -> Quadrature<f64> {
    Quadrature::with_defaults(case, case.primary_annulus().id).unwrap()
}

/// Point at fraction `t ∈ (0, 1)` of the primary annulus.
pub fn at(case: &FamilyCase, t: f64) -> f64 {
    let iv = case.primary_annulus();
    iv.lo::<f64>() + t * iv.length::<f64>()
}

pub fn grid(case: &FamilyCase, n: usize) -> Vec<f64> {
    let iv = case.primary_annulus();
    iv.interior_grid::<f64>(n, 1e-3 * iv.length::<f64>())
}

/// `q⁺ = y − κ` with `κ` placing a simple zero of `M = J01 − κ J00` at fraction `t`.
pub fn one_zero_perturbation(case: &FamilyCase, t: f64) -> (mlab_core::PerturbationSpec, f64) {
    use mlab_core::perturbation::{Component, Side};
    use mlab_core::quadrature::MonomialIndex;
    let q = quad(case);
    let h = at(case, t);
    let kappa = q.j_integral(h, MonomialIndex::new(0, 1)).unwrap() / q.j_integral(h, MonomialIndex::new(0, 0)).unwrap();
    let pert = mlab_core::PerturbationSpec::zero(3)
        .with(Side::Plus, Component::Q, 0, 1, int(1))
        .with(Side::Plus, Component::Q, 0, 0, -mlab_core::scalar::rational_from_f64(kappa).unwrap());
    (pert, h)
}
