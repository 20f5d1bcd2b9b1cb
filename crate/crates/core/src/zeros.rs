//! Direct evaluation of `M(h)`, zero scanning on an annulus and the bound table.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::family::{AnnulusId, FamilyCase, FamilyKind};
use crate::perturbation::{Component, PerturbationSpec, Side};
use crate::quadrature::{GeneratorVector, MonomialIndex, Quadrature, QuadratureError};
use crate::reduction::{melnikov_symbolic, GeneratorCombination, NumericCombination, ReductionError};
use crate::scalar::{rat, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZeroError {
    #[error("degree n = {n} is below the threshold {min} for {family}")]
    DegreeTooSmall { n: usize, min: usize, family: &'static str },
    #[error("grid size {0} is below 100")]
    GridTooSmall(usize),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Upper bound on the number of limit cycles from the annulus.
pub fn theorem_bound(kind: FamilyKind, n: usize) -> Result<i64, ZeroError> {
    let min = if kind == FamilyKind::ParabolicSegment { 2 } else { 3 };
    if n < min {
        return Err(ZeroError::DegreeTooSmall { n, min, family: kind.name() });
    }
    let n = n as i64;
    Ok(match kind {
        FamilyKind::EllipticSegment | FamilyKind::HyperbolicSegment => 25 * n + 161,
        FamilyKind::HamiltonianTriangle => 24 * n + 126,
        FamilyKind::ParabolicSegment => 12 * n + 24,
    })
}

/// `M(h)` straight from the line integrals, without the reduction.
///
/// `dy` terms are turned into `dx` terms by parts and the lower arc is folded
/// onto the upper one.
pub fn melnikov_numeric<T: Real>(quad: &Quadrature<T>, pert: &PerturbationSpec, h: T) -> Result<T, QuadratureError> {
    let mut terms: Vec<(MonomialIndex, T)> = Vec::new();
    let fold = |j: usize| if j % 2 == 1 { T::one() } else { -T::one() };
    for side in [Side::Plus, Side::Minus] {
        for (&(i, j), b) in pert.map(side, Component::Q) {
            let s = if side == Side::Plus { T::one() } else { fold(j) };
            terms.push((MonomialIndex::new(i, j), s * T::of_rational(b)));
        }
        for (&(i, j), a) in pert.map(side, Component::P) {
            if i == 0 {
                continue;
            }
            // −∫ x^i y^j dy = (i/(j+1)) ∫ x^{i−1} y^{j+1} dx
            let s = if side == Side::Plus { T::one() } else { fold(j + 1) };
            let w = T::of_rational(&(a * rat(i as i64, j as i64 + 1)));
            terms.push((MonomialIndex::new(i - 1, j + 1), s * w));
        }
    }
    if terms.is_empty() {
        return Ok(T::zero());
    }
    let idx: Vec<MonomialIndex> = terms.iter().map(|t| t.0).collect();
    let vals = quad.context(h)?.integrals(&idx)?;
    Ok(terms.iter().zip(vals).map(|((_, w), v)| *w * v).sum())
}

/// Generator vectors on a uniform grid, shared across perturbations.
#[derive(Clone, Debug)]
pub struct GeneratorGrid<T> {
    pub points: Vec<(T, Option<GeneratorVector<T>>)>,
    /// Points whose quadrature failed twice.
    pub dropped: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanSettings {
    pub grid_size: usize,
    pub refine_tol: f64,
    /// Fraction of the annulus length excluded at each end.
    pub margin: f64,
    /// `|M|` below this fraction of `max |M|` at a local minimum flags a tangency.
    pub tangency_level: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings { grid_size: 2000, refine_tol: 1e-10, margin: 1e-4, tangency_level: 1e-6 }
    }
}

impl<T: Real> GeneratorGrid<T> {
    pub fn build(quad: &Quadrature<T>, settings: &ScanSettings) -> Result<Self, ZeroError> {
        if settings.grid_size < 100 {
            return Err(ZeroError::GridTooSmall(settings.grid_size));
        }
        let (lo, hi) = quad.curve().bounds();
        let m = T::of(settings.margin) * (hi - lo);
        let (a, b) = (lo + m, hi - m);
        let n = settings.grid_size;
        let points: Vec<(T, Option<GeneratorVector<T>>)> = (0..n)
            .into_par_iter()
            .map(|k| {
                let h = a + (b - a) * T::of_usize(k) / T::of_usize(n - 1);
                let gv = quad.generator_vector(h).or_else(|_| quad.generator_vector(h)).ok();
                (h, gv)
            })
            .collect();
        let dropped = points.iter().filter(|p| p.1.is_none()).count();
        Ok(GeneratorGrid { points, dropped })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ZeroKind {
    SignChange,
    TangencySuspect,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroItem {
    pub lo: f64,
    pub hi: f64,
    pub h: f64,
    pub kind: ZeroKind,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroReport {
    pub family: String,
    pub annulus: AnnulusId,
    pub n: usize,
    pub grid_size: usize,
    pub zeros: Vec<ZeroItem>,
    pub count_sign_changes: usize,
    pub bound: i64,
    pub within_bound: bool,
    pub dropped_points: usize,
    pub identically_zero: bool,
    /// `(h, M(h))` on the grid.
    #[serde(skip)]
    pub samples: Vec<(f64, f64)>,
}

/// Scans `M` for sign changes using the reduction on a fresh generator grid.
pub fn scan_zeros<T: Real>(
    case: &FamilyCase,
    quad: &Quadrature<T>,
    pert: &PerturbationSpec,
    settings: &ScanSettings,
) -> Result<ZeroReport, ZeroError> {
    let grid = GeneratorGrid::build(quad, settings)?;
    let comb = melnikov_symbolic(case, quad.annulus(), pert)?;
    scan_with_grid(case, quad, &comb, pert.n, &grid, settings)
}

/// Scan over a prebuilt grid; refinement evaluates fresh generator vectors.
pub fn scan_with_grid<T: Real>(
    case: &FamilyCase,
    quad: &Quadrature<T>,
    comb: &GeneratorCombination,
    n: usize,
    grid: &GeneratorGrid<T>,
    settings: &ScanSettings,
) -> Result<ZeroReport, ZeroError> {
    let num: NumericCombination<T> = comb.numeric();
    let bound = theorem_bound(case.kind(), n)?;
    let vals: Vec<(T, T)> =
        grid.points.iter().filter_map(|(h, gv)| gv.as_ref().map(|g| (*h, num.evaluate(g)))).collect();
    let identically_zero = comb.is_zero();
    let mut zeros = Vec::new();
    if !identically_zero {
        let eval = |h: T| -> Result<T, ZeroError> { Ok(num.evaluate(&quad.generator_vector(h)?)) };
        let tol = T::of(settings.refine_tol);
        // Sign changes, skipping exact zeros on the grid.
        let mut prev: Option<(T, T)> = None;
        for &(h, m) in &vals {
            if m == T::zero() {
                continue;
            }
            if let Some((hp, mp)) = prev {
                if (mp > T::zero()) != (m > T::zero()) {
                    let (mut l, mut r, mut fl) = (hp, h, mp);
                    while r - l > tol {
                        let mid = (l + r) * T::of(0.5);
                        if mid <= l || mid >= r {
                            break;
                        }
                        let fm = eval(mid)?;
                        if fm == T::zero() {
                            l = mid;
                            r = mid;
                            break;
                        }
                        if (fm > T::zero()) == (fl > T::zero()) {
                            l = mid;
                            fl = fm;
                        } else {
                            r = mid;
                        }
                    }
                    zeros.push(ZeroItem {
                        lo: hp.to_f64(),
                        hi: h.to_f64(),
                        h: ((l + r) * T::of(0.5)).to_f64(),
                        kind: ZeroKind::SignChange,
                    });
                }
            }
            prev = Some((h, m));
        }
        let scale = vals.iter().fold(T::zero(), |a, v| a.max(v.1.abs()));
        let level = T::of(settings.tangency_level) * scale;
        for w in vals.windows(3) {
            let (a, b, c) = (w[0].1, w[1].1, w[2].1);
            let same = (a > T::zero()) == (b > T::zero()) && (b > T::zero()) == (c > T::zero());
            if same && b.abs() < a.abs() && b.abs() < c.abs() && b.abs() <= level {
                zeros.push(ZeroItem {
                    lo: w[0].0.to_f64(),
                    hi: w[2].0.to_f64(),
                    h: w[1].0.to_f64(),
                    kind: ZeroKind::TangencySuspect,
                });
            }
        }
        zeros.sort_by(|x, y| x.h.total_cmp(&y.h));
    }
    let count_sign_changes = zeros.iter().filter(|z| z.kind == ZeroKind::SignChange).count();
    Ok(ZeroReport {
        family: case.label(),
        annulus: quad.annulus(),
        n,
        grid_size: grid.points.len(),
        count_sign_changes,
        within_bound: count_sign_changes as i64 <= bound,
        bound,
        zeros,
        dropped_points: grid.dropped,
        identically_zero,
        samples: vals.iter().map(|(h, m)| (Real::to_f64(*h), Real::to_f64(*m))).collect(),
    })
}

/// `M` from the reduction, for one energy.
pub fn melnikov_symbolic_value<T: Real>(
    comb: &GeneratorCombination,
    quad: &Quadrature<T>,
    h: T,
) -> Result<T, QuadratureError> {
    Ok(comb.evaluate(&quad.generator_vector(h)?))
}

/// Shared-grid stress run: random perturbations of degree `n`, each checked
/// against the bound.
pub fn stress<T: Real, R: rand::Rng>(
    case: &FamilyCase,
    annulus: AnnulusId,
    n: usize,
    count: usize,
    rng: &mut R,
    settings: &ScanSettings,
) -> Result<Vec<ZeroReport>, ZeroError> {
    let quad = Quadrature::<T>::with_defaults(case, annulus)?;
    let grid = GeneratorGrid::build(&quad, settings)?;
    (0..count)
        .map(|_| {
            let pert = PerturbationSpec::random(n, rng);
            let comb = melnikov_symbolic(case, annulus, &pert)?;
            scan_with_grid(case, &quad, &comb, n, &grid, settings)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    #[test]
    fn bound_table() {
        assert_eq!(theorem_bound(FamilyKind::EllipticSegment, 3).unwrap(), 236);
        assert_eq!(theorem_bound(FamilyKind::HamiltonianTriangle, 3).unwrap(), 198);
        assert_eq!(theorem_bound(FamilyKind::ParabolicSegment, 2).unwrap(), 48);
        assert!(theorem_bound(FamilyKind::HamiltonianTriangle, 2).is_err());
    }

    #[test]
    fn positive_generator_has_no_zeros() {
        let case = FamilyCase::parabolic();
        let quad = Quadrature::<f64>::with_defaults(&case, AnnulusId::Sole).unwrap();
        let pert = PerturbationSpec::zero(2).with(Side::Plus, Component::Q, 0, 0, int(1));
        let s = ScanSettings { grid_size: 200, ..Default::default() };
        let r = scan_zeros(&case, &quad, &pert, &s).unwrap();
        assert_eq!(r.count_sign_changes, 0);
        assert!(r.within_bound);
        let z = scan_zeros(&case, &quad, &PerturbationSpec::zero(2), &s).unwrap();
        assert!(z.identically_zero && z.zeros.is_empty());
    }
}
