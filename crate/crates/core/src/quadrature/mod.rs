//! Abelian integrals `J_{i,j}(h) = ∫ x^i y^j dx` over the upper arc of a level oval.
//!
//! The arc is parametrized by `x = x_A + L sin²θ`, `L = x_B − x_A`, so that
//! `y = L sinθ cosθ r(θ)` with `r = √(q(x)/C(x))` smooth on `[0, π/2]`. Here
//! `q` is `A(x) − h` with the two endpoint factors removed. All endpoint
//! square-root behavior disappears and composite Gauss-Legendre converges
//! spectrally. Derivatives in `h` come either from `∂y/∂h = 1/(2Cy)` or from
//! propagating Taylor [`Jet`]s through the whole integrand.

mod diff;
mod jet;

use std::fmt;
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::{AnnulusId, FamilyCase, FamilyKind};
use crate::oval::{Curve, OvalEndpoints, OvalError};
use crate::scalar::{rat, Real};

pub use diff::{richardson_first, richardson_second};
pub use jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MonomialIndex {
    pub i: usize,
    pub j: usize,
}

impl MonomialIndex {
    pub const fn new(i: usize, j: usize) -> Self {
        MonomialIndex { i, j }
    }

    pub fn degree(&self) -> usize {
        self.i + self.j
    }
}

impl fmt::Display for MonomialIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{},{}", self.i, self.j)
    }
}

const fn m(i: usize, j: usize) -> MonomialIndex {
    MonomialIndex::new(i, j)
}

const CUBIC_U1: [MonomialIndex; 3] = [m(0, 0), m(1, 0), m(0, 2)];
const CUBIC_U2: [MonomialIndex; 3] = [m(0, 1), m(1, 1), m(2, 1)];
const PARABOLIC_U1: [MonomialIndex; 2] = [m(0, 1), m(1, 1)];
const PARABOLIC_U2: [MonomialIndex; 2] = [m(1, 0), m(0, 2)];

/// Generator basis `(U1, U2)` of a family.
pub fn generator_basis(kind: FamilyKind) -> (&'static [MonomialIndex], &'static [MonomialIndex]) {
    match kind {
        FamilyKind::ParabolicSegment => (&PARABOLIC_U1, &PARABOLIC_U2),
        _ => (&CUBIC_U1, &CUBIC_U2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSettings {
    pub node_count: usize,
    pub target_rel_tol: f64,
    pub max_refinements: usize,
    /// Energies closer than this to an annulus endpoint are rejected.
    pub boundary_margin: f64,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { node_count: 64, target_rel_tol: 1e-11, max_refinements: 8, boundary_margin: 1e-6 }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<(), QuadratureError> {
        if self.node_count < 16 {
            return Err(QuadratureError::InvalidSettings(format!("node_count {} < 16", self.node_count)));
        }
        if !(self.target_rel_tol >= 1e-14) {
            return Err(QuadratureError::InvalidSettings(format!("target_rel_tol {} < 1e-14", self.target_rel_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(transparent)]
    Oval(#[from] OvalError),
    #[error("h = {h} lies within {margin} of an annulus endpoint")]
    NearBoundary { h: f64, margin: f64 },
    #[error("quadrature stalled at relative change {achieved:e} (target {target:e})")]
    NoConvergence { achieved: f64, target: f64 },
    #[error("invalid quadrature settings: {0}")]
    InvalidSettings(String),
}

/// Quadrature engine for one family and annulus.
#[derive(Clone, Debug)]
pub struct Quadrature<T: Real> {
    case: FamilyCase,
    curve: Curve<T>,
    settings: QuadratureSettings,
    rule: Arc<[(T, T)]>,
    z_coeff: Option<T>,
}

impl<T: Real> Quadrature<T> {
    pub fn new(case: &FamilyCase, annulus: AnnulusId, settings: QuadratureSettings) -> Result<Self, QuadratureError> {
        settings.validate()?;
        if settings.target_rel_tol < 100.0 * T::eps().to_f64() {
            return Err(QuadratureError::InvalidSettings(format!(
                "target_rel_tol {} is below the precision of the scalar type",
                settings.target_rel_tol
            )));
        }
        let curve = Curve::new(case, annulus)?;
        let degree = NonZeroUsize::new(settings.node_count).expect("validated node count");
        let rule: Arc<[(T, T)]> = GaussLegendre::new(degree)
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (T::of(x), T::of(w)))
            .collect();
        // Z = (3/8)(1/λ − 1) J11 + (1/4) J21 for the segment families.
        let z_coeff = case.lambda().map(|l| T::of_rational(&(rat(3, 8) * (l.recip() - rat(1, 1)))));
        Ok(Quadrature { case: case.clone(), curve, settings, rule, z_coeff })
    }

    pub fn with_defaults(case: &FamilyCase, annulus: AnnulusId) -> Result<Self, QuadratureError> {
        Self::new(case, annulus, QuadratureSettings::default())
    }

    pub fn case(&self) -> &FamilyCase {
        &self.case
    }

    pub fn curve(&self) -> &Curve<T> {
        &self.curve
    }

    pub fn settings(&self) -> &QuadratureSettings {
        &self.settings
    }

    pub fn annulus(&self) -> AnnulusId {
        self.curve.annulus()
    }

    /// Checks `h` and resolves the oval.
    pub fn context(&self, h: T) -> Result<OvalContext<'_, T>, QuadratureError> {
        let (lo, hi) = self.curve.bounds();
        if !(h > lo && h < hi) {
            return Err(OvalError::OutsideAnnulus { h: h.to_f64(), lo: lo.to_f64(), hi: hi.to_f64() }.into());
        }
        let margin = T::of(self.settings.boundary_margin);
        if h - lo < margin || hi - h < margin {
            return Err(QuadratureError::NearBoundary { h: h.to_f64(), margin: self.settings.boundary_margin });
        }
        let ends = self.curve.endpoints(h)?;
        Ok(OvalContext { quad: self, ends, x3: self.curve.third_root(&ends) })
    }

    pub fn j_integral(&self, h: T, idx: MonomialIndex) -> Result<T, QuadratureError> {
        Ok(self.context(h)?.integrals(&[idx])?[0])
    }

    pub fn j_derivative(&self, h: T, idx: MonomialIndex) -> Result<T, QuadratureError> {
        Ok(self.context(h)?.derivatives(&[idx])?[0])
    }

    /// `[J, J', ..., J^{(N−1)}]` at `h`.
    pub fn j_jet<const N: usize>(&self, h: T, idx: MonomialIndex) -> Result<[T; N], QuadratureError> {
        Ok(self.context(h)?.jets::<N>(&[idx])?[0])
    }

    /// `∫_{L_h⁻} x^i y^j dx`, from the parity fold or by direct integration along `y < 0`.
    pub fn lower_arc_integral(&self, h: T, idx: MonomialIndex, direct: bool) -> Result<T, QuadratureError> {
        let ctx = self.context(h)?;
        if direct {
            Ok(ctx.lower_integrals_direct(&[idx])?[0])
        } else {
            let upper = ctx.integrals(&[idx])?[0];
            Ok(if idx.j % 2 == 1 { upper } else { -upper })
        }
    }

    pub fn generator_vector(&self, h: T) -> Result<GeneratorVector<T>, QuadratureError> {
        let (b1, b2) = generator_basis(self.case.kind());
        let all: Vec<MonomialIndex> = b1.iter().chain(b2).copied().collect();
        let vals = self.context(h)?.integrals(&all)?;
        Ok(self.assemble(h, vals))
    }

    /// Generator values together with their first `N − 1` derivatives.
    pub fn generator_jets<const N: usize>(&self, h: T) -> Result<Vec<GeneratorVector<T>>, QuadratureError> {
        let (b1, b2) = generator_basis(self.case.kind());
        let all: Vec<MonomialIndex> = b1.iter().chain(b2).copied().collect();
        let jets = self.context(h)?.jets::<N>(&all)?;
        Ok((0..N).map(|k| self.assemble(h, jets.iter().map(|jt| jt[k]).collect())).collect())
    }

    fn assemble(&self, h: T, vals: Vec<T>) -> GeneratorVector<T> {
        let (b1, _) = generator_basis(self.case.kind());
        let (u1, u2) = vals.split_at(b1.len());
        let z = self.z_coeff.map(|c| c * u2[1] + T::of(0.25) * u2[2]);
        GeneratorVector {
            h,
            kind: self.case.kind(),
            annulus: self.annulus(),
            u1: u1.to_vec(),
            u2: u2.to_vec(),
            z,
        }
    }

    /// Composite Gauss-Legendre on `[0, π/2]` with panel doubling. `f(θ, out)`
    /// fills all integrand components at once.
    fn integrate(&self, width: usize, f: impl Fn(T, &mut [T])) -> Result<Vec<T>, QuadratureError> {
        let half_pi = T::FRAC_PI_2();
        let tol = T::of(self.settings.target_rel_tol);
        let mut buf = vec![T::zero(); width];
        let mut prev: Option<Vec<T>> = None;
        let mut worst = T::infinity();
        for level in 0..=self.settings.max_refinements {
            let panels = 1usize << level;
            let w = half_pi / T::of_usize(panels);
            let mut sum = vec![T::zero(); width];
            let mut mag = vec![T::zero(); width];
            for p in 0..panels {
                let mid = w * (T::of_usize(p) + T::of(0.5));
                for &(node, weight) in self.rule.iter() {
                    let theta = mid + T::of(0.5) * w * node;
                    f(theta, &mut buf);
                    let ww = T::of(0.5) * w * weight;
                    for k in 0..width {
                        sum[k] += ww * buf[k];
                        mag[k] += ww * buf[k].abs();
                    }
                }
            }
            if let Some(old) = &prev {
                worst = T::zero();
                for k in 0..width {
                    let scale = mag[k].max(T::min_positive_value());
                    worst = worst.max((sum[k] - old[k]).abs() / scale);
                }
                if worst <= tol {
                    return Ok(sum);
                }
            }
            prev = Some(sum);
        }
        Err(QuadratureError::NoConvergence { achieved: worst.to_f64(), target: self.settings.target_rel_tol })
    }
}

/// Generator values at one energy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorVector<T> {
    pub h: T,
    pub kind: FamilyKind,
    pub annulus: AnnulusId,
    pub u1: Vec<T>,
    pub u2: Vec<T>,
    /// `(3/8)(1/λ − 1)J11 + (1/4)J21`, segment families only.
    pub z: Option<T>,
}

impl<T: Real> GeneratorVector<T> {
    pub fn basis(&self) -> Vec<MonomialIndex> {
        let (b1, b2) = generator_basis(self.kind);
        b1.iter().chain(b2).copied().collect()
    }

    pub fn values(&self) -> Vec<T> {
        self.u1.iter().chain(&self.u2).copied().collect()
    }

    pub fn value(&self, idx: MonomialIndex) -> Option<T> {
        self.basis().iter().position(|b| *b == idx).map(|k| self.values()[k])
    }
}

/// One resolved oval; evaluates batches of monomials in a single pass.
#[derive(Clone, Debug)]
pub struct OvalContext<'a, T: Real> {
    quad: &'a Quadrature<T>,
    ends: OvalEndpoints<T>,
    x3: Option<T>,
}

impl<'a, T: Real> OvalContext<'a, T> {
    pub fn endpoints(&self) -> &OvalEndpoints<T> {
        &self.ends
    }

    pub fn h(&self) -> T {
        self.ends.h
    }

    /// `(x, sinθ cosθ, r, C(x))` at `θ` for the upper arc.
    fn geometry(&self, theta: T) -> (T, T, T, T) {
        let curve = &self.quad.curve;
        let (s, c) = theta.sin_cos();
        let l = self.ends.width();
        let x = self.ends.x_a + l * s * s;
        let cx = curve.c(x);
        let a = curve.a_coeffs();
        let q = match self.x3 {
            Some(x3) => a[3] * (x - x3),
            None => a[2],
        };
        let r = (q / cx).max(T::zero()).sqrt();
        (x, s * c, r, cx)
    }

    pub fn integrals(&self, idx: &[MonomialIndex]) -> Result<Vec<T>, QuadratureError> {
        let l = self.ends.width();
        let two = T::of(2.0);
        self.quad.integrate(idx.len(), |theta, out| {
            let (x, sc, r, _) = self.geometry(theta);
            for (o, m) in out.iter_mut().zip(idx) {
                let ly = l * sc * r;
                *o = two * l * sc * x.powi(m.i as i32) * ly.powi(m.j as i32);
            }
        })
    }

    /// Direct integration along `y < 0` from `B` back to `A`.
    pub fn lower_integrals_direct(&self, idx: &[MonomialIndex]) -> Result<Vec<T>, QuadratureError> {
        let curve = &self.quad.curve;
        let l = self.ends.width();
        let two = T::of(2.0);
        let a = *curve.a_coeffs();
        self.quad.integrate(idx.len(), |theta, out| {
            let (s, c) = theta.sin_cos();
            let x = self.ends.x_b - l * s * s;
            let q = match self.x3 {
                Some(x3) => a[3] * (x - x3),
                None => a[2],
            };
            let r = (q / curve.c(x)).max(T::zero()).sqrt();
            let y = -l * s * c * r;
            let dx = -two * l * s * c;
            for (o, m) in out.iter_mut().zip(idx) {
                *o = x.powi(m.i as i32) * y.powi(m.j as i32) * dx;
            }
        })
    }

    /// First derivatives in `h`.
    pub fn derivatives(&self, idx: &[MonomialIndex]) -> Result<Vec<T>, QuadratureError> {
        let curve = &self.quad.curve;
        let l = self.ends.width();
        let (xa, xb) = (self.ends.x_a, self.ends.x_b);
        let with_j: Vec<MonomialIndex> = idx.iter().copied().filter(|m| m.j >= 1).collect();
        let integrated = if with_j.is_empty() {
            Vec::new()
        } else {
            // d/dh ∫ x^i y^j dx = (j/2) ∫ x^i y^{j−2} / C dx.
            self.quad.integrate(with_j.len(), |theta, out| {
                let (x, sc, r, cx) = self.geometry(theta);
                for (o, m) in out.iter_mut().zip(&with_j) {
                    let jj = m.j as i32;
                    *o = T::of_usize(m.j) * l.powi(jj - 1) * x.powi(m.i as i32) * r.powi(jj - 2) * sc.powi(jj - 1) / cx;
                }
            })?
        };
        let mut k = 0;
        let mut out = Vec::with_capacity(idx.len());
        for m in idx {
            if m.j == 0 {
                let i = m.i as i32;
                let db = curve.dx_dh_on_axis(xb)?;
                let da = curve.dx_dh_on_axis(xa)?;
                out.push(xb.powi(i) * db - xa.powi(i) * da);
            } else {
                out.push(integrated[k]);
                k += 1;
            }
        }
        Ok(out)
    }

    /// `[J, J', ..., J^{(N−1)}]` for each index, by Taylor propagation in `h`.
    pub fn jets<const N: usize>(&self, idx: &[MonomialIndex]) -> Result<Vec<[T; N]>, QuadratureError> {
        let curve = &self.quad.curve;
        let a = *curve.a_coeffs();
        let cc = *curve.c_coeffs();
        let h = Jet::<T, N>::variable(self.ends.h);
        let xa = Jet::poly_root(&a, self.ends.x_a, h);
        let xb = Jet::poly_root(&a, self.ends.x_b, h);
        let l = xb - xa;
        let x3 = self.x3.map(|_| (xa + xb).add_const(a[2] / a[3]).scale(-T::one()));
        let two = T::of(2.0);
        let flat = self.quad.integrate(N * idx.len(), |theta, out| {
            let (s, c) = theta.sin_cos();
            let sc = s * c;
            let x = xa + l.scale(s * s);
            let cx = x.scale(cc[1]).add_const(cc[0]);
            let q = match x3 {
                Some(x3) => (x - x3).scale(a[3]),
                None => Jet::constant(a[2]),
            };
            let r = (q / cx).sqrt();
            let ly = (l * r).scale(sc);
            for (k, m) in idx.iter().enumerate() {
                let f = (l * x.powi(m.i as i32) * ly.powi(m.j as i32)).scale(two * sc);
                out[k * N..(k + 1) * N].copy_from_slice(&f.0);
            }
        })?;
        Ok(flat
            .chunks(N)
            .map(|ch| {
                let mut arr = [T::zero(); N];
                arr.copy_from_slice(ch);
                Jet(arr).derivatives()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn par() -> Quadrature<f64> {
        Quadrature::with_defaults(&FamilyCase::parabolic(), AnnulusId::Sole).unwrap()
    }

    #[test]
    fn parabolic_closed_forms() {
        let q = par();
        for h in [-1.9f64, -1.0, -0.2] {
            let s = (4.0 + 2.0 * h).sqrt();
            assert!((q.j_integral(h, m(0, 0)).unwrap() - 2.0 * s).abs() < 1e-12);
            assert!((q.j_integral(h, m(1, 0)).unwrap() - 4.0 * s).abs() < 1e-12);
            assert!((q.j_derivative(h, m(1, 0)).unwrap() - 4.0 / s).abs() < 1e-12);
        }
    }

    #[test]
    fn jets_agree_with_first_derivative() {
        let q = Quadrature::<f64>::with_defaults(&FamilyCase::elliptic(int(1)).unwrap(), AnnulusId::Right).unwrap();
        let ctx = q.context(-1.0).unwrap();
        let idx = [m(0, 0), m(1, 0), m(0, 1), m(2, 3)];
        let d = ctx.derivatives(&idx).unwrap();
        let v = ctx.integrals(&idx).unwrap();
        let jets = ctx.jets::<3>(&idx).unwrap();
        for k in 0..idx.len() {
            assert!((jets[k][0] - v[k]).abs() < 1e-12 * (1.0 + v[k].abs()));
            assert!((jets[k][1] - d[k]).abs() < 1e-10 * (1.0 + d[k].abs()));
        }
    }

    #[test]
    fn near_boundary_is_rejected() {
        let q = par();
        assert!(matches!(q.j_integral(-1e-7, m(0, 0)), Err(QuadratureError::NearBoundary { .. })));
        assert!(matches!(q.j_integral(0.5, m(0, 0)), Err(QuadratureError::Oval(_))));
    }

    #[test]
    fn settings_are_validated() {
        let s = QuadratureSettings { node_count: 8, ..Default::default() };
        assert!(Quadrature::<f64>::new(&FamilyCase::triangle(), AnnulusId::Sole, s).is_err());
        assert!(Quadrature::<f32>::with_defaults(&FamilyCase::triangle(), AnnulusId::Sole).is_err());
        let loose = QuadratureSettings { target_rel_tol: 1e-4, ..Default::default() };
        let q = Quadrature::<f32>::new(&FamilyCase::parabolic(), AnnulusId::Sole, loose).unwrap();
        assert!((q.j_integral(-1.0, m(0, 0)).unwrap() - 2.0 * 2f32.sqrt()).abs() < 1e-4);
    }
}
