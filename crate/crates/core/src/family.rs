//! The four normalized Hamiltonian families and their period annuli.
//!
//! Every family has the form `H(x, y) = A(x) + C(x) y^2`:
//!
//! | family     | `A(x)`                               | `C(x)`    |
//! |------------|--------------------------------------|-----------|
//! | elliptic   | `λx³ − 3(λ−1)x² + 3(λ−2)x`, λ∈(0,2)  | `x`       |
//! | hyperbolic | same, λ∈(−1,0)                       | `x`       |
//! | parabolic  | `x²/2 − 2x`                          | `x`       |
//! | triangle   | `x²/2 − x³/3`                        | `1/2 + x` |

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{int, rat, rational_from_f64, rational_sqrt, rational_to_f64, Real};
use crate::{PolyQ, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    EllipticSegment,
    HyperbolicSegment,
    ParabolicSegment,
    HamiltonianTriangle,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::EllipticSegment => "elliptic",
            FamilyKind::HyperbolicSegment => "hyperbolic",
            FamilyKind::ParabolicSegment => "parabolic",
            FamilyKind::HamiltonianTriangle => "triangle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnnulusId {
    Right,
    Left,
    Sole,
}

impl fmt::Display for AnnulusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AnnulusId::Right => "right",
            AnnulusId::Left => "left",
            AnnulusId::Sole => "sole",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("lambda = {0} outside the parameter range of the {1} family")]
    LambdaOutOfRange(String, &'static str),
    #[error("(a, b) = ({0}, {1}) is not on a polycycle boundary piece")]
    OutOfFamily(f64, f64),
    #[error("the {0} family has no {1} annulus")]
    NoSuchAnnulus(&'static str, AnnulusId),
}

/// A polycycle family together with its parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FamilyCase {
    kind: FamilyKind,
    lambda: Option<Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    Center,
    Saddle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    pub x: f64,
    pub y: f64,
    pub kind: CriticalKind,
    pub energy: f64,
    /// `H` at the point in exact arithmetic (always rational for these families).
    pub energy_exact: Rational,
}

/// Open energy interval of one period annulus.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyInterval {
    pub id: AnnulusId,
    pub lower: Rational,
    pub upper: Rational,
    /// Abscissa of the center the ovals surround.
    pub center_x: Rational,
    /// Energy of the center; the other endpoint is the polycycle level.
    pub center_energy: Rational,
}

impl EnergyInterval {
    pub fn lo<T: Real>(&self) -> T {
        T::of_rational(&self.lower)
    }

    pub fn hi<T: Real>(&self) -> T {
        T::of_rational(&self.upper)
    }

    pub fn length<T: Real>(&self) -> T {
        T::of_rational(&(&self.upper - &self.lower))
    }

    pub fn contains<T: Real>(&self, h: T) -> bool {
        h > self.lo() && h < self.hi()
    }

    /// `n` points spread uniformly strictly inside the interval.
    pub fn interior_grid<T: Real>(&self, n: usize, margin: T) -> Vec<T> {
        let lo = self.lo::<T>() + margin;
        let hi = self.hi::<T>() - margin;
        (0..n)
            .map(|k| lo + (hi - lo) * T::of_usize(k + 1) / T::of_usize(n + 1))
            .collect()
    }
}

impl FamilyCase {
    pub fn elliptic(lambda: Rational) -> Result<Self, FamilyError> {
        if lambda <= Rational::zero() || lambda >= int(2) {
            return Err(FamilyError::LambdaOutOfRange(lambda.to_string(), "elliptic"));
        }
        Ok(FamilyCase { kind: FamilyKind::EllipticSegment, lambda: Some(lambda) })
    }

    pub fn hyperbolic(lambda: Rational) -> Result<Self, FamilyError> {
        if lambda <= int(-1) || lambda >= Rational::zero() {
            return Err(FamilyError::LambdaOutOfRange(lambda.to_string(), "hyperbolic"));
        }
        Ok(FamilyCase { kind: FamilyKind::HyperbolicSegment, lambda: Some(lambda) })
    }

    pub fn parabolic() -> Self {
        FamilyCase { kind: FamilyKind::ParabolicSegment, lambda: None }
    }

    pub fn triangle() -> Self {
        FamilyCase { kind: FamilyKind::HamiltonianTriangle, lambda: None }
    }

    /// Elliptic for λ∈(0,2), hyperbolic for λ∈(−1,0).
    pub fn segment(lambda: Rational) -> Result<Self, FamilyError> {
        if lambda.is_negative() {
            Self::hyperbolic(lambda)
        } else {
            Self::elliptic(lambda)
        }
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn lambda(&self) -> Option<&Rational> {
        self.lambda.as_ref()
    }

    fn lam(&self) -> &Rational {
        self.lambda.as_ref().expect("segment families carry lambda")
    }

    pub fn is_segment(&self) -> bool {
        matches!(self.kind, FamilyKind::EllipticSegment | FamilyKind::HyperbolicSegment)
    }

    /// Short label such as `elliptic(λ=1/2)`.
    pub fn label(&self) -> String {
        match &self.lambda {
            Some(l) => format!("{}(λ={})", self.kind.name(), l),
            None => self.kind.name().to_string(),
        }
    }

    /// `A(x) = H(x, 0)`.
    pub fn a_poly(&self) -> PolyQ {
        match self.kind {
            FamilyKind::EllipticSegment | FamilyKind::HyperbolicSegment => {
                let l = self.lam();
                PolyQ::new(vec![
                    int(0),
                    int(3) * (l - int(2)),
                    int(-3) * (l - int(1)),
                    l.clone(),
                ])
            }
            FamilyKind::ParabolicSegment => PolyQ::new(vec![int(0), int(-2), rat(1, 2)]),
            FamilyKind::HamiltonianTriangle => PolyQ::new(vec![int(0), int(0), rat(1, 2), rat(-1, 3)]),
        }
    }

    /// `C(x)`, the coefficient of `y²`.
    pub fn c_poly(&self) -> PolyQ {
        match self.kind {
            FamilyKind::HamiltonianTriangle => PolyQ::new(vec![rat(1, 2), int(1)]),
            _ => PolyQ::new(vec![int(0), int(1)]),
        }
    }

    pub fn hamiltonian<T: Real>(&self, x: T, y: T) -> T {
        let a = self.a_poly().eval_with(x, |c| T::of_rational(c));
        let c = self.c_poly().eval_with(x, |c| T::of_rational(c));
        a + c * y * y
    }

    /// Exact `H(x, y)` from `x` and `y²`.
    pub fn hamiltonian_exact(&self, x: &Rational, y_squared: &Rational) -> Rational {
        self.a_poly().eval(x) + self.c_poly().eval(x) * y_squared
    }

    /// `(H_x, H_y)`.
    pub fn gradient<T: Real>(&self, x: T, y: T) -> (T, T) {
        let da = self.a_poly().derivative().eval_with(x, |c| T::of_rational(c));
        let dc = self.c_poly().derivative().eval_with(x, |c| T::of_rational(c));
        let c = self.c_poly().eval_with(x, |c| T::of_rational(c));
        (da + dc * y * y, T::of(2.0) * c * y)
    }

    /// Rational roots of `A'`, ascending. All four families have them.
    pub fn axis_critical_abscissas(&self) -> Vec<Rational> {
        let d = self.a_poly().derivative();
        let mut roots = match d.degree() {
            1 => vec![-d.coeff(0) / d.coeff(1)],
            2 => {
                let (a, b, c) = (d.coeff(2), d.coeff(1), d.coeff(0));
                let disc = &b * &b - int(4) * &a * &c;
                let s = rational_sqrt(&disc).expect("A' has rational roots for every family");
                let two_a = int(2) * &a;
                vec![(-&b - &s) / &two_a, (-&b + s) / two_a]
            }
            _ => Vec::new(),
        };
        roots.sort();
        roots.dedup();
        roots
    }

    pub fn critical_points(&self) -> Vec<CriticalPoint> {
        let a = self.a_poly();
        let c = self.c_poly();
        let da = a.derivative();
        let dc = c.derivative();
        let mut pts = Vec::new();
        for x0 in self.axis_critical_abscissas() {
            pts.push((x0, Rational::zero()));
        }
        // Off-axis points: C(x0) = 0 and A'(x0) + C'(x0) y² = 0.
        let x0 = -c.coeff(0) / c.coeff(1);
        let y2 = -da.eval(&x0) / dc.eval(&x0);
        if y2.is_positive() {
            pts.push((x0, y2));
        }
        let mut out = Vec::new();
        for (x0, y2) in pts {
            let energy_exact = self.hamiltonian_exact(&x0, &y2);
            let ys: Vec<f64> = if y2.is_zero() {
                vec![0.0]
            } else {
                let y = rational_to_f64(&y2).sqrt();
                vec![y, -y]
            };
            for y in ys {
                let x = rational_to_f64(&x0);
                // Hessian: H_xx = A''(x), H_yy = 2C(x), H_xy = 2C'(x) y.
                let hxx = rational_to_f64(&da.derivative().eval(&x0));
                let hyy = 2.0 * rational_to_f64(&c.eval(&x0));
                let hxy = 2.0 * rational_to_f64(&dc.eval(&x0)) * y;
                let det = hxx * hyy - hxy * hxy;
                let kind = if det > 0.0 { CriticalKind::Center } else { CriticalKind::Saddle };
                out.push(CriticalPoint {
                    x,
                    y,
                    kind,
                    energy: rational_to_f64(&energy_exact),
                    energy_exact: energy_exact.clone(),
                });
            }
        }
        out.sort_by(|p, q| p.x.total_cmp(&q.x).then(q.y.total_cmp(&p.y)));
        out
    }

    pub fn annuli(&self) -> Vec<EnergyInterval> {
        match self.kind {
            FamilyKind::EllipticSegment => {
                let l = self.lam();
                let left_center = (l - int(2)) / l;
                let left_top = self.hamiltonian_exact(&left_center, &Rational::zero());
                vec![
                    EnergyInterval {
                        id: AnnulusId::Right,
                        lower: l - int(3),
                        upper: Rational::zero(),
                        center_x: Rational::one(),
                        center_energy: l - int(3),
                    },
                    EnergyInterval {
                        id: AnnulusId::Left,
                        lower: Rational::zero(),
                        upper: left_top.clone(),
                        center_x: left_center,
                        center_energy: left_top,
                    },
                ]
            }
            FamilyKind::HyperbolicSegment => {
                let l = self.lam();
                vec![EnergyInterval {
                    id: AnnulusId::Sole,
                    lower: l - int(3),
                    upper: Rational::zero(),
                    center_x: Rational::one(),
                    center_energy: l - int(3),
                }]
            }
            FamilyKind::ParabolicSegment => vec![EnergyInterval {
                id: AnnulusId::Sole,
                lower: int(-2),
                upper: Rational::zero(),
                center_x: int(2),
                center_energy: int(-2),
            }],
            FamilyKind::HamiltonianTriangle => vec![EnergyInterval {
                id: AnnulusId::Sole,
                lower: Rational::zero(),
                upper: rat(1, 6),
                center_x: Rational::zero(),
                center_energy: Rational::zero(),
            }],
        }
    }

    pub fn annulus(&self, id: AnnulusId) -> Result<EnergyInterval, FamilyError> {
        self.annuli()
            .into_iter()
            .find(|a| a.id == id)
            .ok_or(FamilyError::NoSuchAnnulus(self.kind.name(), id))
    }

    /// The annulus used by default: Right for elliptic, Sole otherwise.
    pub fn primary_annulus(&self) -> EnergyInterval {
        self.annuli().into_iter().next().expect("every family has an annulus")
    }
}

/// Classifies a point `(a, b)` of the polycycle boundary.
///
/// `b = (1−a)(1+2a)^{1/2}` with `a∈(−1/2, 1)` gives a segment family with
/// `λ = (1 − a(1+2a))/(1+a)`; `a = 1/2` is parabolic and `(1, 0)` the triangle.
pub fn case_from_ab(a: f64, b: f64) -> Result<FamilyCase, FamilyError> {
    const TOL: f64 = 1e-10;
    if (a - 1.0).abs() <= TOL && b.abs() <= TOL {
        return Ok(FamilyCase::triangle());
    }
    if !(a > -0.5 && a < 1.0) {
        return Err(FamilyError::OutOfFamily(a, b));
    }
    let expected = (1.0 - a) * (1.0 + 2.0 * a).sqrt();
    if (b - expected).abs() > TOL {
        return Err(FamilyError::OutOfFamily(a, b));
    }
    if (a - 0.5).abs() <= TOL {
        return Ok(FamilyCase::parabolic());
    }
    let aq = rational_from_f64(a).ok_or(FamilyError::OutOfFamily(a, b))?;
    let lambda = (int(1) - &aq * (int(1) + int(2) * &aq)) / (int(1) + &aq);
    FamilyCase::segment(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_examples() {
        assert_eq!(case_from_ab(0.0, 1.0).unwrap(), FamilyCase::elliptic(int(1)).unwrap());
        assert_eq!(case_from_ab(0.5, 0.5f64.sqrt()).unwrap(), FamilyCase::parabolic());
        assert_eq!(case_from_ab(1.0, 0.0).unwrap(), FamilyCase::triangle());
        assert!(matches!(case_from_ab(0.0, 0.9), Err(FamilyError::OutOfFamily(..))));
        let hyp = case_from_ab(0.75, 0.25 * 2.5f64.sqrt()).unwrap();
        assert_eq!(hyp.kind(), FamilyKind::HyperbolicSegment);
    }

    #[test]
    fn hamiltonian_values() {
        assert_eq!(FamilyCase::triangle().hamiltonian_exact(&int(1), &int(0)), rat(1, 6));
        assert_eq!(FamilyCase::parabolic().hamiltonian_exact(&int(2), &int(0)), int(-2));
        let e = FamilyCase::elliptic(int(1)).unwrap();
        assert_eq!(e.hamiltonian_exact(&int(1), &int(0)), int(-2));
        assert!((FamilyCase::triangle().hamiltonian(1.0f64, 0.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_critical_points() {
        let pts = FamilyCase::triangle().critical_points();
        assert_eq!(pts.len(), 4);
        let centers: Vec<_> = pts.iter().filter(|p| p.kind == CriticalKind::Center).collect();
        assert_eq!(centers.len(), 1);
        assert_eq!((centers[0].x, centers[0].y), (0.0, 0.0));
        for s in pts.iter().filter(|p| p.kind == CriticalKind::Saddle) {
            assert_eq!(s.energy_exact, rat(1, 6));
        }
        assert!(pts.iter().any(|p| p.x == -0.5 && (p.y - 0.75f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn parabolic_critical_points() {
        let pts = FamilyCase::parabolic().critical_points();
        assert_eq!(pts.len(), 3);
        let c = pts.iter().find(|p| p.kind == CriticalKind::Center).unwrap();
        assert_eq!((c.x, c.energy), (2.0, -2.0));
        let saddles: Vec<_> = pts.iter().filter(|p| p.kind == CriticalKind::Saddle).collect();
        assert_eq!(saddles.len(), 2);
        assert!(saddles.iter().all(|s| s.x == 0.0 && (s.y.abs() - 2f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn elliptic_unit_lambda() {
        let e = FamilyCase::elliptic(int(1)).unwrap();
        let pts = e.critical_points();
        assert_eq!(pts.len(), 4);
        let centers: Vec<_> = pts.iter().filter(|p| p.kind == CriticalKind::Center).collect();
        assert_eq!(centers.len(), 2);
        assert!(centers.iter().any(|p| p.x == 1.0 && p.energy_exact == int(-2)));
        assert!(centers.iter().any(|p| p.x == -1.0 && p.energy_exact == int(2)));
        assert!(pts.iter().filter(|p| p.kind == CriticalKind::Saddle).all(|p| p.energy_exact.is_zero()
            && (p.y.abs() - 3f64.sqrt()).abs() < 1e-15));
        let an = e.annuli();
        assert_eq!((an[0].lower.clone(), an[0].upper.clone()), (int(-2), int(0)));
        assert_eq!((an[1].lower.clone(), an[1].upper.clone()), (int(0), int(2)));
    }

    #[test]
    fn hyperbolic_saddles_use_positive_radicand() {
        let h = FamilyCase::hyperbolic(rat(-1, 2)).unwrap();
        let pts = h.critical_points();
        let off: Vec<_> = pts.iter().filter(|p| p.y != 0.0).collect();
        assert_eq!(off.len(), 2);
        assert!((off[0].y.abs() - (3.0f64 * 2.5).sqrt()).abs() < 1e-14);
        let far = pts.iter().find(|p| p.x == 5.0).unwrap();
        assert_eq!(far.kind, CriticalKind::Saddle);
        assert_eq!(far.energy_exact, rat(25, 2));
    }

    #[test]
    fn lambda_ranges_are_enforced() {
        assert!(FamilyCase::elliptic(int(2)).is_err());
        assert!(FamilyCase::hyperbolic(int(-1)).is_err());
        assert!(FamilyCase::segment(rat(-1, 3)).is_ok());
    }
}
