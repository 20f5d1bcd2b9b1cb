//! Level ovals: x-axis endpoints, the upper branch `y(x, h)` and `dx/dh` on the axis.

use num_traits::Zero;
use thiserror::Error;

use crate::family::{AnnulusId, EnergyInterval, FamilyCase, FamilyError};
use crate::scalar::Real;
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OvalError {
    #[error("h = {h} is outside the annulus ({lo}, {hi})")]
    OutsideAnnulus { h: f64, lo: f64, hi: f64 },
    #[error("x = {x} is outside the arc [{x_a}, {x_b}]")]
    OutsideArc { x: f64, x_a: f64, x_b: f64 },
    #[error("negative radicand {0} in y(x, h)")]
    NegativeRadicand(f64),
    #[error("x = {0} is a critical abscissa of H(x, 0)")]
    CriticalAbscissa(f64),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OvalEndpoints<T> {
    pub x_a: T,
    pub x_b: T,
    pub h: T,
    pub annulus: AnnulusId,
}

impl<T: Real> OvalEndpoints<T> {
    pub fn width(&self) -> T {
        self.x_b - self.x_a
    }
}

/// Floating-point view of one family/annulus pair.
#[derive(Clone, Debug)]
pub struct Curve<T> {
    /// Ascending coefficients of `A`, padded to length 4.
    a: [T; 4],
    /// Ascending coefficients of `C`.
    c: [T; 2],
    degree: usize,
    center_x: T,
    left_stop: Option<T>,
    right_stop: Option<T>,
    interval: EnergyInterval,
    lo: T,
    hi: T,
    /// `+1` when `h` grows from the center energy toward the polycycle.
    growth: T,
}

impl<T: Real> Curve<T> {
    pub fn new(case: &FamilyCase, annulus: AnnulusId) -> Result<Self, OvalError> {
        let interval = case.annulus(annulus)?;
        let ap = case.a_poly();
        let cp = case.c_poly();
        let mut a = [T::zero(); 4];
        for (k, c) in ap.coeffs().iter().enumerate() {
            a[k] = T::of_rational(c);
        }
        let c = [T::of_rational(&cp.coeff(0)), T::of_rational(&cp.coeff(1))];
        let center = interval.center_x.clone();
        let mut seps: Vec<Rational> = case.axis_critical_abscissas();
        seps.push(-cp.coeff(0) / cp.coeff(1));
        let left_stop = seps.iter().filter(|s| **s < center).max().map(T::of_rational);
        let right_stop = seps.iter().filter(|s| **s > center).min().map(T::of_rational);
        let growth = if interval.lower == interval.center_energy { T::one() } else { -T::one() };
        debug_assert!(!(&interval.upper - &interval.lower).is_zero());
        Ok(Curve {
            a,
            c,
            degree: ap.degree() as usize,
            center_x: T::of_rational(&center),
            left_stop,
            right_stop,
            lo: interval.lo(),
            hi: interval.hi(),
            interval,
            growth,
        })
    }

    pub fn interval(&self) -> &EnergyInterval {
        &self.interval
    }

    pub fn annulus(&self) -> AnnulusId {
        self.interval.id
    }

    pub fn center_x(&self) -> T {
        self.center_x
    }

    pub fn center_energy(&self) -> T {
        if self.growth > T::zero() {
            self.lo
        } else {
            self.hi
        }
    }

    pub fn bounds(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn a_coeffs(&self) -> &[T; 4] {
        &self.a
    }

    pub fn c_coeffs(&self) -> &[T; 2] {
        &self.c
    }

    pub fn cubic(&self) -> bool {
        self.degree == 3
    }

    pub fn a(&self, x: T) -> T {
        ((self.a[3] * x + self.a[2]) * x + self.a[1]) * x + self.a[0]
    }

    pub fn da(&self, x: T) -> T {
        (T::of(3.0) * self.a[3] * x + T::of(2.0) * self.a[2]) * x + self.a[1]
    }

    pub fn d2a(&self, x: T) -> T {
        T::of(6.0) * self.a[3] * x + T::of(2.0) * self.a[2]
    }

    pub fn c(&self, x: T) -> T {
        self.c[1] * x + self.c[0]
    }

    pub fn hamiltonian(&self, x: T, y: T) -> T {
        self.a(x) + self.c(x) * y * y
    }

    fn check_h(&self, h: T) -> Result<(), OvalError> {
        let center = self.center_energy();
        let inside = h > self.lo && h < self.hi;
        if inside || h == center {
            Ok(())
        } else {
            Err(OvalError::OutsideAnnulus { h: h.to_f64(), lo: self.lo.to_f64(), hi: self.hi.to_f64() })
        }
    }

    /// Roots of `A(x) = h` bounding the oval. At the center energy both equal
    /// the center abscissa.
    pub fn endpoints(&self, h: T) -> Result<OvalEndpoints<T>, OvalError> {
        self.check_h(h)?;
        let annulus = self.annulus();
        if h == self.center_energy() {
            return Ok(OvalEndpoints { x_a: self.center_x, x_b: self.center_x, h, annulus });
        }
        if self.degree == 2 {
            // a2 x² + a1 x + a0 − h with the two roots around the center.
            let disc = self.a[1] * self.a[1] - T::of(4.0) * self.a[2] * (self.a[0] - h);
            let s = disc.max(T::zero()).sqrt();
            let half = T::of(0.5) * s / self.a[2].abs();
            return Ok(OvalEndpoints { x_a: self.center_x - half, x_b: self.center_x + half, h, annulus });
        }
        let x_a = self.root_beside(h, -T::one(), self.left_stop);
        let x_b = self.root_beside(h, T::one(), self.right_stop);
        Ok(OvalEndpoints { x_a, x_b, h, annulus })
    }

    fn root_beside(&self, h: T, dir: T, stop: Option<T>) -> T {
        let f = |x: T| self.a(x) - h;
        let x0 = self.center_x;
        let s0 = f(x0).signum();
        let far = match stop {
            Some(s) => s,
            None => {
                let mut step = T::one();
                let mut x1 = x0 + dir * step;
                while f(x1).signum() == s0 {
                    step *= T::of(2.0);
                    x1 = x0 + dir * step;
                }
                x1
            }
        };
        let (mut lo, mut hi) = if far < x0 { (far, x0) } else { (x0, far) };
        let f_lo_sign = f(lo).signum();
        // Newton from the far end, kept inside the bracket by bisection.
        let mut x = T::of(0.5) * (lo + hi);
        for _ in 0..200 {
            let fx = f(x);
            if fx == T::zero() {
                return x;
            }
            if fx.signum() == f_lo_sign {
                lo = x;
            } else {
                hi = x;
            }
            let d = self.da(x);
            let newton = x - fx / d;
            let next = if d != T::zero() && newton > lo && newton < hi { newton } else { T::of(0.5) * (lo + hi) };
            let tol = T::of(1e-14).max(T::eps() * T::of(4.0)) * (T::one() + x.abs());
            if (next - x).abs() <= tol || hi - lo <= tol {
                return next;
            }
            x = next;
        }
        x
    }

    /// `y²` from the level relation, without any clamping.
    pub fn y_squared(&self, h: T, x: T) -> T {
        (h - self.a(x)) / self.c(x)
    }

    pub fn upper_y(&self, h: T, x: T) -> Result<T, OvalError> {
        let ends = self.endpoints(h)?;
        let slack = T::of(1e-12) * (T::one() + ends.width().abs());
        if x < ends.x_a - slack || x > ends.x_b + slack {
            return Err(OvalError::OutsideArc { x: x.to_f64(), x_a: ends.x_a.to_f64(), x_b: ends.x_b.to_f64() });
        }
        if x <= ends.x_a || x >= ends.x_b {
            return Ok(T::zero());
        }
        let y2 = self.y_squared(h, x);
        if y2 < T::zero() {
            if y2 < -T::of(1e-14) {
                return Err(OvalError::NegativeRadicand(y2.to_f64()));
            }
            return Ok(T::zero());
        }
        Ok(y2.sqrt())
    }

    /// `1/H_x(x, 0)`.
    pub fn dx_dh_on_axis(&self, x: T) -> Result<T, OvalError> {
        let d = self.da(x);
        if d.abs() < T::of(1e-13) {
            return Err(OvalError::CriticalAbscissa(x.to_f64()));
        }
        Ok(T::one() / d)
    }

    /// Third root of `A(x) = h` for cubic `A`, from Vieta.
    pub fn third_root(&self, ends: &OvalEndpoints<T>) -> Option<T> {
        (self.degree == 3).then(|| -self.a[2] / self.a[3] - ends.x_a - ends.x_b)
    }
}

pub fn endpoints<T: Real>(case: &FamilyCase, annulus: AnnulusId, h: T) -> Result<OvalEndpoints<T>, OvalError> {
    Curve::new(case, annulus)?.endpoints(h)
}

pub fn upper_y<T: Real>(case: &FamilyCase, annulus: AnnulusId, h: T, x: T) -> Result<T, OvalError> {
    Curve::new(case, annulus)?.upper_y(h, x)
}

pub fn dx_dh_on_axis<T: Real>(case: &FamilyCase, x: T) -> Result<T, OvalError> {
    Curve::new(case, case.primary_annulus().id)?.dx_dh_on_axis(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn parabolic_closed_form() {
        let c = Curve::<f64>::new(&FamilyCase::parabolic(), AnnulusId::Sole).unwrap();
        for h in [-1.9, -1.0, -0.3] {
            let e = c.endpoints(h).unwrap();
            let s = (4.0 + 2.0 * h).sqrt();
            assert!(close(e.x_a, 2.0 - s, 1e-15) && close(e.x_b, 2.0 + s, 1e-15));
        }
        let e = c.endpoints(-2.0).unwrap();
        assert_eq!((e.x_a, e.x_b), (2.0, 2.0));
        let e = c.endpoints(-1e-12).unwrap();
        assert!(e.x_a.abs() < 1e-11 && (e.x_b - 4.0).abs() < 1e-11);
        assert!(matches!(c.endpoints(0.0), Err(OvalError::OutsideAnnulus { .. })));
    }

    #[test]
    fn triangle_near_polycycle() {
        let c = Curve::<f64>::new(&FamilyCase::triangle(), AnnulusId::Sole).unwrap();
        let e = c.endpoints(1.0 / 6.0 - 1e-10).unwrap();
        assert!((e.x_a + 0.5).abs() < 1e-9);
        assert!((e.x_b - 1.0).abs() < 1e-4);
    }

    #[test]
    fn endpoints_lie_on_the_level() {
        let cases = [
            (FamilyCase::elliptic(int(1)).unwrap(), AnnulusId::Right, -1.0),
            (FamilyCase::elliptic(int(1)).unwrap(), AnnulusId::Left, 1.0),
            (FamilyCase::elliptic(rat(1, 2)).unwrap(), AnnulusId::Right, -1.3),
            (FamilyCase::hyperbolic(rat(-1, 2)).unwrap(), AnnulusId::Sole, -2.0),
            (FamilyCase::triangle(), AnnulusId::Sole, 0.1),
        ];
        for (case, id, h) in cases {
            let c = Curve::<f64>::new(&case, id).unwrap();
            let e = c.endpoints(h).unwrap();
            assert!(e.x_a < c.center_x() && c.center_x() < e.x_b);
            assert!((c.a(e.x_a) - h).abs() < 1e-12 && (c.a(e.x_b) - h).abs() < 1e-12);
            let xm = 0.3 * e.x_a + 0.7 * e.x_b;
            let y = c.upper_y(h, xm).unwrap();
            assert!(y > 0.0 && (c.hamiltonian(xm, y) - h).abs() < 1e-12);
            assert_eq!(c.upper_y(h, e.x_a).unwrap(), 0.0);
        }
    }

    #[test]
    fn axis_derivative() {
        let e = FamilyCase::elliptic(int(1)).unwrap();
        assert!((dx_dh_on_axis(&e, 2.0f64).unwrap() - 1.0 / 9.0).abs() < 1e-15);
        let p = FamilyCase::parabolic();
        assert!((dx_dh_on_axis(&p, 3.5f64).unwrap() - 1.0 / 1.5).abs() < 1e-15);
        assert!(matches!(dx_dh_on_axis(&FamilyCase::triangle(), 1.0f64), Err(OvalError::CriticalAbscissa(_))));
    }

    #[test]
    fn single_precision_works() {
        let c = Curve::<f32>::new(&FamilyCase::parabolic(), AnnulusId::Sole).unwrap();
        let e = c.endpoints(-1.0f32).unwrap();
        assert!((e.x_b - (2.0 + 2f32.sqrt())).abs() < 1e-6);
    }
}
