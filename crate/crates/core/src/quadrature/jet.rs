//! Truncated Taylor series in one variable.
//!
//! `Jet<T, N>` stores the first `N` Taylor coefficients of a function of `h`
//! around a base point. Arithmetic propagates them exactly (up to rounding),
//! which yields `J`, `J'`, `J''`, ... from a single quadrature pass.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T, const N: usize>(pub [T; N]);

impl<T: Real, const N: usize> Jet<T, N> {
    pub fn constant(c: T) -> Self {
        let mut a = [T::zero(); N];
        a[0] = c;
        Jet(a)
    }

    /// The independent variable `h0 + ε`.
    pub fn variable(h0: T) -> Self {
        let mut a = [T::zero(); N];
        a[0] = h0;
        if N > 1 {
            a[1] = T::one();
        }
        Jet(a)
    }

    pub fn value(&self) -> T {
        self.0[0]
    }

    /// `k`-th derivative at the base point.
    pub fn derivative(&self, k: usize) -> T {
        let fact: T = (1..=k).fold(T::one(), |acc, m| acc * T::of_usize(m));
        self.0[k] * fact
    }

    pub fn derivatives(&self) -> [T; N] {
        let mut out = [T::zero(); N];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.derivative(k);
        }
        out
    }

    pub fn scale(mut self, c: T) -> Self {
        for a in self.0.iter_mut() {
            *a *= c;
        }
        self
    }

    pub fn add_const(mut self, c: T) -> Self {
        self.0[0] += c;
        self
    }

    pub fn recip(self) -> Self {
        Self::constant(T::one()) / self
    }

    pub fn sqrt(self) -> Self {
        let mut s = [T::zero(); N];
        s[0] = self.0[0].sqrt();
        let two_s0 = s[0] + s[0];
        for k in 1..N {
            let mut acc = self.0[k];
            for i in 1..k {
                acc -= s[i] * s[k - i];
            }
            s[k] = acc / two_s0;
        }
        Jet(s)
    }

    pub fn powi(self, e: i32) -> Self {
        let base = if e < 0 { self.recip() } else { self };
        let mut out = Self::constant(T::one());
        for _ in 0..e.unsigned_abs() {
            out = out * base;
        }
        out
    }

    /// Fixed-slope Newton solve of `p(x) = h` around a known root `x0`.
    ///
    /// `p` is given by ascending coefficients; `h` is a jet whose value equals
    /// `p(x0)` up to rounding.
    pub fn poly_root(coeffs: &[T], x0: T, h: Self) -> Self {
        let slope: T = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(T::zero(), |acc, (k, c)| acc * x0 + *c * T::of_usize(k));
        let mut x = Self::constant(x0);
        for _ in 0..=N {
            let px = coeffs.iter().rev().fold(Self::constant(T::zero()), |acc, c| (acc * x).add_const(*c));
            let mut step = (px - h).scale(T::one() / slope);
            step.0[0] = T::zero();
            x = x - step;
        }
        x
    }
}

impl<T: Real, const N: usize> Add for Jet<T, N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

impl<T: Real, const N: usize> Sub for Jet<T, N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        self
    }
}

impl<T: Real, const N: usize> Neg for Jet<T, N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real, const N: usize> Mul for Jet<T, N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut c = [T::zero(); N];
        for (k, ck) in c.iter_mut().enumerate() {
            for i in 0..=k {
                *ck += self.0[i] * rhs.0[k - i];
            }
        }
        Jet(c)
    }
}

impl<T: Real, const N: usize> Div for Jet<T, N> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let mut q = [T::zero(); N];
        for k in 0..N {
            let mut acc = self.0[k];
            for i in 0..k {
                acc -= q[i] * rhs.0[k - i];
            }
            q[k] = acc / rhs.0[0];
        }
        Jet(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type J4 = Jet<f64, 4>;

    #[test]
    fn sqrt_and_division_match_calculus() {
        let h = J4::variable(2.0);
        let s = h.sqrt();
        assert!((s.derivative(1) - 0.5 / 2f64.sqrt()).abs() < 1e-15);
        assert!((s.derivative(2) + 0.25 * 2f64.powf(-1.5)).abs() < 1e-15);
        let r = h.recip();
        assert!((r.derivative(3) + 6.0 / 16.0).abs() < 1e-15);
        assert!((h.powi(-2).derivative(1) + 2.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn implicit_root_of_quadratic() {
        // x²/2 − 2x = h around x0 = 2 + √(4 + 2h0); x(h) = 2 + √(4+2h).
        let h0 = -1.0;
        let x0 = 2.0 + 2f64.sqrt();
        let x = J4::poly_root(&[0.0, -2.0, 0.5], x0, J4::variable(h0));
        let exact = J4::variable(h0).scale(2.0).add_const(4.0).sqrt().add_const(2.0);
        for k in 0..4 {
            assert!((x.0[k] - exact.0[k]).abs() < 1e-13, "{k}");
        }
    }
}
