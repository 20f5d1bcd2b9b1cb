use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::poly::Poly;
use crate::scalar::Scalar;

/// Rational function `num/den` kept in lowest terms with a monic denominator.
#[derive(Clone, PartialEq)]
pub struct RatFun<T> {
    num: Poly<T>,
    den: Poly<T>,
}

impl<T: Scalar> RatFun<T> {
    pub fn new(num: Poly<T>, den: Poly<T>) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return RatFun { num, den: Poly::one() };
        }
        let g = num.gcd(&den);
        let num = num.div_exact(&g).expect("gcd divides numerator");
        let den = den.div_exact(&g).expect("gcd divides denominator");
        let lc = den.leading().unwrap().clone();
        let inv = T::one() / lc;
        RatFun { num: num.scale(&inv), den: den.scale(&inv) }
    }

    pub fn from_poly(p: Poly<T>) -> Self {
        RatFun { num: p, den: Poly::one() }
    }

    pub fn num(&self) -> &Poly<T> {
        &self.num
    }

    pub fn den(&self) -> &Poly<T> {
        &self.den
    }

    pub fn eval(&self, x: &T) -> T {
        self.num.eval(x) / self.den.eval(x)
    }

    pub fn derivative(&self) -> Self {
        let n = &(&self.num.derivative() * &self.den) - &(&self.num * &self.den.derivative());
        Self::new(n, &self.den * &self.den)
    }

    /// Polynomial view when the denominator is constant.
    pub fn as_poly(&self) -> Option<Poly<T>> {
        (self.den.degree() == 0).then(|| self.num.clone())
    }
}

impl<T: Scalar> Zero for RatFun<T> {
    fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl<T: Scalar> One for RatFun<T> {
    fn one() -> Self {
        Self::from_poly(Poly::one())
    }
}

impl<T: Scalar> Add for RatFun<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let n = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        Self::new(n, &self.den * &rhs.den)
    }
}

impl<T: Scalar> Sub for RatFun<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Scalar> Neg for RatFun<T> {
    type Output = Self;
    fn neg(self) -> Self {
        RatFun { num: -self.num, den: self.den }
    }
}

impl<T: Scalar> Mul for RatFun<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl<T: Scalar> Div for RatFun<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.is_zero(), "division by the zero rational function");
        Self::new(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for RatFun<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.degree() == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl<T: Scalar + fmt::Display> fmt::Debug for RatFun<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFun({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;
    use crate::{PolyQ, RatFunQ};

    fn p(c: &[i64]) -> PolyQ {
        Poly::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn reduces_common_factors() {
        let r = RatFunQ::new(p(&[-1, 0, 1]), p(&[2, 2]));
        assert_eq!(r.num(), &p(&[-1, 1]).scale(&crate::scalar::rat(1, 2)));
        assert_eq!(r.den(), &p(&[1]));
        let r = RatFunQ::new(p(&[1, 1]), p(&[-2, 0, 2]));
        assert_eq!(r.den(), &p(&[-1, 1]));
        assert_eq!(r.num(), &p(&[1]).scale(&crate::scalar::rat(1, 2)));
    }

    #[test]
    fn quotient_rule() {
        let r = RatFunQ::new(p(&[1]), p(&[0, 1]));
        let d = r.derivative();
        assert_eq!(d, RatFunQ::new(p(&[-1]), p(&[0, 0, 1])));
    }

    #[test]
    fn field_round_trip() {
        let a = RatFunQ::new(p(&[1, 2]), p(&[3, 0, 1]));
        let b = RatFunQ::new(p(&[0, 5]), p(&[1, 1]));
        assert_eq!((a.clone() * b.clone()) / b.clone(), a);
        assert_eq!((a.clone() + b.clone()) - b, a);
    }
}
