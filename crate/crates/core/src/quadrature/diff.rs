//! Richardson-extrapolated central differences.

use crate::scalar::Real;

/// First derivative from central differences at steps `s` and `s/2`.
pub fn richardson_first<T: Real, E>(f: impl Fn(T) -> Result<T, E>, h: T, s: T) -> Result<T, E> {
    let d = |s: T| -> Result<T, E> { Ok((f(h + s)? - f(h - s)?) / (s + s)) };
    let coarse = d(s)?;
    let fine = d(s * T::of(0.5))?;
    Ok((T::of(4.0) * fine - coarse) / T::of(3.0))
}

/// Second derivative from central differences at steps `s` and `s/2`.
pub fn richardson_second<T: Real, E>(f: impl Fn(T) -> Result<T, E>, h: T, s: T) -> Result<T, E> {
    let f0 = f(h)?;
    let d = |s: T| -> Result<T, E> { Ok((f(h + s)? - f0 - f0 + f(h - s)?) / (s * s)) };
    let coarse = d(s)?;
    let fine = d(s * T::of(0.5))?;
    Ok((T::of(4.0) * fine - coarse) / T::of(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_derivatives() {
        let f = |x: f64| -> Result<f64, ()> { Ok(x.exp()) };
        let d1 = richardson_first(f, 0.3, 1e-2).unwrap();
        let d2 = richardson_second(f, 0.3, 1e-2).unwrap();
        assert!((d1 - 0.3f64.exp()).abs() < 1e-9);
        assert!((d2 - 0.3f64.exp()).abs() < 1e-7);
    }
}
