use num_traits::{Signed, Zero};
use thiserror::Error;

use super::poly::Poly;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SturmError {
    #[error("Sturm count of the zero polynomial")]
    ZeroPolynomial,
    #[error("empty interval")]
    EmptyInterval,
}

/// Sturm sequence `p, p', -rem(p, p'), ...`.
pub fn sturm_sequence<T: Scalar>(p: &Poly<T>) -> Vec<Poly<T>> {
    let mut seq = vec![p.clone(), p.derivative()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            break;
        }
        let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        seq.push(-r);
    }
    seq
}

fn sign_changes<T: Scalar + Signed>(seq: &[Poly<T>], x: &T) -> usize {
    let mut count = 0;
    let mut last = 0i8;
    for q in seq {
        let v = q.eval(x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Number of distinct real roots of `p` in the open interval `(lo, hi)`.
///
/// Exact for rational coefficients. The count runs on the squarefree part, so
/// a root sitting on `lo` contributes nothing and one on `hi` is subtracted
/// from the half-open count `(lo, hi]`.
pub fn sturm_count<T: Scalar + Signed + PartialOrd>(
    p: &Poly<T>,
    lo: &T,
    hi: &T,
) -> Result<usize, SturmError> {
    if p.is_zero() {
        return Err(SturmError::ZeroPolynomial);
    }
    if lo >= hi {
        return Err(SturmError::EmptyInterval);
    }
    let g = p.gcd(&p.derivative());
    let squarefree = p.div_exact(&g).expect("gcd divides p");
    let seq = sturm_sequence(&squarefree);
    let half_open = sign_changes(&seq, lo) - sign_changes(&seq, hi);
    let at_hi = usize::from(p.eval(hi).is_zero());
    Ok(half_open - at_hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use crate::PolyQ;

    fn p(c: &[i64]) -> PolyQ {
        Poly::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn endpoints_are_excluded() {
        let q = p(&[0, 2, 1]);
        assert_eq!(sturm_count(&q, &int(-2), &int(0)), Ok(0));
        assert_eq!(sturm_count(&q, &rat(-5, 2), &rat(1, 2)), Ok(2));
    }

    #[test]
    fn double_root_counts_once() {
        let q = p(&[-1, 6]).pow(2);
        assert_eq!(sturm_count(&q, &int(0), &rat(1, 6)), Ok(0));
        assert_eq!(sturm_count(&q, &int(0), &rat(1, 5)), Ok(1));
    }

    #[test]
    fn irrational_root() {
        assert_eq!(sturm_count(&p(&[-2, 0, 1]), &int(0), &int(2)), Ok(1));
    }

    #[test]
    fn zero_polynomial_is_an_error() {
        assert_eq!(sturm_count(&PolyQ::zero(), &int(0), &int(1)), Err(SturmError::ZeroPolynomial));
    }
}
