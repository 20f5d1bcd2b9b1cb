//! Piecewise polynomial perturbations `p^±, q^±` and their Melnikov weights `ρ_{i,j}`.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{int, parse_rational, rat, rational_from_f64};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerturbationError {
    #[error("monomial x^{i} y^{j} exceeds degree {n}")]
    DegreeExceeded { i: usize, j: usize, n: usize },
    #[error("cannot parse coefficient {0:?}")]
    BadCoefficient(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    P,
    Q,
}

/// `p^±(x,y) = Σ a^±_{ij} x^i y^j`, `q^±(x,y) = Σ b^±_{ij} x^i y^j` with `i + j ≤ n`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PerturbationSpec {
    pub n: usize,
    pub plus_p: BTreeMap<(usize, usize), Rational>,
    pub plus_q: BTreeMap<(usize, usize), Rational>,
    pub minus_p: BTreeMap<(usize, usize), Rational>,
    pub minus_q: BTreeMap<(usize, usize), Rational>,
}

impl PerturbationSpec {
    pub fn zero(n: usize) -> Self {
        PerturbationSpec { n, ..Default::default() }
    }

    fn map_mut(&mut self, side: Side, comp: Component) -> &mut BTreeMap<(usize, usize), Rational> {
        match (side, comp) {
            (Side::Plus, Component::P) => &mut self.plus_p,
            (Side::Plus, Component::Q) => &mut self.plus_q,
            (Side::Minus, Component::P) => &mut self.minus_p,
            (Side::Minus, Component::Q) => &mut self.minus_q,
        }
    }

    pub fn map(&self, side: Side, comp: Component) -> &BTreeMap<(usize, usize), Rational> {
        match (side, comp) {
            (Side::Plus, Component::P) => &self.plus_p,
            (Side::Plus, Component::Q) => &self.plus_q,
            (Side::Minus, Component::P) => &self.minus_p,
            (Side::Minus, Component::Q) => &self.minus_q,
        }
    }

    /// Sets one coefficient; zero values are removed.
    pub fn set(&mut self, side: Side, comp: Component, i: usize, j: usize, c: Rational) -> Result<(), PerturbationError> {
        if i + j > self.n {
            return Err(PerturbationError::DegreeExceeded { i, j, n: self.n });
        }
        let map = self.map_mut(side, comp);
        if c.is_zero() {
            map.remove(&(i, j));
        } else {
            map.insert((i, j), c);
        }
        Ok(())
    }

    pub fn with(mut self, side: Side, comp: Component, i: usize, j: usize, c: Rational) -> Self {
        self.set(side, comp, i, j, c).expect("monomial within degree");
        self
    }

    pub fn validate(&self) -> Result<(), PerturbationError> {
        for side in [Side::Plus, Side::Minus] {
            for comp in [Component::P, Component::Q] {
                if let Some(&(i, j)) = self.map(side, comp).keys().find(|(i, j)| i + j > self.n) {
                    return Err(PerturbationError::DegreeExceeded { i, j, n: self.n });
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        [&self.plus_p, &self.plus_q, &self.minus_p, &self.minus_q].iter().all(|m| m.is_empty())
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let sc = |m: &BTreeMap<(usize, usize), Rational>| {
            m.iter().map(|(k, v)| (*k, v * c)).filter(|(_, v)| !v.is_zero()).collect()
        };
        PerturbationSpec {
            n: self.n,
            plus_p: sc(&self.plus_p),
            plus_q: sc(&self.plus_q),
            minus_p: sc(&self.minus_p),
            minus_q: sc(&self.minus_q),
        }
    }

    pub fn sum(&self, other: &Self) -> Self {
        let add = |a: &BTreeMap<(usize, usize), Rational>, b: &BTreeMap<(usize, usize), Rational>| {
            let mut out = a.clone();
            for (k, v) in b {
                *out.entry(*k).or_insert_with(Rational::zero) += v;
            }
            out.retain(|_, v| !v.is_zero());
            out
        };
        PerturbationSpec {
            n: self.n.max(other.n),
            plus_p: add(&self.plus_p, &other.plus_p),
            plus_q: add(&self.plus_q, &other.plus_q),
            minus_p: add(&self.minus_p, &other.minus_p),
            minus_q: add(&self.minus_q, &other.minus_q),
        }
    }

    /// Weights with `M(h) = Σ ρ_{ij} J_{ij}(h)`.
    ///
    /// The upper arc runs from `A` to `B`, the lower one back from `B` to `A`.
    /// `dy` terms become `dx` terms via `∫ x^i y^j dy = −i/(j+1) ∫ x^{i−1} y^{j+1} dx`
    /// and the lower arc folds as `∫_{L⁻} x^i y^j dx = (−1)^{j+1} J_{ij}`.
    pub fn rho(&self) -> BTreeMap<(usize, usize), Rational> {
        let mut rho: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        let mut add = |k: (usize, usize), v: Rational| {
            *rho.entry(k).or_insert_with(Rational::zero) += v;
        };
        let sign = |e: usize| if e.is_multiple_of(2) { int(1) } else { int(-1) };
        for (&(i, j), b) in &self.plus_q {
            add((i, j), b.clone());
        }
        for (&(i, j), b) in &self.minus_q {
            add((i, j), sign(j + 1) * b);
        }
        for (&(i, j), a) in &self.plus_p {
            if i > 0 {
                add((i - 1, j + 1), a * rat(i as i64, j as i64 + 1));
            }
        }
        for (&(i, j), a) in &self.minus_p {
            if i > 0 {
                add((i - 1, j + 1), sign(j) * a * rat(i as i64, j as i64 + 1));
            }
        }
        rho.retain(|_, v| !v.is_zero());
        rho
    }

    /// Random perturbation with small rational coefficients on every monomial.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut spec = Self::zero(n);
        for side in [Side::Plus, Side::Minus] {
            for comp in [Component::P, Component::Q] {
                for d in 0..=n {
                    for i in 0..=d {
                        let num = rng.gen_range(-9i64..=9);
                        let den = rng.gen_range(1i64..=4);
                        spec.set(side, comp, i, d - i, rat(num, den)).expect("in range");
                    }
                }
            }
        }
        spec
    }

    pub fn to_file(&self) -> PerturbationFile {
        let terms = |m: &BTreeMap<(usize, usize), Rational>| {
            m.iter().map(|(&(i, j), v)| (i, j, Coefficient::Text(v.to_string()))).collect()
        };
        PerturbationFile {
            n: self.n,
            plus: SideTerms { p: terms(&self.plus_p), q: terms(&self.plus_q) },
            minus: SideTerms { p: terms(&self.minus_p), q: terms(&self.minus_q) },
        }
    }

    pub fn from_file(file: &PerturbationFile) -> Result<Self, PerturbationError> {
        let mut spec = Self::zero(file.n);
        for (side, terms) in [(Side::Plus, &file.plus), (Side::Minus, &file.minus)] {
            for (comp, list) in [(Component::P, &terms.p), (Component::Q, &terms.q)] {
                for (i, j, c) in list {
                    let v = c.to_rational()?;
                    let map = spec.map_mut(side, comp);
                    let slot = map.entry((*i, *j)).or_insert_with(Rational::zero);
                    *slot += v;
                    if slot.is_zero() {
                        map.remove(&(*i, *j));
                    }
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Largest absolute coefficient, for scale estimates.
    pub fn max_abs(&self) -> Rational {
        [&self.plus_p, &self.plus_q, &self.minus_p, &self.minus_q]
            .iter()
            .flat_map(|m| m.values())
            .map(|v| v.abs())
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// On-disk form: `{"n": 3, "plus": {"p": [[i, j, "c"]], "q": [...]}, "minus": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationFile {
    pub n: usize,
    #[serde(default)]
    pub plus: SideTerms,
    #[serde(default)]
    pub minus: SideTerms,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SideTerms {
    #[serde(default)]
    pub p: Vec<(usize, usize, Coefficient)>,
    #[serde(default)]
    pub q: Vec<(usize, usize, Coefficient)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Integer(i64),
    Float(f64),
    Text(String),
}

impl Coefficient {
    pub fn to_rational(&self) -> Result<Rational, PerturbationError> {
        match self {
            Coefficient::Integer(k) => Ok(int(*k)),
            Coefficient::Float(x) => {
                // Go through the shortest decimal so 0.1 means 1/10.
                parse_rational(&x.to_string())
                    .or_else(|| rational_from_f64(*x))
                    .ok_or_else(|| PerturbationError::BadCoefficient(x.to_string()))
            }
            Coefficient::Text(s) => parse_rational(s).ok_or_else(|| PerturbationError::BadCoefficient(s.clone())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_q_on_both_sides_cancels() {
        let s = PerturbationSpec::zero(2)
            .with(Side::Plus, Component::Q, 0, 0, int(3))
            .with(Side::Minus, Component::Q, 0, 0, int(3));
        assert!(s.rho().is_empty());
        let s = PerturbationSpec::zero(2).with(Side::Plus, Component::Q, 0, 0, int(1));
        assert_eq!(s.rho().into_iter().collect::<Vec<_>>(), vec![((0, 0), int(1))]);
    }

    #[test]
    fn dy_terms_shift_indices() {
        // −∫ x² dy over the upper arc equals 2 J_{1,1}.
        let s = PerturbationSpec::zero(2).with(Side::Plus, Component::P, 2, 0, int(1));
        assert_eq!(s.rho().get(&(1, 1)), Some(&int(2)));
        // Lower arc: −∫_{L⁻} x² dy = (−1)^0 · 2 J_{1,1}.
        let s = PerturbationSpec::zero(2).with(Side::Minus, Component::P, 2, 0, int(1));
        assert_eq!(s.rho().get(&(1, 1)), Some(&int(2)));
        // Pure y-terms of p are exact differentials.
        let s = PerturbationSpec::zero(2).with(Side::Plus, Component::P, 0, 2, int(5));
        assert!(s.rho().is_empty());
    }

    #[test]
    fn degree_is_enforced() {
        let mut s = PerturbationSpec::zero(2);
        assert!(s.set(Side::Plus, Component::Q, 2, 1, int(1)).is_err());
    }

    #[test]
    fn file_round_trip() {
        let mut rng = rand::thread_rng();
        let s = PerturbationSpec::random(3, &mut rng);
        assert_eq!(PerturbationSpec::from_file(&s.to_file()).unwrap(), s);
        let f = PerturbationFile {
            n: 1,
            plus: SideTerms { p: vec![], q: vec![(0, 0, Coefficient::Float(0.1)), (1, 0, Coefficient::Integer(2))] },
            minus: SideTerms::default(),
        };
        let s = PerturbationSpec::from_file(&f).unwrap();
        assert_eq!(s.plus_q.get(&(0, 0)), Some(&rat(1, 10)));
    }
}
