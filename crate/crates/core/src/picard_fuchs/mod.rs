//! Picard-Fuchs systems `U = (B h + C) U'`, their determinants, the
//! second-derivative coefficient matrices and the Riccati equations of the
//! derivative ratios.
//!
//! Differentiating `U = P U'` gives `P U'' = (E − B) U'`, hence
//! `det(P) U'' = adj(P) (E − B) U'`. All named coefficient matrices are
//! produced from that identity in exact arithmetic.

mod derive;
mod tables;

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::family::{AnnulusId, FamilyCase, FamilyKind};
use crate::quadrature::{richardson_first, GeneratorVector, MonomialIndex, Quadrature, QuadratureError};
use crate::reduction::Residual;
use crate::scalar::{rat, Real};
use crate::{MatQ, PolyMatQ, PolyQ, RatFunQ, Rational};

pub use derive::{derive_pf_matrices, linear_matrix, split_linear};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PfError {
    #[error("no Picard-Fuchs matrices for the {0} annulus of this family")]
    UnsupportedAnnulus(AnnulusId),
    #[error("ratio denominator {0:e} is too small")]
    DenominatorTooSmall(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// An integral or one of its derivatives, as it appears in the relations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Quantity {
    /// `J_{i,j}^{(d)}`.
    J { i: usize, j: usize, d: usize },
    /// `Z^{(d)}` with `Z = (3/8)(1/λ − 1) J11 + (1/4) J21`.
    Z { d: usize },
}

impl Quantity {
    pub const fn j(i: usize, j: usize, d: usize) -> Self {
        Quantity::J { i, j, d }
    }

    pub fn order(&self) -> usize {
        match self {
            Quantity::J { d, .. } | Quantity::Z { d } => *d,
        }
    }

    pub fn differentiated(&self) -> Self {
        match *self {
            Quantity::J { i, j, d } => Quantity::J { i, j, d: d + 1 },
            Quantity::Z { d } => Quantity::Z { d: d + 1 },
        }
    }

    /// Value from generator vectors holding derivatives `0, 1, 2, ...`.
    pub fn eval<T: Real>(&self, jets: &[GeneratorVector<T>]) -> T {
        match *self {
            Quantity::J { i, j, d } => jets[d]
                .value(MonomialIndex::new(i, j))
                .expect("relations only use generators"),
            Quantity::Z { d } => jets[d].z.expect("Z exists for segment families"),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, d) = match self {
            Quantity::J { i, j, d } => (format!("J{i}{j}"), *d),
            Quantity::Z { d } => ("Z".to_string(), *d),
        };
        write!(f, "{name}{}", "'".repeat(d))
    }
}

/// `D · targets = entries · basis` with polynomial entries.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearRelation {
    pub name: &'static str,
    pub targets: Vec<Quantity>,
    pub basis: Vec<Quantity>,
    pub denominator: PolyQ,
    #[serde(skip)]
    pub entries: PolyMatQ,
}

impl LinearRelation {
    pub fn entry(&self, r: usize, c: usize) -> &PolyQ {
        &self.entries[(r, c)]
    }

    /// Max over rows of `|target − Σ entries·basis / D|`.
    pub fn residual<T: Real>(&self, jets: &[GeneratorVector<T>]) -> T {
        let h = jets[0].h;
        let ev = |p: &PolyQ| p.eval_with(h, |c| T::of_rational(c));
        let d = ev(&self.denominator);
        let basis: Vec<T> = self.basis.iter().map(|q| q.eval(jets)).collect();
        let mut worst = T::zero();
        for (r, t) in self.targets.iter().enumerate() {
            let rhs: T = basis.iter().enumerate().map(|(c, b)| ev(&self.entries[(r, c)]) * *b).sum();
            worst = worst.max((t.eval(jets) - rhs / d).abs());
        }
        worst
    }

    fn rows(&self, name: &'static str, rows: &[usize]) -> LinearRelation {
        let mut e = PolyMatQ::zeros(rows.len(), self.basis.len());
        for (k, &r) in rows.iter().enumerate() {
            for c in 0..self.basis.len() {
                e[(k, c)] = self.entries[(r, c)].clone();
            }
        }
        LinearRelation {
            name,
            targets: rows.iter().map(|&r| self.targets[r]).collect(),
            basis: self.basis.clone(),
            denominator: self.denominator.clone(),
            entries: e,
        }
    }

    fn columns(&self, name: &'static str, cols: &[usize]) -> LinearRelation {
        let mut e = PolyMatQ::zeros(self.targets.len(), cols.len());
        for r in 0..self.targets.len() {
            for (k, &c) in cols.iter().enumerate() {
                e[(r, k)] = self.entries[(r, c)].clone();
            }
        }
        LinearRelation {
            name,
            targets: self.targets.clone(),
            basis: cols.iter().map(|&c| self.basis[c]).collect(),
            denominator: self.denominator.clone(),
            entries: e,
        }
    }

    /// Whether `targets[k]` is the derivative of `basis[k]` for every row, so
    /// the relation closes into a differential module.
    pub fn is_module(&self) -> bool {
        self.targets.len() == self.basis.len()
            && self.targets.iter().zip(&self.basis).all(|(t, b)| *t == b.differentiated())
    }
}

/// `D ρ' = a2 ρ² + a1 ρ + a0` for `ρ = f2/f1` with `(f1, f2)` a 2x2 module.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Riccati {
    pub name: &'static str,
    pub numerator: Quantity,
    pub denominator_quantity: Quantity,
    pub d: PolyQ,
    pub a2: PolyQ,
    pub a1: PolyQ,
    pub a0: PolyQ,
}

impl Riccati {
    fn from_module(name: &'static str, m: &LinearRelation) -> Self {
        assert!(m.is_module() && m.basis.len() == 2, "Riccati needs a 2x2 module");
        Riccati {
            name,
            numerator: m.basis[1],
            denominator_quantity: m.basis[0],
            d: m.denominator.clone(),
            a2: -m.entry(0, 1).clone(),
            a1: m.entry(1, 1).clone() - m.entry(0, 0).clone(),
            a0: m.entry(1, 0).clone(),
        }
    }

    pub fn ratio<T: Real>(&self, jets: &[GeneratorVector<T>]) -> Result<T, PfError> {
        let den = self.denominator_quantity.eval(jets);
        let num = self.numerator.eval(jets);
        if den.abs() <= T::of(1e-12) * (den.abs() + num.abs()) {
            return Err(PfError::DenominatorTooSmall(den.to_f64()));
        }
        Ok(num / den)
    }

    /// Derivative orders needed to evaluate the ratio.
    pub fn order(&self) -> usize {
        self.numerator.order().max(self.denominator_quantity.order())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PFSystem {
    pub kind: FamilyKind,
    pub lambda: Option<String>,
    pub annulus: AnnulusId,
    #[serde(skip)]
    pub b1: MatQ,
    #[serde(skip)]
    pub c1: MatQ,
    #[serde(skip)]
    pub b2: MatQ,
    #[serde(skip)]
    pub c2: MatQ,
    pub d1: PolyQ,
    pub d2: PolyQ,
    /// Determinant of the reduced triangle system for `(J01', J21'')`.
    pub d3: Option<PolyQ>,
    /// `U_k' = adj(P_k) U_k / D_k`.
    pub first: [LinearRelation; 2],
    /// `U_k'' = adj(P_k)(E − B_k) U_k' / D_k`.
    pub second: [LinearRelation; 2],
    /// Named reduced second-derivative matrices (`g`, `k` or `e`, `l`).
    pub named: Vec<LinearRelation>,
    /// Module carrying `Φ1`.
    pub phi1: LinearRelation,
    /// Module carrying `Φ2`.
    pub phi2: LinearRelation,
    pub omega: Riccati,
    pub nu: Option<Riccati>,
}

fn const_poly_mat(m: &MatQ) -> PolyMatQ {
    m.map(|c| PolyQ::constant(c.clone()))
}

fn quantities(basis: &[MonomialIndex], d: usize) -> Vec<Quantity> {
    basis.iter().map(|m| Quantity::j(m.i, m.j, d)).collect()
}

fn to_poly(r: &RatFunQ) -> PolyQ {
    r.as_poly().expect("entry clears to a polynomial")
}

/// Exact Picard-Fuchs system for the family on the given annulus.
///
/// The elliptic left annulus shares the algebraic identities but is served
/// only through [`pf_system_any_annulus`].
pub fn pf_system(case: &FamilyCase, annulus: AnnulusId) -> Result<PFSystem, PfError> {
    if annulus == AnnulusId::Left {
        return Err(PfError::UnsupportedAnnulus(annulus));
    }
    pf_system_any_annulus(case, annulus)
}

pub fn pf_system_any_annulus(case: &FamilyCase, annulus: AnnulusId) -> Result<PFSystem, PfError> {
    if case.annulus(annulus).is_err() {
        return Err(PfError::UnsupportedAnnulus(annulus));
    }
    let kind = case.kind();
    let ((b1, c1), (b2, c2)) = match kind {
        FamilyKind::EllipticSegment | FamilyKind::HyperbolicSegment => {
            let l = case.lambda().expect("segment lambda");
            (tables::segment_first(l), tables::segment_second(l))
        }
        FamilyKind::ParabolicSegment => (tables::parabolic_first(), tables::parabolic_second()),
        FamilyKind::HamiltonianTriangle => (tables::triangle_first(), tables::triangle_second()),
    };
    let (g1, g2) = crate::quadrature::generator_basis(kind);
    let p1 = linear_matrix(&b1, &c1);
    let p2 = linear_matrix(&b2, &c2);
    let d1 = p1.det();
    let d2 = p2.det();
    let adj1 = p1.adjugate();
    let adj2 = p2.adjugate();
    let e_b1 = const_poly_mat(&MatQ::identity(g1.len()).sub_mat(&b1));
    let e_b2 = const_poly_mat(&MatQ::identity(g2.len()).sub_mat(&b2));
    let first = [
        LinearRelation { name: "first-1", targets: quantities(g1, 1), basis: quantities(g1, 0), denominator: d1.clone(), entries: adj1.clone() },
        LinearRelation { name: "first-2", targets: quantities(g2, 1), basis: quantities(g2, 0), denominator: d2.clone(), entries: adj2.clone() },
    ];
    let second = [
        LinearRelation { name: "second-1", targets: quantities(g1, 2), basis: quantities(g1, 1), denominator: d1.clone(), entries: adj1.mul_mat(&e_b1) },
        LinearRelation { name: "second-2", targets: quantities(g2, 2), basis: quantities(g2, 1), denominator: d2.clone(), entries: adj2.mul_mat(&e_b2) },
    ];
    let mut d3 = None;
    let (named, phi1, phi2, omega, nu) = match kind {
        FamilyKind::ParabolicSegment => {
            let omega = Riccati::from_module("omega", &first[0]);
            (Vec::new(), first[0].clone(), first[1].clone(), omega, None)
        }
        FamilyKind::EllipticSegment | FamilyKind::HyperbolicSegment => {
            debug_assert!((0..3).all(|r| second[0].entries[(r, 2)].is_zero()));
            let g = second[0].columns("g", &[0, 1]);
            let phi1 = g.rows("phi1", &[0, 1]);
            let omega = Riccati::from_module("omega", &phi1);
            let l = case.lambda().expect("segment lambda");
            let k = elliptic_k(l, &b2, &adj2, &d2);
            let mut m = PolyMatQ::zeros(3, 3);
            for (r, src) in [0usize, 1, 2].iter().enumerate() {
                m[(r, 0)] = k.entries[(*src, 0)].clone();
                m[(r, 2)] = k.entries[(*src, 1)].clone();
            }
            let phi2 = LinearRelation {
                name: "phi2",
                targets: vec![Quantity::j(0, 1, 2), Quantity::j(1, 1, 2), Quantity::Z { d: 2 }],
                basis: vec![Quantity::j(0, 1, 1), Quantity::j(1, 1, 1), Quantity::Z { d: 1 }],
                denominator: d2.clone(),
                entries: m,
            };
            let nu = Riccati::from_module("nu", &k.rows("k-nu", &[0, 2]));
            (vec![g, k], phi1, phi2, omega, Some(nu))
        }
        FamilyKind::HamiltonianTriangle => {
            let e = second[0].columns("e", &[0, 1]);
            let phi1 = e.rows("phi1", &[0, 1]);
            let omega = Riccati::from_module("omega", &phi1);
            let (l, det3) = triangle_l(&b2, &c2);
            let mut m = PolyMatQ::zeros(3, 3);
            m[(0, 0)] = l.entries[(0, 0)].clone();
            m[(0, 2)] = l.entries[(0, 1)].clone();
            m[(2, 0)] = l.entries[(1, 0)].clone();
            m[(2, 2)] = l.entries[(1, 1)].clone();
            let phi2 = LinearRelation {
                name: "phi2",
                targets: vec![Quantity::j(0, 1, 2), Quantity::j(1, 1, 2), Quantity::j(2, 1, 3)],
                basis: vec![Quantity::j(0, 1, 1), Quantity::j(1, 1, 1), Quantity::j(2, 1, 2)],
                denominator: det3.clone(),
                entries: m,
            };
            let nu = Riccati::from_module("nu", &l);
            d3 = Some(det3);
            (vec![e, l], phi1, phi2, omega, Some(nu))
        }
    };
    Ok(PFSystem {
        kind,
        lambda: case.lambda().map(|l| l.to_string()),
        annulus,
        b1,
        c1,
        b2,
        c2,
        d1,
        d2,
        d3,
        first,
        second,
        named,
        phi1,
        phi2,
        omega,
        nu,
    })
}

/// `D2 (J01'', J11'', Z'') = k (J01', Z')`.
///
/// `(E − B2) U2'` only involves `J01'` and the combination `Z'`, so
/// `k = T adj(P2) W` with `W` mapping `(J01', Z')` to `(E − B2) U2'` and `T`
/// mapping `U2''` to `(J01'', J11'', Z'')`.
fn elliptic_k(l: &Rational, b2: &MatQ, adj2: &PolyMatQ, d2: &PolyQ) -> LinearRelation {
    let z1 = rat(3, 8) * (l.recip() - Rational::one());
    let z2 = rat(1, 4);
    let e = MatQ::identity(3).sub_mat(b2);
    assert!(e[(0, 1)].is_zero() && e[(0, 2)].is_zero() && e[(1, 1)].is_zero() && e[(1, 2)].is_zero());
    assert!(e[(2, 1)] == z1 && e[(2, 2)] == z2, "third row of E − B2 is Z'");
    let w = MatQ::from_rows(vec![
        vec![e[(0, 0)].clone(), Rational::zero()],
        vec![e[(1, 0)].clone(), Rational::zero()],
        vec![e[(2, 0)].clone(), Rational::one()],
    ]);
    let t = MatQ::from_rows(vec![
        vec![Rational::one(), Rational::zero(), Rational::zero()],
        vec![Rational::zero(), Rational::one(), Rational::zero()],
        vec![Rational::zero(), z1, z2],
    ]);
    let k = const_poly_mat(&t).mul_mat(adj2).mul_mat(&const_poly_mat(&w));
    LinearRelation {
        name: "k",
        targets: vec![Quantity::j(0, 1, 2), Quantity::j(1, 1, 2), Quantity::Z { d: 2 }],
        basis: vec![Quantity::j(0, 1, 1), Quantity::Z { d: 1 }],
        denominator: d2.clone(),
        entries: k,
    }
}

/// Triangle relation `D3 (J01'', J21''') = l (J01', J21'')`, using `J11'' ≡ 0`.
///
/// Row 1 of `P2 U2'' = (E − B2) U2'` gives `J01''`; rows 1 and 3 of
/// `P2 U2''' = (E − 2 B2) U2''` give `J21'''` with determinant `D3`.
fn triangle_l(b2: &MatQ, c2: &MatQ) -> (LinearRelation, PolyQ) {
    let p = linear_matrix(b2, c2);
    let e1 = MatQ::identity(3).sub_mat(b2);
    let e2 = MatQ::identity(3).sub_mat(&b2.map(|x| x * rat(2, 1)));
    let rf = |p: &PolyQ| RatFunQ::from_poly(p.clone());
    let cq = |c: &Rational| RatFunQ::from_poly(PolyQ::constant(c.clone()));
    let (p00, p02, p20) = (rf(&p[(0, 0)]), rf(&p[(0, 2)]), rf(&p[(2, 0)]));
    let det3 = p[(0, 0)].clone() * p[(2, 2)].clone() - p[(0, 2)].clone() * p[(2, 0)].clone();
    assert!(e1[(0, 1)].is_zero() && e1[(0, 2)].is_zero(), "first row of E − B2 only sees J01'");
    // J01'' = a J01' + b J21''.
    let a = cq(&e1[(0, 0)]) / p00.clone();
    let b = -(p02.clone() / p00.clone());
    // J21''' = (u J01'' + v J21'') / D3.
    let u = p00.clone() * cq(&e2[(2, 0)]) - p20.clone() * cq(&e2[(0, 0)]);
    let v = p00 * cq(&e2[(2, 2)]) - p20 * cq(&e2[(0, 2)]);
    let d = rf(&det3);
    let l11 = d.clone() * a.clone();
    let l12 = d * b.clone();
    let l21 = u.clone() * a;
    let l22 = u * b + v;
    let entries = PolyMatQ::from_rows(vec![vec![to_poly(&l11), to_poly(&l12)], vec![to_poly(&l21), to_poly(&l22)]]);
    let rel = LinearRelation {
        name: "l",
        targets: vec![Quantity::j(0, 1, 2), Quantity::j(2, 1, 3)],
        basis: vec![Quantity::j(0, 1, 1), Quantity::j(2, 1, 2)],
        denominator: det3.clone(),
        entries,
    };
    (rel, det3)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PfOrder {
    First,
    Second,
}

/// Residual of the first- or second-order Picard-Fuchs identities at `h`.
///
/// First order: `max |U − (B h + C) U'|` with scale `‖U‖∞`. Second order:
/// every second-derivative relation of the system, scaled by `‖U'‖∞`, with
/// `U''` and `U'''` from Taylor propagation through the quadrature.
pub fn pf_residual<T: Real>(sys: &PFSystem, quad: &Quadrature<T>, h: T, order: PfOrder) -> Result<Residual, PfError> {
    let jets = quad.generator_jets::<4>(h)?;
    match order {
        PfOrder::First => {
            let ctx = quad.context(h)?;
            let basis = jets[0].basis();
            let u = ctx.integrals(&basis)?;
            let du = ctx.derivatives(&basis)?;
            let n1 = jets[0].u1.len();
            let ev = |p: &Rational| T::of_rational(p);
            let mut worst = T::zero();
            for (off, b, c) in [(0, &sys.b1, &sys.c1), (n1, &sys.b2, &sys.c2)] {
                for r in 0..b.rows() {
                    let rhs: T = (0..b.cols()).map(|k| (ev(&b[(r, k)]) * h + ev(&c[(r, k)])) * du[off + k]).sum();
                    worst = worst.max((u[off + r] - rhs).abs());
                }
            }
            let scale = u.iter().fold(T::zero(), |m, v| m.max(v.abs()));
            Ok(Residual { residual: worst.to_f64(), scale: scale.to_f64() })
        }
        PfOrder::Second => {
            let mut worst = T::zero();
            for rel in sys.second.iter().chain(&sys.named) {
                worst = worst.max(rel.residual(&jets));
            }
            let scale = jets[1].values().iter().fold(T::zero(), |m, v| m.max(v.abs()));
            Ok(Residual { residual: worst.to_f64(), scale: scale.to_f64() })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RatioKind {
    Omega,
    Nu,
}

/// `ω` and `ν` at one energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeRatios<T> {
    pub h: T,
    pub omega: T,
    pub nu: Option<T>,
}

pub fn derivative_ratios<T: Real>(sys: &PFSystem, quad: &Quadrature<T>, h: T) -> Result<DerivativeRatios<T>, PfError> {
    let jets = quad.generator_jets::<4>(h)?;
    let omega = sys.omega.ratio(&jets)?;
    let nu = match &sys.nu {
        Some(r) => Some(r.ratio(&jets)?),
        None => None,
    };
    Ok(DerivativeRatios { h, omega, nu })
}

/// `|D ρ' − (a2 ρ² + a1 ρ + a0)|` with `ρ'` from Richardson-extrapolated
/// central differences; scale is the largest term.
pub fn riccati_residual<T: Real>(sys: &PFSystem, quad: &Quadrature<T>, h: T, which: RatioKind) -> Result<Residual, PfError> {
    let ric = match which {
        RatioKind::Omega => &sys.omega,
        RatioKind::Nu => sys.nu.as_ref().ok_or(PfError::UnsupportedAnnulus(sys.annulus))?,
    };
    let rho = |x: T| -> Result<T, PfError> { ric.ratio(&quad.generator_jets::<4>(x)?) };
    let (lo, hi) = quad.curve().bounds();
    let room = (h - lo).min(hi - h) * T::of(0.5);
    let step = (T::of(1e-3) * (hi - lo)).min(room);
    let drho = richardson_first(rho, h, step)?;
    let r = rho(h)?;
    let ev = |p: &PolyQ| p.eval_with(h, |c| T::of_rational(c));
    let lhs = ev(&ric.d) * drho;
    let (t2, t1, t0) = (ev(&ric.a2) * r * r, ev(&ric.a1) * r, ev(&ric.a0));
    let scale = lhs.abs().max(t2.abs()).max(t1.abs()).max(t0.abs());
    Ok(Residual { residual: (lhs - t2 - t1 - t0).abs().to_f64(), scale: scale.to_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn p(c: &[Rational]) -> PolyQ {
        PolyQ::new(c.to_vec())
    }

    #[test]
    fn tables_match_the_derivation() {
        let cases = [
            FamilyCase::elliptic(rat(1, 2)).unwrap(),
            FamilyCase::elliptic(int(1)).unwrap(),
            FamilyCase::elliptic(rat(3, 2)).unwrap(),
            FamilyCase::hyperbolic(rat(-1, 2)).unwrap(),
            FamilyCase::parabolic(),
            FamilyCase::triangle(),
        ];
        for case in cases {
            let sys = pf_system(&case, case.primary_annulus().id).unwrap();
            let (p1, p2) = derive_pf_matrices(&case).unwrap();
            assert_eq!(split_linear(&p1).unwrap(), (sys.b1.clone(), sys.c1.clone()), "{}", case.label());
            assert_eq!(split_linear(&p2).unwrap(), (sys.b2.clone(), sys.c2.clone()), "{}", case.label());
        }
    }

    #[test]
    fn parabolic_determinants() {
        let sys = pf_system(&FamilyCase::parabolic(), AnnulusId::Sole).unwrap();
        assert_eq!(sys.d1, p(&[int(0), rat(32, 15), rat(16, 15)]));
        assert_eq!(sys.d2, p(&[int(0), int(4), int(2)]));
    }

    #[test]
    fn triangle_reduced_determinant() {
        let sys = pf_system(&FamilyCase::triangle(), AnnulusId::Sole).unwrap();
        // (3/16) h (6h − 1)
        assert_eq!(sys.d3.unwrap(), p(&[int(0), rat(-3, 16), rat(9, 8)]));
        let l = &sys.named[1];
        assert_eq!(l.entry(1, 0), &PolyQ::constant(rat(1, 16)));
        assert_eq!(l.entry(1, 1), &p(&[rat(-1, 16), rat(-3, 4)]));
    }

    #[test]
    fn left_annulus_needs_the_explicit_entry_point() {
        let case = FamilyCase::elliptic(int(1)).unwrap();
        assert!(matches!(pf_system(&case, AnnulusId::Left), Err(PfError::UnsupportedAnnulus(_))));
        assert!(pf_system_any_annulus(&case, AnnulusId::Left).is_ok());
    }
}
