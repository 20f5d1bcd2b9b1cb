//! Elimination `M → F1`, the second-order annihilating operator `L` of the
//! two-generator part `Φ1`, the image `R = L Φ2`, and the zero bound for
//! square-root mixtures.
//!
//! Every form here is `Φ = Σ c_k(h) q_k(h)` with `q` the basis of a
//! differential module `D q' = E q`. Then `D Φ' = c1·q` with
//! `c1 = D c' + c E` and `D² Φ'' = c2·q` with `c2 = D c1' + c1 E − D' c1`, so
//! `D² L Φ = (P2 c2 + P1 D c1 + P0 D² c)·q` and the operator coefficients solve
//! an exact homogeneous linear system.

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{bareiss_echelon, integer_normalize, nullspace, Mat};
use crate::family::FamilyKind;
use crate::picard_fuchs::{LinearRelation, PFSystem, Quantity};
use crate::quadrature::{GeneratorVector, Quadrature, QuadratureError};
use crate::reduction::{GeneratorCombination, Residual};
use crate::scalar::{floor_div, rat, Real};
use crate::{PolyQ, RatFunQ, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthesisError {
    /// `J02'` drops out of both `M` and `M'`; carries the direct form of `M`.
    #[error("J02' has zero coefficient in both M and M'")]
    DegenerateElimination { direct: ReducedForm },
    #[error("form is identically zero")]
    ZeroForm,
    #[error("no annihilating operator within the degree ceilings ({equations} equations, {unknowns} unknowns)")]
    NoKernel { equations: usize, unknowns: usize },
    #[error("form label {0} is not in the module basis")]
    NotInModule(Quantity),
    #[error("combination belongs to {0}, system to {1}")]
    WrongFamily(&'static str, &'static str),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// `Σ coefficient(h) · quantity(h)` with the first `phi1_len` parts forming `Φ1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedForm {
    pub kind: FamilyKind,
    pub parts: Vec<(Quantity, PolyQ)>,
    pub phi1_len: usize,
}

impl ReducedForm {
    pub fn new(kind: FamilyKind, parts: Vec<(Quantity, PolyQ)>, phi1_len: usize) -> Self {
        ReducedForm { kind, parts, phi1_len }
    }

    pub fn labels(&self) -> Vec<String> {
        self.parts.iter().map(|(q, _)| q.to_string()).collect()
    }

    pub fn coefficient(&self, q: Quantity) -> Option<&PolyQ> {
        self.parts.iter().find(|(p, _)| *p == q).map(|(_, c)| c)
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|(_, c)| c.is_zero())
    }

    pub fn phi1(&self) -> ReducedForm {
        ReducedForm::new(self.kind, self.parts[..self.phi1_len].to_vec(), self.phi1_len)
    }

    pub fn phi2(&self) -> ReducedForm {
        ReducedForm::new(self.kind, self.parts[self.phi1_len..].to_vec(), 0)
    }

    /// Highest derivative of a generator needed for `order` derivatives of the form.
    pub fn jet_order(&self, order: usize) -> usize {
        self.parts.iter().map(|(q, _)| q.order()).max().unwrap_or(0) + order
    }

    /// `Φ, Φ', …, Φ^(order)` at `jets[0].h`.
    pub fn derivatives<T: Real>(&self, jets: &[GeneratorVector<T>], order: usize) -> Vec<T> {
        let h = jets[0].h;
        let mut out = vec![T::zero(); order + 1];
        for (q, c) in &self.parts {
            let mut cd = Vec::with_capacity(order + 1);
            let mut p = c.clone();
            for _ in 0..=order {
                cd.push(p.eval_with(h, |a| T::of_rational(a)));
                p = p.derivative();
            }
            let mut qd = Vec::with_capacity(order + 1);
            let mut cur = *q;
            for _ in 0..=order {
                qd.push(cur.eval(jets));
                cur = cur.differentiated();
            }
            for (d, o) in out.iter_mut().enumerate() {
                let mut binom = T::one();
                for m in 0..=d {
                    *o += binom * cd[d - m] * qd[m];
                    binom = binom * T::of_usize(d - m) / T::of_usize(m + 1);
                }
            }
        }
        out
    }

    pub fn evaluate<T: Real>(&self, jets: &[GeneratorVector<T>]) -> T {
        self.derivatives(jets, 0)[0]
    }
}

/// Which way the section writes the eliminated identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GammaConvention {
    /// `γ1 M = γ2 M' + F1`.
    MFirst,
    /// `γ1 M' = γ2 M + F1`.
    MPrimeFirst,
    /// No elimination: `F1 = M`, `γ1 = 1`, `γ2 = 0`.
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct F1DegreeEntry {
    pub label: String,
    pub degree: isize,
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Elimination {
    pub gamma1: PolyQ,
    pub gamma2: PolyQ,
    pub convention: GammaConvention,
    /// `F1` over the derivative basis, `Φ1` first.
    pub f1: ReducedForm,
    /// `Φ2` rewritten over the basis of the system's `Φ2` module.
    pub phi2: ReducedForm,
    pub degrees: Vec<F1DegreeEntry>,
    pub degrees_pass: bool,
}

impl Elimination {
    /// `|γ1 M − γ2 M' − F1|` (or the `M'`-first form) with `M, M'` numeric.
    pub fn residual<T: Real>(&self, comb: &GeneratorCombination, jets: &[GeneratorVector<T>]) -> Residual {
        let h = jets[0].h;
        let m = comb.numeric::<T>().evaluate_derivatives(&jets[..2]);
        let g1 = self.gamma1.eval_with(h, |a| T::of_rational(a));
        let g2 = self.gamma2.eval_with(h, |a| T::of_rational(a));
        let f1 = self.f1.evaluate(jets);
        let (a, b) = match self.convention {
            GammaConvention::MFirst | GammaConvention::Direct => (g1 * m[0], g2 * m[1]),
            GammaConvention::MPrimeFirst => (g1 * m[1], g2 * m[0]),
        };
        let scale = a.abs().max(b.abs()).max(f1.abs());
        Residual { residual: (a - b - f1).abs().to_f64(), scale: scale.to_f64() }
    }
}

/// Degree ceilings of `α3, β3, η3, ξ3, ζ3` in `F1`.
pub fn f1_degree_bounds(kind: FamilyKind, n: usize) -> Vec<i64> {
    let n = n as i64;
    let f = |k: i64| floor_div(n - k, 3);
    match kind {
        FamilyKind::EllipticSegment | FamilyKind::HyperbolicSegment => vec![
            f(0) + f(2) + 1,
            f(1) + f(2) + 1,
            f(1) + f(2) + 1,
            2 * f(2),
            f(3) + f(2) + 1,
        ],
        FamilyKind::HamiltonianTriangle => {
            vec![f(0) + f(2) + 1, f(1) + f(2), f(1) + f(2) + 1, 2 * f(2) + 1, f(3) + f(2)]
        }
        FamilyKind::ParabolicSegment => {
            let h2 = floor_div(n, 2);
            vec![h2, h2 - 1, h2, f(2)]
        }
    }
}

fn q(i: usize, j: usize, d: usize) -> Quantity {
    Quantity::j(i, j, d)
}

/// Rewrites `M` and `M'` over `U'` with the Picard-Fuchs systems and
/// eliminates `J02'`. The parabolic family needs no elimination.
pub fn eliminate_and_form_f1(sys: &PFSystem, comb: &GeneratorCombination, n: usize) -> Result<Elimination, SynthesisError> {
    if comb.kind != sys.kind {
        return Err(SynthesisError::WrongFamily(comb.kind.name(), sys.kind.name()));
    }
    let kind = sys.kind;
    if kind == FamilyKind::ParabolicSegment {
        let parts: Vec<(Quantity, PolyQ)> =
            comb.basis.iter().zip(&comb.coefficients).map(|(g, c)| (q(g.i, g.j, 0), c.clone())).collect();
        let f1 = ReducedForm::new(kind, parts, 2);
        let phi2 = f1.phi2();
        let (degrees, degrees_pass) = audit(&f1, kind, n);
        return Ok(Elimination {
            gamma1: PolyQ::one(),
            gamma2: PolyQ::zero(),
            convention: GammaConvention::Direct,
            f1,
            phi2,
            degrees,
            degrees_pass,
        });
    }
    let sigma = &comb.coefficients;
    // Coefficients of M and M' over (J00', J10', J02', J01', J11', J21').
    let mut a = vec![PolyQ::zero(); 6];
    let mut b = vec![PolyQ::zero(); 6];
    for (off, bm, cm) in [(0usize, &sys.b1, &sys.c1), (3, &sys.b2, &sys.c2)] {
        for c in 0..3 {
            for r in 0..3 {
                let p = PolyQ::new(vec![cm[(r, c)].clone(), bm[(r, c)].clone()]);
                a[off + c] += &(&sigma[off + r] * &p);
                b[off + c] += &(&sigma[off + r].derivative() * &p);
            }
            b[off + c] += &sigma[off + c];
        }
    }
    let labels = [q(0, 0, 1), q(1, 0, 1), q(0, 1, 1), q(1, 1, 1), q(2, 1, 1)];
    if a[2].is_zero() && b[2].is_zero() {
        let parts = [0, 1, 3, 4, 5].iter().zip(labels).map(|(&k, l)| (l, a[k].clone())).collect();
        return Err(SynthesisError::DegenerateElimination { direct: ReducedForm::new(kind, parts, 2) });
    }
    let (gamma1, gamma2, convention, first, second) = if kind == FamilyKind::HamiltonianTriangle {
        (a[2].clone(), b[2].clone(), GammaConvention::MPrimeFirst, &b, &a)
    } else {
        (b[2].clone(), a[2].clone(), GammaConvention::MFirst, &a, &b)
    };
    let parts: Vec<(Quantity, PolyQ)> = [0, 1, 3, 4, 5]
        .iter()
        .zip(labels)
        .map(|(&k, l)| (l, &gamma1 * &first[k] - &gamma2 * &second[k]))
        .collect();
    let f1 = ReducedForm::new(kind, parts, 2);
    let phi2 = phi2_in_module(sys, &f1);
    let (degrees, degrees_pass) = audit(&f1, kind, n);
    Ok(Elimination { gamma1, gamma2, convention, f1, phi2, degrees, degrees_pass })
}

fn audit(f1: &ReducedForm, kind: FamilyKind, n: usize) -> (Vec<F1DegreeEntry>, bool) {
    let entries: Vec<F1DegreeEntry> = f1
        .parts
        .iter()
        .zip(f1_degree_bounds(kind, n))
        .map(|((l, c), bound)| F1DegreeEntry { label: l.to_string(), degree: c.degree(), bound })
        .collect();
    let pass = entries.iter().all(|e| e.degree as i64 <= e.bound);
    (entries, pass)
}

/// `Φ2 = η3 J01' + ξ3 J11' + ζ3 J21'` over the basis of `sys.phi2`:
/// `(J01', J11', Z')` for segments, `(J01', J11', J21'')` for the triangle.
fn phi2_in_module(sys: &PFSystem, f1: &ReducedForm) -> ReducedForm {
    let eta = f1.parts[2].1.clone();
    let xi = f1.parts[3].1.clone();
    let zeta = f1.parts[4].1.clone();
    let [w0, w1, w2] = j21_prime_in_phi2_basis(sys);
    let parts = vec![
        (sys.phi2.basis[0], eta + &zeta * &w0),
        (sys.phi2.basis[1], xi + &zeta * &w1),
        (sys.phi2.basis[2], &zeta * &w2),
    ];
    ReducedForm::new(sys.kind, parts, 0)
}

/// `J21'` as a polynomial combination of `sys.phi2.basis`.
pub fn j21_prime_in_phi2_basis(sys: &PFSystem) -> [PolyQ; 3] {
    match sys.kind {
        FamilyKind::HamiltonianTriangle => {
            // Third row of P2 U2'' = (E − B2) U2' with J11'' = 0, then J01'' from `l`.
            let l = &sys.named[1];
            let e = crate::MatQ::identity(3).sub_mat(&sys.b2);
            let p = |r: usize, c: usize| PolyQ::new(vec![sys.c2[(r, c)].clone(), sys.b2[(r, c)].clone()]);
            let rf = |x: PolyQ| RatFunQ::from_poly(x);
            let d3 = rf(l.denominator.clone());
            let e22 = rf(PolyQ::constant(e[(2, 2)].clone()));
            let j01pp = [rf(l.entry(0, 0).clone()) / d3.clone(), rf(l.entry(0, 1).clone()) / d3];
            let c0 = (rf(p(2, 0)) * j01pp[0].clone() - rf(PolyQ::constant(e[(2, 0)].clone()))) / e22.clone();
            let c1 = -rf(PolyQ::constant(e[(2, 1)].clone())) / e22.clone();
            let c2 = (rf(p(2, 0)) * j01pp[1].clone() + rf(p(2, 2))) / e22;
            [c0, c1, c2].map(|r| r.as_poly().expect("J21' is polynomial in the module basis"))
        }
        _ => {
            // Z = z1 J11 + z2 J21 with z1 = (3/8)(1/λ − 1), z2 = 1/4.
            let lam = lambda_of(sys).expect("segment lambda");
            let z1 = rat(3, 8) * (lam.recip() - Rational::one());
            let z2 = rat(1, 4);
            [PolyQ::zero(), PolyQ::constant(-(z1 / &z2)), PolyQ::constant(z2.recip())]
        }
    }
}

fn lambda_of(sys: &PFSystem) -> Option<Rational> {
    sys.lambda.as_deref().and_then(crate::scalar::parse_rational)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnnihilatorOperator {
    pub p2: PolyQ,
    pub p1: PolyQ,
    pub p0: PolyQ,
}

impl AnnihilatorOperator {
    pub fn new(p2: PolyQ, p1: PolyQ, p0: PolyQ) -> Option<Self> {
        if p2.is_zero() && p1.is_zero() && p0.is_zero() {
            None
        } else {
            Some(AnnihilatorOperator { p2, p1, p0 })
        }
    }

    /// `(|P2 φ'' + P1 φ' + P0 φ|, largest term)`.
    pub fn apply<T: Real>(&self, h: T, phi: [T; 3]) -> (T, T) {
        let ev = |p: &PolyQ| p.eval_with(h, |a| T::of_rational(a));
        let t = [ev(&self.p0) * phi[0], ev(&self.p1) * phi[1], ev(&self.p2) * phi[2]];
        let scale = t.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        ((t[0] + t[1] + t[2]).abs(), scale)
    }
}

/// `m2` for the annihilator of `Φ1`; `m1 = m2 − 1`, `m0 = m2 − 2`.
pub fn annihilator_degree_ceiling(kind: FamilyKind, n: usize) -> i64 {
    let n = n as i64;
    let f = |k: i64| floor_div(n - k, 3);
    match kind {
        FamilyKind::ParabolicSegment => 2 * floor_div(n, 2) + 2,
        _ => f(0) + f(1) + 2 * f(2) + 13,
    }
}

/// Ceilings on the numerator degrees of `D1² L Φ1` over `(J00', J10')`.
fn numerator_ceilings(kind: FamilyKind, n: usize) -> Option<[i64; 2]> {
    let n = n as i64;
    let f = |k: i64| floor_div(n - k, 3);
    match kind {
        FamilyKind::ParabolicSegment => None,
        _ => Some([2 * f(0) + f(1) + 3 * f(2) + 18, f(0) + 2 * f(1) + 3 * f(2) + 18]),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Synthesis {
    pub operator: AnnihilatorOperator,
    pub equations: usize,
    pub unknowns: usize,
    pub nullity: usize,
    pub m2: i64,
    pub degrees_pass: bool,
}

/// Image of a form under one and two derivatives: `D Φ' = c1·q`, `D² Φ'' = c2·q`.
struct Lifted {
    d: PolyQ,
    c: Vec<PolyQ>,
    c1: Vec<PolyQ>,
    c2: Vec<PolyQ>,
}

fn lift(form: &ReducedForm, module: &LinearRelation) -> Result<Lifted, SynthesisError> {
    let k = module.basis.len();
    let mut c = vec![PolyQ::zero(); k];
    for (label, coef) in &form.parts {
        let pos = module.basis.iter().position(|b| b == label).ok_or(SynthesisError::NotInModule(*label))?;
        c[pos] += coef;
    }
    let d = module.denominator.clone();
    let step = |v: &[PolyQ]| -> Vec<PolyQ> {
        (0..k)
            .map(|col| {
                let mut s = &d * &v[col].derivative();
                for (row, x) in v.iter().enumerate() {
                    s += &(x * module.entry(row, col));
                }
                s
            })
            .collect()
    };
    let c1 = step(&c);
    let dd = d.derivative();
    let c2: Vec<PolyQ> = step(&c1).into_iter().zip(&c1).map(|(s, x)| s - &dd * x).collect();
    Ok(Lifted { d, c, c1, c2 })
}

fn deg(p: &PolyQ) -> i64 {
    p.degree() as i64
}

/// Finds `L` with `L Φ1 = 0` and the prescribed degree ceilings.
///
/// When several operators exist, the one minimizing `deg P2` is returned,
/// then the one with the fewest high-order `P1`, `P0` coefficients; it is
/// scaled to coprime integer coefficients with a positive leading coefficient.
pub fn synthesize_l(sys: &PFSystem, phi1: &ReducedForm, n: usize) -> Result<Synthesis, SynthesisError> {
    if phi1.is_zero() {
        return Err(SynthesisError::ZeroForm);
    }
    let lifted = lift(phi1, &sys.phi1)?;
    let m2 = annihilator_degree_ceiling(sys.kind, n);
    let (m1, m0) = (m2 - 1, m2 - 2);
    let dc1: Vec<PolyQ> = lifted.c1.iter().map(|x| &lifted.d * x).collect();
    let d2 = &lifted.d * &lifted.d;
    let d2c: Vec<PolyQ> = lifted.c.iter().map(|x| &d2 * x).collect();
    let ceilings = numerator_ceilings(sys.kind, n);
    // Unknown blocks in column order: P2, P1, P0, each from the top degree down.
    let blocks: [(i64, &Vec<PolyQ>); 3] = [(m2, &lifted.c2), (m1, &dc1), (m0, &d2c)];
    let unknowns: usize = blocks.iter().map(|(m, _)| (*m + 1) as usize).sum();
    let mut row_offsets = Vec::new();
    let mut equations = 0usize;
    for r in 0..lifted.c.len() {
        let actual = blocks.iter().map(|(m, v)| m + deg(&v[r])).max().unwrap_or(-1);
        let top = ceilings.map_or(actual, |c| c[r].max(actual));
        row_offsets.push(equations);
        equations += (top + 1).max(0) as usize;
    }
    let mut a = Mat::<Rational>::zeros(equations, unknowns);
    let mut col = 0;
    for (m, v) in blocks {
        for k in (0..=m as usize).rev() {
            for (r, p) in v.iter().enumerate() {
                for (e, coef) in p.coeffs().iter().enumerate() {
                    a[(row_offsets[r] + e + k, col)] += coef;
                }
            }
            col += 1;
        }
    }
    let kernel = nullspace(&a);
    if kernel.is_empty() {
        return Err(SynthesisError::NoKernel { equations, unknowns });
    }
    let nullity = kernel.len();
    let k = Mat::from_rows(kernel);
    let (ech, _) = bareiss_echelon(&k);
    let last: Vec<Rational> = ech.last().expect("kernel is nonempty").iter().map(|x| Rational::from_integer(x.clone())).collect();
    let ints = integer_normalize(&last, None);
    let split = |from: usize, m: i64| -> PolyQ {
        let mut c: Vec<Rational> = (0..=m as usize).map(|j| Rational::from_integer(ints[from + j].clone())).collect();
        c.reverse();
        PolyQ::new(c)
    };
    let (s1, s0) = ((m2 + 1) as usize, (m2 + 1 + m1 + 1) as usize);
    let mut operator = AnnihilatorOperator::new(split(0, m2), split(s1, m1), split(s0, m0)).expect("kernel vector is nonzero");
    if leading_sign_negative(&operator) {
        operator = AnnihilatorOperator { p2: -operator.p2, p1: -operator.p1, p0: -operator.p0 };
    }
    let degrees_pass = deg(&operator.p2) <= m2 && deg(&operator.p1) <= m1 && deg(&operator.p0) <= m0;
    Ok(Synthesis { operator, equations, unknowns, nullity, m2, degrees_pass })
}

fn leading_sign_negative(op: &AnnihilatorOperator) -> bool {
    [&op.p2, &op.p1, &op.p0]
        .into_iter()
        .find(|p| !p.is_zero())
        .and_then(|p| p.leading())
        .is_some_and(|c| c.is_negative())
}

/// `D² · L Φ` over the module basis, exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuleImage {
    pub denominator: PolyQ,
    pub numerator: ReducedForm,
}

impl ModuleImage {
    pub fn evaluate<T: Real>(&self, jets: &[GeneratorVector<T>]) -> T {
        let h = jets[0].h;
        self.numerator.evaluate(jets) / self.denominator.eval_with(h, |a| T::of_rational(a))
    }
}

pub fn apply_operator(op: &AnnihilatorOperator, form: &ReducedForm, module: &LinearRelation) -> Result<ModuleImage, SynthesisError> {
    let lifted = lift(form, module)?;
    let d2 = &lifted.d * &lifted.d;
    let parts = module
        .basis
        .iter()
        .enumerate()
        .map(|(r, b)| {
            let x = &op.p2 * &lifted.c2[r] + &(&op.p1 * &lifted.d) * &lifted.c1[r] + &(&op.p0 * &d2) * &lifted.c[r];
            (*b, x)
        })
        .collect();
    Ok(ModuleImage { denominator: d2, numerator: ReducedForm::new(form.kind, parts, 0) })
}

/// `R = L F1 = L Φ2`, with denominator `D²` of the `Φ2` module.
pub fn r_form(sys: &PFSystem, op: &AnnihilatorOperator, elim: &Elimination) -> Result<ModuleImage, SynthesisError> {
    apply_operator(op, &elim.phi2, &sys.phi2)
}

/// `|P2 Φ1'' + P1 Φ1' + P0 Φ1|` over the largest of the three terms.
pub fn annihilator_residual<T: Real>(
    quad: &Quadrature<T>,
    op: &AnnihilatorOperator,
    phi1: &ReducedForm,
    h: T,
) -> Result<f64, SynthesisError> {
    let jets = quad.generator_jets::<5>(h)?;
    let d = phi1.derivatives(&jets, 2);
    let (r, scale) = op.apply(h, [d[0], d[1], d[2]]);
    let tiny = T::of(1e-300);
    Ok((r / scale.max(tiny)).to_f64())
}

/// Zero bound for `P0 + Σ_j P_j sqrt(c_j)`-type mixtures:
/// `k (max_j deg P_j + 1) + deg P0` with `deg 0 = −1`.
pub fn sqrt_mix_zero_bound(p0: &PolyQ, parts: &[(PolyQ, Rational)]) -> i64 {
    let k = parts.len() as i64;
    let top = parts.iter().map(|(p, _)| deg(p)).max().unwrap_or(-1);
    if k == 0 {
        deg(p0)
    } else {
        k * (top + 1) + deg(p0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{AnnulusId, FamilyCase};
    use crate::perturbation::PerturbationSpec;
    use crate::picard_fuchs::pf_system;
    use crate::reduction::melnikov_symbolic;
    use crate::scalar::int;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(case: &FamilyCase, n: usize, seed: u64) -> (PFSystem, GeneratorCombination) {
        let an = case.primary_annulus().id;
        let sys = pf_system(case, an).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pert = PerturbationSpec::random(n, &mut rng);
        (sys, melnikov_symbolic(case, an, &pert).unwrap())
    }

    #[test]
    fn elliptic_counts_at_n3() {
        let case = FamilyCase::elliptic(int(1)).unwrap();
        let (sys, comb) = setup(&case, 3, 1);
        let elim = eliminate_and_form_f1(&sys, &comb, 3).unwrap();
        assert!(elim.degrees_pass);
        assert!(elim.f1.parts[0].1.degree() <= 2);
        let syn = synthesize_l(&sys, &elim.f1.phi1(), 3).unwrap();
        assert_eq!((syn.equations, syn.unknowns), (41, 42));
        assert!(syn.degrees_pass);
        assert!(syn.operator.p2.degree() <= 14);
    }

    #[test]
    fn annihilator_and_gamma_identity_numerically() {
        for case in [FamilyCase::elliptic(int(1)).unwrap(), FamilyCase::triangle(), FamilyCase::parabolic(), FamilyCase::hyperbolic(rat(-1, 2)).unwrap()] {
            let an = case.primary_annulus();
            let (sys, comb) = setup(&case, 3, 7);
            let elim = eliminate_and_form_f1(&sys, &comb, 3).unwrap();
            let syn = synthesize_l(&sys, &elim.f1.phi1(), 3).unwrap();
            assert!(syn.degrees_pass && syn.nullity >= 1);
            let quad = Quadrature::<f64>::with_defaults(&case, an.id).unwrap();
            let r = r_form(&sys, &syn.operator, &elim).unwrap();
            for h in an.interior_grid::<f64>(5, 1e-3) {
                let res = annihilator_residual(&quad, &syn.operator, &elim.f1.phi1(), h).unwrap();
                assert!(res < 1e-5, "{} h={h} res={res}", case.label());
                let jets = quad.generator_jets::<5>(h).unwrap();
                let g = elim.residual(&comb, &jets);
                assert!(g.relative() < 1e-7, "{} gamma h={h} {g:?}", case.label());
                let lf = {
                    let d = elim.f1.derivatives(&jets, 2);
                    let ev = |p: &PolyQ| p.eval_with(h, rational_f);
                    ev(&syn.operator.p2) * d[2] + ev(&syn.operator.p1) * d[1] + ev(&syn.operator.p0) * d[0]
                };
                let rv = r.evaluate(&jets);
                assert!((lf - rv).abs() <= 1e-6 * lf.abs().max(rv.abs()).max(1e-300), "{} R h={h}: {lf} vs {rv}", case.label());
            }
        }
    }

    fn rational_f(a: &Rational) -> f64 {
        crate::scalar::rational_to_f64(a)
    }

    #[test]
    fn zero_bound_examples() {
        let p = |d: usize| PolyQ::monomial(int(1), d);
        assert_eq!(sqrt_mix_zero_bound(&PolyQ::zero(), &[(p(2), int(2))]), 2);
        assert_eq!(sqrt_mix_zero_bound(&p(3), &[]), 3);
        assert_eq!(sqrt_mix_zero_bound(&p(0), &[(p(1), int(2)), (p(4), int(3))]), 10);
    }

    #[test]
    fn zero_melnikov_is_degenerate() {
        let case = FamilyCase::elliptic(int(1)).unwrap();
        let sys = pf_system(&case, AnnulusId::Right).unwrap();
        let comb = GeneratorCombination::zero(case.kind());
        match eliminate_and_form_f1(&sys, &comb, 3) {
            Err(SynthesisError::DegenerateElimination { direct }) => assert!(direct.is_zero()),
            other => panic!("{other:?}"),
        }
    }
}
