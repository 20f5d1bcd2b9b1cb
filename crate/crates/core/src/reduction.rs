//! Exact reduction of monomial integrals `J_{i,j}` to a family's generators.
//!
//! Two identities hold on every oval for all `i, j ≥ 0`:
//!
//! * level: `Σ A_k J_{i+k,j} + Σ C_k J_{i+k,j+2} − h J_{i,j} = 0`, from `H = h`;
//! * gradient: `Σ m A_m J_{i+m−1,j} + Σ k C_k J_{i+k−1,j+2}
//!   − 2/(j+2) Σ (i+k) C_k J_{i+k−1,j+2} = 0`, from `H_x + H_y y' = 0`
//!   after integrating the `dy` part by parts.
//!
//! Monomials are graded by a weight (`i + j`, or `2i + j` for the parabolic
//! family) under which the top part of each identity has constant
//! coefficients. Levels are eliminated in increasing weight; leftover rows
//! resolve symbols that earlier levels could not.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::family::{AnnulusId, FamilyCase, FamilyKind};
use crate::perturbation::PerturbationSpec;
use crate::quadrature::{generator_basis, GeneratorVector, MonomialIndex, Quadrature, QuadratureError};
use crate::scalar::{floor_div, int, rat, Real};
use crate::{PolyQ, Rational};

/// Largest `i + j` the engine is asked to reduce.
pub const MAX_INDEX_DEGREE: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("no reduction path for {0} in the {1} family")]
    UnsupportedIndex(MonomialIndex, &'static str),
    #[error("identity needs a negative index")]
    NegativeIndex,
    #[error("{0} is not an index of this identity")]
    OffIdentity(MonomialIndex),
    #[error("identity does not apply to the {0} family")]
    WrongFamily(&'static str),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

type Row = BTreeMap<MonomialIndex, PolyQ>;

fn add_to(row: &mut Row, key: MonomialIndex, v: PolyQ) {
    if v.is_zero() {
        return;
    }
    let slot = row.entry(key).or_insert_with(PolyQ::zero);
    *slot += &v;
    if slot.is_zero() {
        row.remove(&key);
    }
}

/// Replaces every symbol that has a normal form.
fn substitute(row: &Row, nf: &HashMap<MonomialIndex, Row>) -> Row {
    let mut out = Row::new();
    for (s, c) in row {
        match nf.get(s) {
            Some(expr) if !(expr.len() == 1 && expr.contains_key(s)) => {
                for (g, v) in expr {
                    add_to(&mut out, *g, c * v);
                }
            }
            _ => add_to(&mut out, *s, c.clone()),
        }
    }
    out
}

/// Replaces one symbol by an expression inside `row`.
fn eliminate(row: &mut Row, sym: MonomialIndex, expr: &Row) {
    if let Some(c) = row.remove(&sym) {
        for (g, v) in expr {
            add_to(row, *g, &c * v);
        }
    }
}

/// Normal forms of all monomials up to a degree, for one family.
#[derive(Debug)]
pub struct ReductionTable {
    kind: FamilyKind,
    max_degree: usize,
    generators: Vec<MonomialIndex>,
    nf: HashMap<MonomialIndex, Row>,
    generator_relations: Vec<Row>,
}

impl ReductionTable {
    pub fn build(case: &FamilyCase, max_degree: usize) -> Self {
        let (b1, b2) = generator_basis(case.kind());
        let generators: Vec<MonomialIndex> = b1.iter().chain(b2).copied().collect();
        let (wx, wy) = match case.kind() {
            FamilyKind::ParabolicSegment => (2, 1),
            _ => (1, 1),
        };
        let weight = |m: &MonomialIndex| wx * m.i + wy * m.j;
        let max_w = (0..=max_degree).map(|a| weight(&MonomialIndex::new(a, max_degree - a))).max().unwrap_or(0);
        let a = case.a_poly();
        let c = case.c_poly();
        let h = PolyQ::x();
        let k = |v: Rational| PolyQ::constant(v);

        // All identities whose top weight is at most max_w, bucketed by that weight.
        let mut buckets: Vec<Vec<Row>> = vec![Vec::new(); max_w + 1];
        for i in 0..=max_w {
            for j in 0..=max_w {
                let mut level = Row::new();
                for (p, ak) in a.coeffs().iter().enumerate() {
                    add_to(&mut level, MonomialIndex::new(i + p, j), k(ak.clone()));
                }
                for (p, ck) in c.coeffs().iter().enumerate() {
                    add_to(&mut level, MonomialIndex::new(i + p, j + 2), k(ck.clone()));
                }
                add_to(&mut level, MonomialIndex::new(i, j), -h.clone());
                let mut grad = Row::new();
                for (p, ak) in a.coeffs().iter().enumerate().skip(1) {
                    add_to(&mut grad, MonomialIndex::new(i + p - 1, j), k(ak * int(p as i64)));
                }
                let two_over = rat(2, j as i64 + 2);
                for (p, ck) in c.coeffs().iter().enumerate() {
                    if p >= 1 {
                        add_to(&mut grad, MonomialIndex::new(i + p - 1, j + 2), k(ck * int(p as i64)));
                    }
                    if i + p >= 1 {
                        let v = -(&two_over * ck * int((i + p) as i64));
                        add_to(&mut grad, MonomialIndex::new(i + p - 1, j + 2), k(v));
                    }
                }
                for row in [level, grad] {
                    if let Some(w) = row.keys().map(weight).max() {
                        if w <= max_w {
                            buckets[w].push(row);
                        }
                    }
                }
            }
        }

        let mut nf: HashMap<MonomialIndex, Row> =
            generators.iter().map(|g| (*g, Row::from([(*g, PolyQ::one())]))).collect();
        let mut generator_relations = Vec::new();
        for (w, rows) in buckets.into_iter().enumerate() {
            let unknowns: Vec<MonomialIndex> = (0..=w)
                .flat_map(|i| (0..=w).map(move |j| MonomialIndex::new(i, j)))
                .filter(|m| weight(m) == w && !generators.contains(m))
                .collect();
            let mut solved: BTreeMap<MonomialIndex, Row> = BTreeMap::new();
            let mut remaining = Vec::new();
            for row in rows {
                let mut row = substitute(&row, &nf);
                for (s, expr) in &solved {
                    eliminate(&mut row, *s, expr);
                }
                let pivot = unknowns
                    .iter()
                    .copied()
                    .find(|u| row.get(u).is_some_and(|c| c.degree() == 0));
                match pivot {
                    Some(p) => {
                        let c = row.remove(&p).expect("pivot present");
                        let inv = -(Rational::one() / c.coeff(0));
                        let expr: Row = row.into_iter().map(|(s, v)| (s, v.scale(&inv))).collect();
                        for other in solved.values_mut() {
                            eliminate(other, p, &expr);
                        }
                        solved.insert(p, expr);
                    }
                    None => remaining.push(row),
                }
            }
            for (s, expr) in solved {
                for other in nf.values_mut() {
                    eliminate(other, s, &expr);
                }
                nf.insert(s, expr);
            }
            for row in remaining {
                let mut row = substitute(&row, &nf);
                if row.is_empty() {
                    continue;
                }
                let candidate = row
                    .iter()
                    .filter(|(s, c)| !generators.contains(s) && c.degree() == 0)
                    .map(|(s, _)| *s)
                    .max_by_key(|s| (weight(s), *s));
                match candidate {
                    Some(p) => {
                        let c = row.remove(&p).expect("candidate present");
                        let inv = -(Rational::one() / c.coeff(0));
                        let expr: Row = row.into_iter().map(|(s, v)| (s, v.scale(&inv))).collect();
                        for other in nf.values_mut() {
                            eliminate(other, p, &expr);
                        }
                        nf.insert(p, expr);
                    }
                    None => {
                        if row.keys().all(|s| generators.contains(s)) {
                            generator_relations.push(row);
                        }
                    }
                }
            }
        }
        // Keep only forms that are purely in the generators.
        nf.retain(|_, expr| expr.keys().all(|s| generators.contains(s)));
        ReductionTable { kind: case.kind(), max_degree, generators, nf, generator_relations }
    }

    /// Process-wide cache keyed by family and degree.
    pub fn shared(case: &FamilyCase, max_degree: usize) -> Arc<ReductionTable> {
        type Cache = Mutex<HashMap<(FamilyCase, usize), Arc<ReductionTable>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (case.clone(), max_degree);
        if let Some(t) = cache.lock().expect("cache lock").get(&key) {
            return t.clone();
        }
        let table = Arc::new(Self::build(case, max_degree));
        cache.lock().expect("cache lock").entry(key).or_insert(table).clone()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn generators(&self) -> &[MonomialIndex] {
        &self.generators
    }

    /// Nontrivial polynomial relations among the generators found on the way.
    pub fn generator_relations(&self) -> &[BTreeMap<MonomialIndex, PolyQ>] {
        &self.generator_relations
    }

    pub fn reduce(&self, idx: MonomialIndex) -> Result<GeneratorCombination, ReductionError> {
        let expr = self
            .nf
            .get(&idx)
            .filter(|_| idx.degree() <= self.max_degree)
            .ok_or(ReductionError::UnsupportedIndex(idx, self.kind.name()))?;
        let mut comb = GeneratorCombination::zero(self.kind);
        for (g, v) in expr {
            let k = comb.position(*g).expect("normal forms use generators only");
            comb.coefficients[k] = v.clone();
        }
        Ok(comb)
    }
}

/// Polynomial-coefficient combination of the generator basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorCombination {
    pub kind: FamilyKind,
    pub annulus: Option<AnnulusId>,
    pub basis: Vec<MonomialIndex>,
    pub coefficients: Vec<PolyQ>,
}

impl GeneratorCombination {
    pub fn zero(kind: FamilyKind) -> Self {
        let (b1, b2) = generator_basis(kind);
        let basis: Vec<MonomialIndex> = b1.iter().chain(b2).copied().collect();
        let coefficients = vec![PolyQ::zero(); basis.len()];
        GeneratorCombination { kind, annulus: None, basis, coefficients }
    }

    pub fn position(&self, idx: MonomialIndex) -> Option<usize> {
        self.basis.iter().position(|b| *b == idx)
    }

    pub fn coefficient(&self, idx: MonomialIndex) -> Option<&PolyQ> {
        self.position(idx).map(|k| &self.coefficients[k])
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| c.is_zero())
    }

    pub fn add_scaled(&mut self, other: &Self, c: &PolyQ) {
        for (a, b) in self.coefficients.iter_mut().zip(&other.coefficients) {
            *a += &(b * c);
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        for a in out.coefficients.iter_mut() {
            *a = a.scale(c);
        }
        out
    }

    /// Greek names in basis order.
    pub fn labels(&self) -> &'static [&'static str] {
        match self.kind {
            FamilyKind::ParabolicSegment => &["alpha", "beta", "gamma", "eta"],
            _ => &["alpha", "beta", "gamma", "eta", "xi", "zeta"],
        }
    }

    /// Floating-point coefficient polynomials for fast repeated evaluation.
    pub fn numeric<T: Real>(&self) -> NumericCombination<T> {
        NumericCombination {
            coefficients: self
                .coefficients
                .iter()
                .map(|p| p.coeffs().iter().map(T::of_rational).collect())
                .collect(),
        }
    }

    pub fn evaluate<T: Real>(&self, gv: &GeneratorVector<T>) -> T {
        self.numeric().evaluate(gv)
    }
}

/// [`GeneratorCombination`] with `Real` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericCombination<T> {
    coefficients: Vec<Vec<T>>,
}

impl<T: Real> NumericCombination<T> {
    fn poly_derivs(c: &[T], h: T, order: usize) -> Vec<T> {
        let mut out = Vec::with_capacity(order + 1);
        let mut cur: Vec<T> = c.to_vec();
        for _ in 0..=order {
            out.push(cur.iter().rev().fold(T::zero(), |acc, a| acc * h + *a));
            cur = cur.iter().enumerate().skip(1).map(|(k, a)| *a * T::of_usize(k)).collect();
        }
        out
    }

    pub fn evaluate(&self, gv: &GeneratorVector<T>) -> T {
        let vals = gv.values();
        self.coefficients
            .iter()
            .zip(vals)
            .map(|(c, g)| c.iter().rev().fold(T::zero(), |acc, a| acc * gv.h + *a) * g)
            .sum()
    }

    /// Derivatives `0..jets.len()` of the combination, given generator
    /// vectors holding the matching derivatives of the generators.
    pub fn evaluate_derivatives(&self, jets: &[GeneratorVector<T>]) -> Vec<T> {
        let order = jets.len() - 1;
        let h = jets[0].h;
        let gvals: Vec<Vec<T>> = jets.iter().map(|g| g.values()).collect();
        let mut out = vec![T::zero(); order + 1];
        for (k, c) in self.coefficients.iter().enumerate() {
            let cd = Self::poly_derivs(c, h, order);
            for (d, o) in out.iter_mut().enumerate() {
                let mut binom = T::one();
                for m in 0..=d {
                    *o += binom * cd[m] * gvals[d - m][k];
                    binom = binom * T::of_usize(d - m) / T::of_usize(m + 1);
                }
            }
        }
        out
    }
}

pub fn reduce_monomial(case: &FamilyCase, idx: MonomialIndex) -> Result<GeneratorCombination, ReductionError> {
    if idx.degree() > MAX_INDEX_DEGREE {
        return Err(ReductionError::UnsupportedIndex(idx, case.kind().name()));
    }
    ReductionTable::shared(case, table_degree(idx.degree())).reduce(idx)
}

/// Tables come in a few sizes so that small requests stay cheap.
fn table_degree(d: usize) -> usize {
    if d <= 6 {
        6
    } else if d <= 9 {
        9
    } else {
        MAX_INDEX_DEGREE
    }
}

/// Exact `M(h)` over the generators.
pub fn melnikov_symbolic(case: &FamilyCase, annulus: AnnulusId, pert: &PerturbationSpec) -> Result<GeneratorCombination, ReductionError> {
    let rho = pert.rho();
    let top = rho.keys().map(|(i, j)| i + j).max().unwrap_or(0);
    if top > MAX_INDEX_DEGREE {
        let (i, j) = *rho.keys().find(|(i, j)| i + j == top).expect("max exists");
        return Err(ReductionError::UnsupportedIndex(MonomialIndex::new(i, j), case.kind().name()));
    }
    let table = ReductionTable::shared(case, table_degree(top));
    let mut comb = GeneratorCombination::zero(case.kind());
    for (&(i, j), r) in &rho {
        let part = table.reduce(MonomialIndex::new(i, j))?;
        comb.add_scaled(&part, &PolyQ::constant(r.clone()));
    }
    comb.annulus = Some(annulus);
    Ok(comb)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeEntry {
    pub label: &'static str,
    pub generator: MonomialIndex,
    pub degree: isize,
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeReport {
    pub n: usize,
    pub entries: Vec<DegreeEntry>,
    pub pass: bool,
}

/// Degree ceilings of the coefficient of each generator, in basis order.
pub fn degree_bounds(kind: FamilyKind, n: usize) -> Vec<i64> {
    let n = n as i64;
    let f = |k: i64| floor_div(n - k, 3);
    match kind {
        FamilyKind::ParabolicSegment => {
            let h2 = floor_div(n, 2);
            vec![h2, h2 - 1, h2, f(2)]
        }
        _ => vec![f(0), f(1), f(2), f(1), f(2), f(3)],
    }
}

pub fn verify_degrees(comb: &GeneratorCombination, n: usize) -> DegreeReport {
    let bounds = degree_bounds(comb.kind, n);
    let entries: Vec<DegreeEntry> = comb
        .basis
        .iter()
        .zip(&comb.coefficients)
        .zip(bounds)
        .zip(comb.labels())
        .map(|(((g, c), bound), label)| DegreeEntry { label, generator: *g, degree: c.degree(), bound })
        .collect();
    let pass = entries.iter().all(|e| e.degree as i64 <= e.bound);
    DegreeReport { n, entries, pass }
}

/// Identities checked numerically by [`recurrence_residual`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Recurrence {
    /// `H = h` times `x^i y^j dx`, any family.
    Level,
    /// `H_x + H_y y' = 0` times `x^i y^j dx`, any family.
    Gradient,
    /// Lowers `j` by two (segment families).
    SegmentLowerY,
    /// Lowers `i` (segment families).
    SegmentLowerX,
    /// The `i = 0` column (segment families).
    SegmentAxis,
    /// `J` in terms of `J'` (segment families).
    SegmentDerivative,
    ParabolicGradient,
    ParabolicLevel,
    /// `j = 0` row.
    ParabolicAxisEven,
    /// `j = 1` row.
    ParabolicAxisOdd,
    /// `j = 2i + 2` diagonal.
    ParabolicDiagonal,
}

impl Recurrence {
    pub const ALL: [Recurrence; 11] = [
        Recurrence::Level,
        Recurrence::Gradient,
        Recurrence::SegmentLowerY,
        Recurrence::SegmentLowerX,
        Recurrence::SegmentAxis,
        Recurrence::SegmentDerivative,
        Recurrence::ParabolicGradient,
        Recurrence::ParabolicLevel,
        Recurrence::ParabolicAxisEven,
        Recurrence::ParabolicAxisOdd,
        Recurrence::ParabolicDiagonal,
    ];

    /// Whether `idx` is an index of the identity (which may fix one coordinate).
    pub fn admits(self, idx: MonomialIndex) -> bool {
        use Recurrence::*;
        let (i, j) = (idx.i, idx.j);
        match self {
            Level | Gradient | SegmentLowerX | SegmentDerivative | ParabolicLevel => true,
            SegmentLowerY | ParabolicGradient => j >= 2,
            SegmentAxis => i == 0 && j >= 2,
            ParabolicAxisEven => j == 0,
            ParabolicAxisOdd => j == 1,
            ParabolicDiagonal => j == 2 * i + 2,
        }
    }

    pub fn applies_to(self, kind: FamilyKind) -> bool {
        use Recurrence::*;
        match self {
            Level | Gradient => true,
            SegmentLowerY | SegmentLowerX | SegmentAxis | SegmentDerivative => {
                matches!(kind, FamilyKind::EllipticSegment | FamilyKind::HyperbolicSegment)
            }
            _ => kind == FamilyKind::ParabolicSegment,
        }
    }
}

/// One term `coef · J^{(d)}_{i,j}` of an identity.
struct Term {
    coef: Rational,
    h_power: u32,
    i: i64,
    j: i64,
    derivative: bool,
}

fn t(coef: Rational, h_power: u32, i: i64, j: i64) -> Term {
    Term { coef, h_power, i, j, derivative: false }
}

fn identity_terms(case: &FamilyCase, which: Recurrence, i: i64, j: i64) -> Vec<Term> {
    use Recurrence::*;
    let l = case.lambda().cloned().unwrap_or_else(Rational::zero);
    let one = Rational::one();
    match which {
        Level => {
            let mut v = Vec::new();
            for (k, a) in case.a_poly().coeffs().iter().enumerate() {
                v.push(t(a.clone(), 0, i + k as i64, j));
            }
            for (k, c) in case.c_poly().coeffs().iter().enumerate() {
                v.push(t(c.clone(), 0, i + k as i64, j + 2));
            }
            v.push(t(-one, 1, i, j));
            v
        }
        Gradient => {
            let mut v = Vec::new();
            for (k, a) in case.a_poly().coeffs().iter().enumerate().skip(1) {
                v.push(t(a * int(k as i64), 0, i + k as i64 - 1, j));
            }
            for (k, c) in case.c_poly().coeffs().iter().enumerate() {
                let kk = k as i64;
                let coef = c * int(kk) - rat(2, j + 2) * c * int(i + kk);
                if !coef.is_zero() {
                    v.push(t(coef, 0, i + kk - 1, j + 2));
                }
            }
            v
        }
        SegmentLowerY => vec![
            t(rat(2 * i + 2 * j + 2, j), 0, i, j),
            t(int(-3), 1, i - 1, j - 2),
            t(int(-3) * (&l - &one), 0, i + 1, j - 2),
            t(int(6) * (&l - int(2)), 0, i, j - 2),
        ],
        SegmentLowerX => vec![
            t(rat(2 * i + 2 * j + 2, j + 2) * &l, 0, i, j),
            t(-rat(2 * i - j - 4, j + 2), 1, i - 3, j),
            t(-(int(3) * (&l - &one) * rat(2 * i + j, j + 2)), 0, i - 1, j),
            t(int(3) * (&l - int(2)) * rat(2 * i - 2, j + 2), 0, i - 2, j),
        ],
        SegmentAxis => vec![
            t(rat(j - 2, j), 0, 0, j),
            t(int(-6) * (&l - &one), 0, 1, j - 2),
            t(int(3) * (&l - int(2)), 0, 0, j - 2),
            t(int(3) * &l, 0, 2, j - 2),
        ],
        SegmentDerivative => {
            let d = |coef: Rational, hp: u32, i: i64, j: i64| Term { coef, h_power: hp, i, j, derivative: true };
            vec![
                t(int(i + j + 1), 0, i, j),
                d(int(-3), 1, i, j),
                d(int(-3) * (&l - &one), 0, i + 2, j),
                d(int(6) * (&l - int(2)), 0, i + 1, j),
            ]
        }
        ParabolicGradient => vec![
            t(rat(j - 2 * i - 2, j), 0, i, j),
            t(int(-2), 0, i, j - 2),
            t(int(1), 0, i + 1, j - 2),
        ],
        ParabolicLevel => vec![
            t(int(1), 0, i, j),
            t(int(-1), 1, i - 1, j - 2),
            t(int(-2), 0, i, j - 2),
            t(rat(1, 2), 0, i + 1, j - 2),
        ],
        ParabolicAxisEven => vec![
            t(int(i + 1), 0, i, 0),
            t(int(-4 * i), 0, i - 1, 0),
            t(int(-2 * (i - 1)), 1, i - 2, 0),
        ],
        ParabolicAxisOdd => vec![
            t(rat(3, 2) + int(i), 0, i, 1),
            t(int(-4 * i), 0, i - 1, 1),
            t(int(3 - 2 * i), 1, i - 2, 1),
        ],
        ParabolicDiagonal => vec![
            t(int(1), 0, i, 2 * i + 2),
            t(int(-1), 1, i - 1, 2 * i),
            t(int(-2), 0, i, 2 * i),
            t(rat(1, 2), 0, i + 1, 2 * i),
        ],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub residual: f64,
    /// Sum of the absolute values of all terms.
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

/// `|LHS − RHS|` of an identity with all integrals from quadrature.
pub fn recurrence_residual<T: Real>(
    quad: &Quadrature<T>,
    h: T,
    idx: MonomialIndex,
    which: Recurrence,
) -> Result<Residual, ReductionError> {
    let kind = quad.case().kind();
    if !which.applies_to(kind) {
        return Err(ReductionError::WrongFamily(kind.name()));
    }
    if !which.admits(idx) {
        return Err(ReductionError::OffIdentity(idx));
    }
    let terms = identity_terms(quad.case(), which, idx.i as i64, idx.j as i64);
    let mut plain = Vec::new();
    let mut derived = Vec::new();
    for term in terms.iter().filter(|t| !t.coef.is_zero()) {
        if term.i < 0 || term.j < 0 {
            return Err(ReductionError::NegativeIndex);
        }
        let m = MonomialIndex::new(term.i as usize, term.j as usize);
        if term.derivative {
            derived.push(m);
        } else {
            plain.push(m);
        }
    }
    let ctx = quad.context(h)?;
    let pv = ctx.integrals(&plain)?;
    let dv = if derived.is_empty() { Vec::new() } else { ctx.derivatives(&derived)? };
    let (mut pk, mut dk) = (0, 0);
    let mut sum = T::zero();
    let mut scale = T::zero();
    for term in terms.iter().filter(|t| !t.coef.is_zero()) {
        let v = if term.derivative {
            dk += 1;
            dv[dk - 1]
        } else {
            pk += 1;
            pv[pk - 1]
        };
        let x = T::of_rational(&term.coef) * h.powi(term.h_power as i32) * v;
        sum += x;
        scale += x.abs();
    }
    Ok(Residual { residual: sum.abs().to_f64(), scale: scale.to_f64() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[Rational]) -> PolyQ {
        PolyQ::new(c.to_vec())
    }

    #[test]
    fn generators_reduce_to_themselves() {
        let case = FamilyCase::triangle();
        let c = reduce_monomial(&case, MonomialIndex::new(2, 1)).unwrap();
        assert_eq!(c.coefficient(MonomialIndex::new(2, 1)), Some(&PolyQ::one()));
        assert_eq!(c.coefficients.iter().filter(|p| !p.is_zero()).count(), 1);
    }

    #[test]
    fn elliptic_seeds() {
        let l = rat(1, 2);
        let case = FamilyCase::elliptic(l.clone()).unwrap();
        let j12 = reduce_monomial(&case, MonomialIndex::new(1, 2)).unwrap();
        let c00 = poly(&[-rat(3, 4) * &l + rat(9, 4) - rat(3, 2) / &l, rat(3, 4)]);
        assert_eq!(j12.coefficient(MonomialIndex::new(0, 0)), Some(&c00));
        assert_eq!(j12.coefficient(MonomialIndex::new(1, 0)), Some(&PolyQ::constant(rat(3, 2) / &l)));
        let j03 = reduce_monomial(&case, MonomialIndex::new(0, 3)).unwrap();
        assert_eq!(j03.coefficient(MonomialIndex::new(1, 1)), Some(&PolyQ::constant(int(18) * (&l - int(1)))));
        assert_eq!(j03.coefficient(MonomialIndex::new(0, 1)), Some(&PolyQ::constant(int(-9) * (&l - int(2)))));
        assert_eq!(j03.coefficient(MonomialIndex::new(2, 1)), Some(&PolyQ::constant(int(-9) * &l)));
    }

    #[test]
    fn parabolic_table() {
        let case = FamilyCase::parabolic();
        let j00 = reduce_monomial(&case, MonomialIndex::new(0, 0)).unwrap();
        assert_eq!(j00.coefficient(MonomialIndex::new(1, 0)), Some(&PolyQ::constant(rat(1, 2))));
        let j21 = reduce_monomial(&case, MonomialIndex::new(2, 1)).unwrap();
        assert_eq!(j21.coefficient(MonomialIndex::new(1, 1)), Some(&PolyQ::constant(rat(16, 7))));
        assert_eq!(j21.coefficient(MonomialIndex::new(0, 1)), Some(&poly(&[int(0), rat(2, 7)])));
    }

    #[test]
    fn all_low_monomials_resolve() {
        for case in [FamilyCase::elliptic(int(1)).unwrap(), FamilyCase::parabolic(), FamilyCase::triangle()] {
            let table = ReductionTable::build(&case, 9);
            assert!(table.generator_relations().is_empty());
            for d in 0..=9 {
                for i in 0..=d {
                    table.reduce(MonomialIndex::new(i, d - i)).unwrap();
                }
            }
        }
    }

    #[test]
    fn degree_bounds_for_small_n() {
        assert_eq!(degree_bounds(FamilyKind::EllipticSegment, 3), vec![1, 0, 0, 0, 0, 0]);
        assert_eq!(degree_bounds(FamilyKind::ParabolicSegment, 2), vec![1, 0, 1, 0]);
        let z = GeneratorCombination::zero(FamilyKind::HamiltonianTriangle);
        let r = verify_degrees(&z, 3);
        assert!(r.pass && r.entries.iter().all(|e| e.degree == -1));
    }
}
