//! Picard-Fuchs matrices derived from the reduction tables.
//!
//! Differentiating `J_{i,j}` with `∂y/∂h = 1/(2Cy)` and integrating by parts
//! gives `J_{i,j} = 2/(j+2) Σ_k C_k J'_{i+k,j+2}`. Writing each right-hand
//! monomial in normal form `Σ p_g(h) G` and differentiating,
//! `G = M1(h) G' + M0(h) G`, hence `G = (I − M0)⁻¹ M1 G'`.

use num_traits::Zero;

use crate::family::FamilyCase;
use crate::quadrature::{generator_basis, MonomialIndex};
use crate::reduction::{ReductionError, ReductionTable};
use crate::scalar::rat;
use crate::{PolyMatQ, PolyQ};

/// `(P1, P2)` with `U_k = P_k(h) U_k'`, as polynomial matrices.
pub fn derive_pf_matrices(case: &FamilyCase) -> Result<(PolyMatQ, PolyMatQ), ReductionError> {
    let table = ReductionTable::shared(case, 6);
    let (b1, b2) = generator_basis(case.kind());
    let c = case.c_poly();
    let mut out = Vec::new();
    for group in [b1, b2] {
        let n = group.len();
        let mut m1 = PolyMatQ::zeros(n, n);
        let mut m0 = PolyMatQ::zeros(n, n);
        for (r, g) in group.iter().enumerate() {
            for (k, ck) in c.coeffs().iter().enumerate() {
                if ck.is_zero() {
                    continue;
                }
                let coef = rat(2, g.j as i64 + 2) * ck;
                let comb = table.reduce(MonomialIndex::new(g.i + k, g.j + 2))?;
                for (basis_idx, p) in comb.basis.iter().zip(&comb.coefficients) {
                    if p.is_zero() {
                        continue;
                    }
                    let col = group
                        .iter()
                        .position(|x| x == basis_idx)
                        .expect("derivative identity stays inside its generator group");
                    m1[(r, col)] = m1[(r, col)].clone() + p.scale(&coef);
                    m0[(r, col)] = m0[(r, col)].clone() + p.derivative().scale(&coef);
                }
            }
        }
        let lhs = PolyMatQ::identity(n).sub_mat(&m0);
        let det = lhs.det();
        let num = lhs.adjugate().mul_mat(&m1);
        let p = num.map(|e| e.div_exact(&det).expect("Picard-Fuchs matrix is polynomial"));
        out.push(p);
    }
    let p2 = out.pop().expect("two groups");
    let p1 = out.pop().expect("two groups");
    Ok((p1, p2))
}

/// Splits a polynomial matrix of degree ≤ 1 into `(B, C)`.
pub fn split_linear(p: &PolyMatQ) -> Option<(crate::MatQ, crate::MatQ)> {
    if (0..p.rows()).any(|i| (0..p.cols()).any(|j| p[(i, j)].degree() > 1)) {
        return None;
    }
    Some((p.map(|e| e.coeff(1)), p.map(|e| e.coeff(0))))
}

/// `B h + C` as a polynomial matrix.
pub fn linear_matrix(b: &crate::MatQ, c: &crate::MatQ) -> PolyMatQ {
    let mut out = PolyMatQ::zeros(b.rows(), b.cols());
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            out[(i, j)] = PolyQ::new(vec![c[(i, j)].clone(), b[(i, j)].clone()]);
        }
    }
    out
}

