//! Exact coefficient tables `(B, C)` with `U = (B h + C) U'`.
//!
//! The segment tables are rational in λ. Every entry was checked against the
//! symbolic derivation in [`super::derive`] and against quadrature.

use crate::scalar::{int, rat};
use crate::{MatQ, Rational};

fn m(rows: Vec<Vec<Rational>>) -> MatQ {
    MatQ::from_rows(rows)
}

/// Segment families, first system on `(J00, J10, J02)`.
pub(crate) fn segment_first(l: &Rational) -> (MatQ, MatQ) {
    let l2 = l * l;
    let l3 = &l2 * l;
    let l4 = &l3 * l;
    let z = int(0);
    let b = m(vec![
        vec![int(3), z.clone(), z.clone()],
        vec![rat(3, 2) * (l - int(1)) / l, rat(3, 2), z.clone()],
        vec![rat(-3, 2) * (int(3) * &l2 - int(6) * l - int(1)) / l, rat(3, 2) * (l - int(1)), int(1)],
    ]);
    let c = m(vec![
        vec![int(3) * (-&l2 + int(3) * l - int(2)) / l, int(6) / l, z.clone()],
        vec![
            rat(3, 2) * (-&l3 + int(4) * &l2 - int(7) * l + int(6)) / &l2,
            rat(3, 2) * (-&l3 + int(3) * &l2 + int(4) * l - int(6)) / &l2,
            z.clone(),
        ],
        vec![
            rat(-3, 2) * (int(-3) * &l4 + int(15) * &l3 - int(21) * &l2 + int(3) * l + int(6)) / &l2,
            rat(3, 2) * (-&l4 + int(4) * &l3 - int(7) * &l2 + int(6) * l + int(6)) / &l2,
            z,
        ],
    ]);
    (b, c)
}

/// Segment families, second system on `(J01, J11, J21)`.
pub(crate) fn segment_second(l: &Rational) -> (MatQ, MatQ) {
    let l2 = l * l;
    let l3 = &l2 * l;
    let z = int(0);
    let b = m(vec![
        vec![rat(3, 2), z.clone(), z.clone()],
        vec![(l - int(1)) / (int(4) * l), int(1), z.clone()],
        vec![rat(3, 32) * (&l2 - int(2) * l + int(5)) / &l2, rat(3, 8) * (l - int(1)) / l, rat(3, 4)],
    ]);
    let c = m(vec![
        vec![z.clone(), int(-3) * (l - int(2)), rat(3, 2) * (l - int(1))],
        vec![
            z.clone(),
            (int(-3) * &l2 + int(9) * l - int(6)) / (int(2) * l),
            (&l2 - int(2) * l + int(9)) / (int(4) * l),
        ],
        vec![
            z,
            rat(3, 16) * (int(-3) * &l3 + int(12) * &l2 - int(27) * l + int(30)) / &l2,
            rat(3, 32) * (int(-7) * &l3 + int(21) * &l2 + int(31) * l - int(45)) / &l2,
        ],
    ]);
    (b, c)
}

/// Parabolic family on `(J01, J11)`.
pub(crate) fn parabolic_first() -> (MatQ, MatQ) {
    let b = m(vec![vec![rat(4, 3), int(0)], vec![rat(8, 15), rat(4, 5)]]);
    let c = m(vec![vec![int(0), rat(4, 3)], vec![int(0), rat(32, 15)]]);
    (b, c)
}

/// Parabolic family on `(J10, J02)`.
pub(crate) fn parabolic_second() -> (MatQ, MatQ) {
    let b = m(vec![vec![int(2), int(0)], vec![int(1), int(1)]]);
    let c = m(vec![vec![int(4), int(0)], vec![int(2), int(0)]]);
    (b, c)
}

/// Triangle on `(J00, J10, J02)`.
pub(crate) fn triangle_first() -> (MatQ, MatQ) {
    let b = m(vec![
        vec![int(3), int(0), int(0)],
        vec![rat(3, 4), rat(3, 2), int(0)],
        vec![rat(3, 4), rat(-1, 2), int(1)],
    ]);
    let c = m(vec![
        vec![int(0), rat(-1, 2), int(0)],
        vec![int(0), rat(-3, 8), int(0)],
        vec![int(0), rat(-1, 24), rat(-1, 6)],
    ]);
    (b, c)
}

/// Triangle on `(J01, J11, J21)`.
pub(crate) fn triangle_second() -> (MatQ, MatQ) {
    let b = m(vec![
        vec![rat(3, 2), int(0), int(0)],
        vec![int(0), int(1), int(0)],
        vec![rat(3, 16), rat(1, 8), rat(3, 4)],
    ]);
    let c = m(vec![
        vec![int(0), rat(1, 4), rat(-1, 2)],
        vec![int(0), rat(-1, 6), int(0)],
        vec![int(0), rat(1, 96), rat(-3, 16)],
    ]);
    (b, c)
}
