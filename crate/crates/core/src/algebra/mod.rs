//! Exact algebra: polynomials and rational functions in `h`, Sturm counting,
//! small dense matrices and exact nullspaces.

pub mod matrix;
pub mod poly;
pub mod ratfun;
pub mod sturm;

pub use matrix::{bareiss_echelon, integer_normalize, nullspace, rank, Mat, Ring};
pub use poly::Poly;
pub use ratfun::RatFun;
pub use sturm::{sturm_count, sturm_sequence, SturmError};
