//! Abelian integrals, Picard-Fuchs systems and first-order Melnikov functions
//! for piecewise-smooth perturbations of quadratic Hamiltonian polycycles.
//!
//! The exact layer is generic over a field scalar ([`Poly<T>`](algebra::Poly)),
//! the numerical layer over [`Real`]. Concrete aliases live here.

pub mod algebra;
pub mod family;
pub mod ode;
pub mod oval;
pub mod perturbation;
pub mod picard_fuchs;
pub mod quadrature;
pub mod reduction;
pub mod scalar;
pub mod synthesis;
pub mod zeros;

pub use family::{AnnulusId, CriticalKind, CriticalPoint, EnergyInterval, FamilyCase, FamilyKind};
pub use perturbation::PerturbationSpec;
pub use scalar::{Real, Scalar};

/// Arbitrary-precision rational.
pub type Rational = num_rational::BigRational;
/// Exact polynomial in `h`.
pub type PolyQ = algebra::Poly<Rational>;
/// Floating-point polynomial.
pub type PolyF64 = algebra::Poly<f64>;
/// Single-precision polynomial.
pub type PolyF32 = algebra::Poly<f32>;
/// Exact rational function in `h`.
pub type RatFunQ = algebra::RatFun<Rational>;
/// Exact dense matrix.
pub type MatQ = algebra::Mat<Rational>;
/// Matrix of exact polynomials.
pub type PolyMatQ = algebra::Mat<PolyQ>;
/// Oval endpoints in double precision.
pub type OvalEndpointsF64 = oval::OvalEndpoints<f64>;
/// Quadrature engine in double precision.
pub type QuadratureF64 = quadrature::Quadrature<f64>;
