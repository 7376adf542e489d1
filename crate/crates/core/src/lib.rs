//! Exact machinery for atypical intersections in algebraic tori and in
//! products of modular curves.
//!
//! The polynomial layer ([`poly`], [`groebner`]) is generic over an exact
//! [`Field`]; the geometric layers fix the coefficient field to [`Rational`].

pub mod constructible;
pub mod engine;
pub mod error;
pub mod field;
pub mod groebner;
pub mod ideal;
pub mod lattice;
pub mod laurent;
pub mod modular;
pub mod mult;
pub mod poly;
pub mod torus;
pub mod univariate;

pub use error::{Error, Result};
pub use field::{Field, Zp};
pub use groebner::Budget;
pub use poly::TermOrder;

/// Arbitrary-precision rational numbers; the scalar of every geometric object.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision integers.
pub type Integer = num_bigint::BigInt;
/// Polynomials over the rationals.
pub type Poly = poly::Polynomial<Rational>;
