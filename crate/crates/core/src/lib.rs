//! Exact computations in the algebraic combinatorial geometry of a
//! rational function field extension `K = Q(S) ⊂ L = Q(t1..tn)`.
//!
//! The layers, bottom up:
//!
//! - [`algebra`]: polynomials, rational functions and polynomial matrices
//!   over an exact coefficient field.
//! - [`pregeometry`]: the algebraic matroid on `L`, via Jacobian rank,
//!   with a linear-algebra annihilator search as an independent oracle.
//! - [`geometry`]: points (closure classes) and flats of the geometry.
//! - [`planes`]: projective planes over `Q` and the coordinatized planes
//!   living inside the geometry.
//! - [`configurations`]: the j-map, the sets `Q`, `Q'`, `J` and the
//!   multiplication configuration, all witness-checked.
//! - [`reconstruction`]: the field interpreted inside the geometry and the
//!   recovery of a field isomorphism from a geometry isomorphism.
//! - [`logic`]: one-quantifier formulas over the closure language.
//! - [`selftest`]: seeded property families used by the CLI and the
//!   acceptance suite.

pub mod algebra;
pub mod configurations;
pub mod error;
pub mod gen;
pub mod geometry;
pub mod logic;
pub mod planes;
pub mod pregeometry;
pub mod reconstruction;
pub mod selftest;

pub use error::{Error, Result};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rationals, the coefficient field used throughout.
pub type Q = BigRational;
pub type QPoly = algebra::MPoly<Q>;
pub type QFunc = algebra::RatFunc<Q>;
pub type QMatrix = algebra::FFMatrix<Q>;
pub type QProjPoint = planes::ProjPoint<Q>;

/// Integer as an exact rational.
pub fn q(v: i64) -> Q {
    BigRational::from_integer(BigInt::from(v))
}

/// `num / den` as an exact rational. Panics if `den == 0`.
pub fn qr(num: i64, den: i64) -> Q {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
