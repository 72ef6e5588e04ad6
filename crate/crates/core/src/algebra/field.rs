use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{Num, Signed};

/// Coefficient field for the exact polynomial layer.
///
/// Implementors must have exact arithmetic: equality is decidable and
/// division by a nonzero element never rounds. Floating point types are
/// deliberately not implemented.
pub trait Field:
    Num + Neg<Output = Self> + Clone + PartialEq + Debug + Display + Send + Sync + 'static
{
    fn from_i64(v: i64) -> Self;

    /// Sign used only for rendering.
    fn is_negative(&self) -> bool;

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Field for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

impl Field for Rational64 {
    fn from_i64(v: i64) -> Self {
        Rational64::from_integer(v)
    }

    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}
