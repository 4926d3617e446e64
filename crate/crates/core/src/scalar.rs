//! Unsigned integer types that the number-theory routines are generic over.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{FromPrimitive, ToPrimitive};

/// An unsigned integer usable as a residue, modulus or exponent.
///
/// Implemented for the machine widths used by key material and field
/// arithmetic and for [`BigUint`], which carries the exact blinded values.
pub trait Scalar:
    Integer + Clone + Debug + Display + Hash + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// `self * rhs mod modulus` without intermediate overflow.
    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self;

    /// Exact conversion into an unbounded integer.
    fn to_big(&self) -> BigUint;

    /// Lifts a small constant into the type.
    fn lift(v: u64) -> Self {
        <Self as FromPrimitive>::from_u64(v).expect("constant does not fit scalar type")
    }

    fn two() -> Self {
        Self::lift(2)
    }
}

impl Scalar for u32 {
    #[inline]
    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        ((*self as u64 * *rhs as u64) % *modulus as u64) as u32
    }

    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Scalar for u64 {
    #[inline]
    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        ((*self as u128 * *rhs as u128) % *modulus as u128) as u64
    }

    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Scalar for BigUint {
    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        (self * rhs) % modulus
    }

    fn to_big(&self) -> BigUint {
        self.clone()
    }
}
