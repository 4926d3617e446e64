//! Threshold secure data sharing for federated clouds.
//!
//! Each cloud blinds its secret inside the constant term of a share
//! polynomial whose other coefficients are primitive elements of a prime
//! field. The clouds add their polynomials with a masked ring sum, check the
//! relayed sum with a discrete-log witness in a quotient ring, and the
//! trusted authority recovers the aggregate by subtracting escrowed blinding
//! corrections. [`simnet`] runs the whole exchange over a deterministic
//! in-process network with fault injection.
//!
//! The arithmetic layers are generic over [`Scalar`]; the aliases below fix
//! the concrete types the protocol uses.

pub mod dec;
pub mod gfpoly;
pub mod mathcore;
pub mod reference;
pub mod protocol;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod simnet;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use crate::scalar::Scalar;

/// Exact, unbounded integer used for blinded values and sums.
pub type Int = num_bigint::BigUint;
/// Integer-coefficient polynomial: share polynomials and their sums.
pub type IntPoly = gfpoly::Poly<Int>;
/// Polynomial with coefficients reduced into a small prime field.
pub type FieldPoly = gfpoly::Poly<u64>;

/// One-based identifier of a cloud in a federation, rendered as `C<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CloudId(pub u32);

impl CloudId {
    /// Zero-based position of this cloud in its scenario.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        CloudId(i as u32 + 1)
    }
}

impl fmt::Display for CloudId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}", self.0)
    }
}

impl FromStr for CloudId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('C')
            .and_then(|n| n.parse::<u32>().ok())
            .filter(|n| *n >= 1)
            .map(CloudId)
            .ok_or_else(|| format!("invalid cloud id `{s}`, expected C1, C2, ..."))
    }
}

impl Serialize for CloudId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CloudId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
