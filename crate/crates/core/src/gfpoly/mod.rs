//! Polynomials, prime-field share construction and quotient-ring arithmetic.

mod field;
mod ring;

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::FieldPoly;

pub use field::{generate_share_polynomial, is_primitive_element, primitive_elements, PrimitiveSampler};
pub use ring::QuotientRing;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("GF({0}) has no primitive elements besides 1 to draw from")]
    DegenerateField(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("share polynomials need degree at least 1")]
    InvalidDegree,
    #[error("invalid quotient ring: {0}")]
    InvalidRing(String),
    #[error("X^r never equals {h} for r in [1, {bound}]")]
    NoSolution { h: u64, bound: u64 },
}

/// Dense polynomial, `coeffs[j]` holding the coefficient of `x^j`.
///
/// Always canonical: no trailing zeros, and the zero polynomial is empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Zero + Clone> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^j`, zero past the degree.
    pub fn coeff(&self, j: usize) -> T {
        self.coeffs.get(j).cloned().unwrap_or_else(T::zero)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    /// Replaces the coefficient of `x^j`, extending with zeros as needed.
    pub fn with_coeff(&self, j: usize, value: T) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.len() <= j {
            coeffs.resize(j + 1, T::zero());
        }
        coeffs[j] = value;
        Poly::new(coeffs)
    }
}

impl<T: Scalar> Poly<T> {
    /// Coefficient-wise reduction into `GF(p)`.
    pub fn reduce_mod(&self, p: u64) -> FieldPoly {
        let modulus = T::lift(p);
        Poly::new(
            self.coeffs
                .iter()
                .map(|c| c.mod_floor(&modulus).to_u64().expect("residue fits u64"))
                .collect(),
        )
    }

    /// Exact substitution `f(x^k)`.
    pub fn compose_power(&self, k: usize) -> Self {
        let mut coeffs = Vec::new();
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let idx = j * k;
            if coeffs.len() <= idx {
                coeffs.resize(idx + 1, T::zero());
            }
            coeffs[idx] = c.clone();
        }
        Poly::new(coeffs)
    }

    /// Exact `f^e` by square-and-multiply.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut result = Poly::constant(T::one());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }
}

impl<T: Zero + Clone + Add<Output = T>> Add for &Poly<T> {
    type Output = Poly<T>;

    fn add(self, rhs: &Poly<T>) -> Poly<T> {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..len)
                .map(|j| self.coeff(j) + rhs.coeff(j))
                .collect(),
        )
    }
}

impl<T: Zero + Clone + Add<Output = T> + Mul<Output = T>> Mul for &Poly<T> {
    type Output = Poly<T>;

    fn mul(self, rhs: &Poly<T>) -> Poly<T> {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Poly::new(out)
    }
}

/// Renders highest degree first, e.g. `(56)X^3 + (50)X^2 + (87)X^1 + (20)X^0`.
impl<T: fmt::Display + Zero + Clone> fmt::Display for Poly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("(0)X^0");
        }
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if j + 1 != self.coeffs.len() {
                f.write_str(" + ")?;
            }
            write!(f, "({c})X^{j}")?;
        }
        Ok(())
    }
}

/// Serialized as the coefficient list, lowest degree first, each a decimal string.
impl<T: fmt::Display> Serialize for Poly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::dec::seq::serialize(&self.coeffs, s)
    }
}

impl<'de, T> Deserialize<'de> for Poly<T>
where
    T: FromStr + Zero + Clone,
    T::Err: fmt::Display,
{
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        crate::dec::seq::deserialize(d).map(Poly::new)
    }
}

/// Exact coefficient-wise sum, shorter polynomials padded with zeros.
/// No modular reduction is applied.
pub fn poly_sum_int<T: Zero + Clone + Add<Output = T>>(polys: &[Poly<T>]) -> Poly<T> {
    polys.iter().fold(Poly::zero(), |acc, p| &acc + p)
}

/// Checks `f(x^p) = f(x)^p` over `GF(p)` by expanding both sides exactly and
/// reducing the coefficients afterwards. Any modulus `>= 2` is accepted so
/// composite moduli can be probed for counterexamples.
pub fn frobenius_check<T: Scalar>(f: &Poly<T>, p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let exact: Poly<BigUint> = Poly::new(f.coeffs().iter().map(Scalar::to_big).collect());
    let lhs = exact.compose_power(p as usize).reduce_mod(p);
    let rhs = exact.pow(p).reduce_mod(p);
    lhs == rhs
}
