use super::{Poly, PolyError};
use crate::mathcore::{is_prime, mod_inverse};
use crate::scalar::Scalar;
use crate::{FieldPoly, IntPoly};

/// `GF(char)[x] / (F(x))`, with `F` already reduced coefficient-wise.
///
/// Elements are dense residue vectors of length `degree(F)`. Reduction uses
/// the monic associate of `F`, which generates the same ideal because the
/// leading coefficient is a unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientRing {
    modulus: FieldPoly,
    char: u64,
    /// Low coefficients of the monic modulus, negated: `x^d = sum tail[j] x^j`.
    tail: Vec<u64>,
}

impl QuotientRing {
    pub fn new(modulus: FieldPoly, char: u64) -> Result<Self, PolyError> {
        if !is_prime(&char) {
            return Err(PolyError::NotPrime(char));
        }
        let modulus = Poly::new(modulus.coeffs().iter().map(|c| c % char).collect());
        let degree = match modulus.degree() {
            Some(d) if d >= 1 => d,
            _ => {
                return Err(PolyError::InvalidRing(format!(
                    "modulus {modulus} has degree < 1 over GF({char})"
                )))
            }
        };
        let lead = *modulus.leading().expect("nonzero modulus");
        let inv = mod_inverse(&lead, &char).expect("nonzero residue mod a prime is a unit");
        let tail = modulus.coeffs()[..degree]
            .iter()
            .map(|c| (char - c.mul_mod(&inv, &char)) % char)
            .collect();
        Ok(QuotientRing { modulus, char, tail })
    }

    /// Ring of an integer sum polynomial reduced modulo `char`.
    pub fn from_sum(sum: &IntPoly, char: u64) -> Result<Self, PolyError> {
        QuotientRing::new(sum.reduce_mod(char), char)
    }

    pub fn modulus(&self) -> &FieldPoly {
        &self.modulus
    }

    pub fn characteristic(&self) -> u64 {
        self.char
    }

    pub fn degree(&self) -> usize {
        self.tail.len()
    }

    /// `char^degree - 1`, saturating: the size of the largest possible unit group.
    pub fn unit_bound(&self) -> u64 {
        let mut acc: u64 = 1;
        for _ in 0..self.degree() {
            acc = acc.saturating_mul(self.char);
        }
        acc.saturating_sub(1)
    }

    fn add_scaled(&self, acc: &mut [u64], offset: usize, scale: u64) {
        for (j, t) in self.tail.iter().enumerate() {
            acc[offset + j] = (acc[offset + j] + scale.mul_mod(t, &self.char)) % self.char;
        }
    }

    /// Reduces a dense vector of any length to a residue vector.
    fn reduce(&self, mut v: Vec<u64>) -> Vec<u64> {
        let d = self.degree();
        while v.len() > d {
            let top = v.pop().expect("len > d >= 1");
            if top != 0 {
                let offset = v.len() - d;
                self.add_scaled(&mut v, offset, top);
            }
        }
        v.resize(d, 0);
        v
    }

    fn dense(&self, a: &FieldPoly) -> Vec<u64> {
        self.reduce(a.coeffs().iter().map(|c| c % self.char).collect())
    }

    fn mul_dense(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x.mul_mod(y, &self.char)) % self.char;
            }
        }
        self.reduce(out)
    }

    /// In-place multiplication by `x`.
    fn mul_x(&self, v: &mut Vec<u64>) {
        let top = v.pop().expect("residue vector is non-empty");
        v.insert(0, 0);
        if top != 0 {
            self.add_scaled(v, 0, top);
        }
    }

    pub fn ring_mul(&self, a: &FieldPoly, b: &FieldPoly) -> FieldPoly {
        Poly::new(self.mul_dense(&self.dense(a), &self.dense(b)))
    }

    /// `x^e` reduced modulo `(F, char)` by square-and-multiply.
    pub fn ring_pow_x<E: Scalar>(&self, e: &E) -> FieldPoly {
        let two = E::two();
        let mut result = self.dense(&Poly::constant(1));
        let mut base = self.dense(&Poly::new(vec![0, 1]));
        let mut e = e.clone();
        while !e.is_zero() {
            if e.is_odd() {
                result = self.mul_dense(&result, &base);
            }
            e = e / two.clone();
            if !e.is_zero() {
                base = self.mul_dense(&base, &base);
            }
        }
        Poly::new(result)
    }

    /// Smallest `r` in `[1, bound]` with `x^r = h`, scanning a running power.
    pub fn solve_x_dlog(&self, h: u64, bound: u64) -> Result<u64, PolyError> {
        let no_solution = PolyError::NoSolution { h, bound };
        if h == 0 || h >= self.char {
            return Err(no_solution);
        }
        let mut power = self.dense(&Poly::constant(1));
        for r in 1..=bound {
            self.mul_x(&mut power);
            if power[0] == h && power[1..].iter().all(|c| *c == 0) {
                return Ok(r);
            }
        }
        Err(no_solution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(coeffs: &[u64], p: u64) -> QuotientRing {
        QuotientRing::new(Poly::new(coeffs.to_vec()), p).unwrap()
    }

    #[test]
    fn pow_examples() {
        // x^2 + x + 1 over GF(2): x^3 = 1
        assert_eq!(ring(&[1, 1, 1], 2).ring_pow_x(&3u64), Poly::constant(1));
        assert_eq!(ring(&[1, 1, 1], 2).ring_pow_x(&0u64), Poly::constant(1));
        // x^2 + 1 over GF(3): x^2 = -1 = 2
        assert_eq!(ring(&[1, 0, 1], 3).ring_pow_x(&2u64), Poly::constant(2));
        assert_eq!(ring(&[1, 0, 1], 3).ring_pow_x(&1u64), Poly::new(vec![0, 1]));
    }

    #[test]
    fn dlog_examples() {
        assert_eq!(ring(&[1, 0, 1], 3).solve_x_dlog(2, 10), Ok(2));
        assert_eq!(ring(&[1, 0, 1], 3).solve_x_dlog(1, 10), Ok(4));
        assert_eq!(ring(&[1, 1, 1], 2).solve_x_dlog(1, 10), Ok(3));
        assert_eq!(
            ring(&[1, 0, 1], 3).solve_x_dlog(0, 10),
            Err(PolyError::NoSolution { h: 0, bound: 10 })
        );
        // x is a zero divisor when F(0) = 0, so no power is a unit
        assert!(ring(&[0, 1, 1], 5).solve_x_dlog(1, 1000).is_err());
    }

    #[test]
    fn non_monic_modulus_is_normalised() {
        // 2x^2 + 2 over GF(3) generates the same ideal as x^2 + 1
        let r = ring(&[2, 0, 2], 3);
        assert_eq!(r.ring_pow_x(&2u64), Poly::constant(2));
        assert_eq!(r.modulus(), &Poly::new(vec![2, 0, 2]));
    }

    #[test]
    fn invalid_rings_are_rejected() {
        assert!(matches!(
            QuotientRing::new(Poly::new(vec![1, 0, 4]), 4),
            Err(PolyError::NotPrime(4))
        ));
        assert!(matches!(
            QuotientRing::new(Poly::new(vec![1, 0, 3]), 3),
            Err(PolyError::InvalidRing(_))
        ));
    }

    #[test]
    fn linear_modulus_collapses_to_field() {
        // 3x + 1 over GF(7): x = -1/3 = 2
        let r = ring(&[1, 3], 7);
        assert_eq!(r.ring_pow_x(&1u64), Poly::constant(2));
        assert_eq!(r.ring_pow_x(&3u64), Poly::constant(1));
        assert_eq!(r.unit_bound(), 6);
    }

    #[test]
    fn mul_matches_schoolbook_then_reduce() {
        let r = ring(&[3, 1, 4, 1], 5);
        let a = Poly::new(vec![1, 2, 3]);
        let b = Poly::new(vec![4, 0, 1]);
        // brute force: reduce (a*b) by long division over GF(5) with monic x^3 + 4x^2 + x + 3
        let prod = &a * &b;
        let mut v: Vec<i64> = prod.coeffs().iter().map(|c| *c as i64).collect();
        let m = [3i64, 1, 4, 1];
        while v.len() > 3 {
            let top = v.pop().unwrap();
            let off = v.len() - 3;
            for j in 0..3 {
                v[off + j] = (v[off + j] - top * m[j]).rem_euclid(5);
            }
        }
        let expected = Poly::new(v.iter().map(|c| c.rem_euclid(5) as u64).collect());
        assert_eq!(r.ring_mul(&a, &b), expected);
    }
}
