use num_bigint::BigUint;
use rand::Rng;

use super::{Poly, PolyError};
use crate::mathcore::{factorize, is_prime, mod_pow};
use crate::IntPoly;

/// True iff `a` generates the multiplicative group of `GF(p)`.
pub fn is_primitive_element(a: u64, p: u64) -> bool {
    if p < 2 || a == 0 || a >= p || !is_prime(&p) {
        return false;
    }
    PrimitiveSampler::new(p).map(|s| s.accepts(a)).unwrap_or(false)
}

/// All primitive elements of `GF(p)` in ascending order.
pub fn primitive_elements(p: u64) -> Vec<u64> {
    match PrimitiveSampler::new(p) {
        Ok(s) => (1..p).filter(|a| s.accepts(*a)).collect(),
        Err(_) => Vec::new(),
    }
}

/// Uniform sampler over the primitive elements of a prime field.
#[derive(Debug, Clone)]
pub struct PrimitiveSampler {
    p: u64,
    /// Exponents `(p - 1) / q` for each prime `q | p - 1`.
    cofactors: Vec<u64>,
}

impl PrimitiveSampler {
    pub fn new(p: u64) -> Result<Self, PolyError> {
        if !is_prime(&p) {
            return Err(PolyError::NotPrime(p));
        }
        let order = p - 1;
        let cofactors = factorize(&order).into_iter().map(|(q, _)| order / q).collect();
        Ok(PrimitiveSampler { p, cofactors })
    }

    pub fn accepts(&self, a: u64) -> bool {
        a != 0
            && a < self.p
            && (self.p == 2 || a != 1)
            && self.cofactors.iter().all(|e| mod_pow(&a, e, &self.p) != 1)
    }

    /// Rejection sampling over `[1, p - 1]`; uniform on the accepted set.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        loop {
            let a = rng.gen_range(1..self.p);
            if self.accepts(a) {
                return a;
            }
        }
    }
}

/// Share polynomial over `GF(p)`: constant term `secret`, every other
/// coefficient up to `degree` a uniformly drawn primitive element.
pub fn generate_share_polynomial<R: Rng + ?Sized>(
    p: u64,
    degree: usize,
    secret: BigUint,
    rng: &mut R,
) -> Result<IntPoly, PolyError> {
    if p <= 3 {
        return Err(PolyError::DegenerateField(p));
    }
    if degree == 0 {
        return Err(PolyError::InvalidDegree);
    }
    let sampler = PrimitiveSampler::new(p)?;
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(secret);
    coeffs.extend((0..degree).map(|_| BigUint::from(sampler.sample(rng))));
    Ok(Poly::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn brute_order(a: u64, p: u64) -> u64 {
        let (mut x, mut k) = (a % p, 1);
        while x != 1 {
            x = x * a % p;
            k += 1;
        }
        k
    }

    #[test]
    fn primitive_element_examples() {
        assert!(is_primitive_element(3, 7));
        assert!(!is_primitive_element(2, 7));
        for p in [3u64, 5, 7, 11, 4327] {
            assert!(!is_primitive_element(1, p));
        }
        assert!(!is_primitive_element(0, 7));
        assert!(!is_primitive_element(7, 7));
        assert_eq!(primitive_elements(7), vec![3, 5]);
    }

    #[test]
    fn primitive_elements_match_order_enumeration() {
        for p in [5u64, 7, 11, 13, 101, 257] {
            let oracle: Vec<u64> = (1..p).filter(|a| brute_order(*a, p) == p - 1).collect();
            assert_eq!(primitive_elements(p), oracle, "p = {p}");
        }
    }

    #[test]
    fn share_polynomial_shape() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let f = generate_share_polynomial(7, 3, BigUint::from(2u32), &mut rng).unwrap();
        assert_eq!(f.degree(), Some(3));
        assert_eq!(f.coeff(0), BigUint::from(2u32));
        for j in 1..=3 {
            let c = f.coeff(j);
            assert!(c == BigUint::from(3u32) || c == BigUint::from(5u32), "{c}");
        }

        let f = generate_share_polynomial(4327, 3, BigUint::from(0u32), &mut rng).unwrap();
        assert_eq!(f.coeff(0), BigUint::from(0u32));
        assert_eq!(f.degree(), Some(3));
    }

    #[test]
    fn share_polynomial_rejects_degenerate_input() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let one = BigUint::from(1u32);
        assert_eq!(
            generate_share_polynomial(3, 2, one.clone(), &mut rng),
            Err(PolyError::DegenerateField(3))
        );
        assert_eq!(
            generate_share_polynomial(9, 2, one.clone(), &mut rng),
            Err(PolyError::NotPrime(9))
        );
        assert_eq!(
            generate_share_polynomial(7, 0, one, &mut rng),
            Err(PolyError::InvalidDegree)
        );
    }

    #[test]
    fn sampler_hits_every_primitive_element() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let s = PrimitiveSampler::new(11).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..400 {
            seen.insert(s.sample(&mut rng));
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), primitive_elements(11));
    }
}
