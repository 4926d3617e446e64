use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use super::tca::DLOG_SCAN_CAP;
use super::{
    BlindingFactor, ProtocolError, SecretShare, SharePolynomial, VerificationParams,
    VerificationWitness,
};
use crate::gfpoly::{generate_share_polynomial, QuotientRing};
use crate::mathcore::{factorize, int_pow_exact, log2_big, multiplicative_order, CloudKeyMaterial};
use crate::IntPoly;

fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (q, e) in factorize(&n) {
        let prev = out.clone();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= q;
            out.extend(prev.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    out
}

/// Every exponent `b` in `[1, np)`, coprime to `np`, whose blinding factor
/// `g^lcm(b, ord g)` stays within `max_bits`. Ascending.
pub fn admissible_exponents(key: &CloudKeyMaterial, max_bits: u64) -> Result<Vec<u64>, ProtocolError> {
    let omega = multiplicative_order(&key.g, &key.np)?;
    let log_g = log2_big(&BigUint::from(key.g));
    let lmax = (max_bits as f64 / log_g).floor() as u64;
    if lmax < omega {
        return Err(crate::mathcore::MathError::SizeExceeded { max_bits }.into());
    }
    // lcm(b, omega) = omega * m with m = b / gcd(b, omega) < np
    let mmax = (lmax / omega).min(key.np - 1);
    let mut out = Vec::new();
    for m in 1..=mmax {
        let Some(target) = omega.checked_mul(m) else {
            break;
        };
        for b in divisors(target) {
            if b >= key.np {
                break;
            }
            if b.gcd(&key.np) == 1 && b.lcm(&omega) == target {
                out.push(b);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Blinds `secret` with a fixed exponent `b`; `delta = ord(g) / gcd(b, ord(g))`.
pub fn cloud_blind_with_exponent(
    key: &CloudKeyMaterial,
    secret: u64,
    b: u64,
    max_bits: u64,
) -> Result<(SecretShare, BlindingFactor), ProtocolError> {
    if secret >= key.np {
        return Err(ProtocolError::SecretOutOfRange {
            cloud: key.cloud,
            secret,
            np: key.np,
        });
    }
    if b == 0 || b >= key.np || b.gcd(&key.np) != 1 {
        return Err(ProtocolError::InvalidExponent {
            cloud: key.cloud,
            b,
            np: key.np,
        });
    }
    let omega = multiplicative_order(&key.g, &key.np)?;
    let delta = omega / b.gcd(&omega);
    let d = int_pow_exact(&BigUint::from(key.g), b * delta, max_bits)?;
    let s = BigUint::from(secret);
    let correction = &s * (&d - BigUint::one());
    let blinded_a0 = &s * &d;
    Ok((
        SecretShare { secret, blinded_a0 },
        BlindingFactor {
            b,
            delta,
            d,
            correction,
        },
    ))
}

/// Blinds `secret` with `b` drawn uniformly from [`admissible_exponents`].
pub fn cloud_blind_secret<R: Rng + ?Sized>(
    key: &CloudKeyMaterial,
    secret: u64,
    rng: &mut R,
    max_bits: u64,
) -> Result<(SecretShare, BlindingFactor), ProtocolError> {
    if secret >= key.np {
        return Err(ProtocolError::SecretOutOfRange {
            cloud: key.cloud,
            secret,
            np: key.np,
        });
    }
    let choices = admissible_exponents(key, max_bits)?;
    let b = *choices
        .choose(rng)
        .ok_or(crate::mathcore::MathError::SizeExceeded { max_bits })?;
    cloud_blind_with_exponent(key, secret, b, max_bits)
}

/// Blinds the secret, then builds the share polynomial over `GF(cp)` around
/// the blinded constant.
pub fn cloud_make_share<R: Rng + ?Sized>(
    key: &CloudKeyMaterial,
    secret: u64,
    degree: usize,
    rng: &mut R,
    max_bits: u64,
) -> Result<SharePolynomial, ProtocolError> {
    let (share, blinding) = cloud_blind_secret(key, secret, rng, max_bits)?;
    let poly = generate_share_polynomial(key.cp, degree, share.blinded_a0.clone(), rng)?;
    Ok(SharePolynomial {
        cloud: key.cloud,
        poly,
        share,
        blinding,
    })
}

/// Finds `r` with `X^r = h` in `GF(g_p)[x] / (sum)`.
pub fn cloud_solve_witness(
    sum: &IntPoly,
    params: &VerificationParams,
) -> Result<VerificationWitness, ProtocolError> {
    let ring = QuotientRing::from_sum(sum, params.g_p)?;
    let r = ring.solve_x_dlog(params.h, ring.unit_bound().min(DLOG_SCAN_CAP))?;
    Ok(VerificationWitness { r })
}

/// Checks `X^(r t) = 1` in the ring of a peer's announced sum. A sum that
/// does not even define a ring fails.
pub fn cloud_verify_peer(
    received: &IntPoly,
    witness: &VerificationWitness,
    params: &VerificationParams,
) -> bool {
    let Ok(ring) = QuotientRing::from_sum(received, params.g_p) else {
        return false;
    };
    let e = witness.r as u128 * params.t as u128;
    let v = ring.ring_pow_x(&BigUint::from(e));
    v.coeffs() == [1]
}
