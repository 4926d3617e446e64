use std::collections::BTreeSet;

use num_traits::Zero;
use rand::Rng;

use super::{ProtocolError, SessionGrant, SessionId, VerificationParams};
use crate::mathcore::{hash_to_prime, mod_inverse, mod_pow, CloudKeyMaterial, Credentials};
use crate::{CloudId, IntPoly};

/// Candidate verification primes, ascending.
pub const VERIFICATION_PRIMES: [u64; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191,
    193, 197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

/// Largest unit-group bound `g_p^deg - 1` the authority prefers, so a
/// cloud's witness search stays a linear scan of affordable length.
pub const DLOG_BUDGET: u64 = 1 << 20;

/// Hard cap on a witness scan, reached only on primes past the budget.
pub const DLOG_SCAN_CAP: u64 = 1 << 22;

/// Issues one distinct session id per cloud.
pub fn tca_open_session<R: Rng + ?Sized>(
    creds: &[Credentials],
    rng: &mut R,
) -> Result<Vec<SessionGrant>, ProtocolError> {
    if creds.len() < 2 {
        return Err(ProtocolError::TooFewClouds(creds.len()));
    }
    let mut seen = BTreeSet::new();
    let mut grants = Vec::with_capacity(creds.len());
    for i in 0..creds.len() {
        let id = loop {
            let candidate = rng.gen::<u128>();
            if seen.insert(candidate) {
                break candidate;
            }
        };
        grants.push(SessionGrant {
            session_id: SessionId(id),
            cloud: CloudId::from_index(i),
            issued_at: 0,
        });
    }
    Ok(grants)
}

/// Key material for every cloud from its credential-derived prime.
pub fn tca_derive_keys(
    creds: &[Credentials],
    prime_bits: u32,
) -> Result<Vec<CloudKeyMaterial>, ProtocolError> {
    creds
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let cp = hash_to_prime(c, prime_bits)?;
            Ok(CloudKeyMaterial::from_prime(CloudId::from_index(i), cp)?)
        })
        .collect()
}

fn unit_bound(p: u64, degree: usize) -> u64 {
    let mut acc: u64 = 1;
    for _ in 0..degree {
        acc = acc.saturating_mul(p);
    }
    acc.saturating_sub(1)
}

/// Candidate primes for a sum, cheapest first.
///
/// A prime qualifies when it divides neither the leading nor the constant
/// coefficient: the first keeps the degree, the second keeps `X` a unit so
/// `X^r = 1` always has a solution. Primes whose ring fits
/// [`DLOG_BUDGET`] come first, rotated by `slot` so clouds get distinct
/// primes where possible.
pub fn verification_primes(sum: &IntPoly, slot: usize) -> Vec<u64> {
    let Some(degree) = sum.degree().filter(|d| *d >= 1) else {
        return Vec::new();
    };
    let lead = sum.coeff(degree);
    let constant = sum.coeff(0);
    let (mut cheap, dear): (Vec<u64>, Vec<u64>) = VERIFICATION_PRIMES
        .iter()
        .copied()
        .filter(|p| !(&lead % *p).is_zero() && !(&constant % *p).is_zero())
        .partition(|p| unit_bound(*p, degree) <= DLOG_BUDGET);
    if !cheap.is_empty() {
        let k = slot % cheap.len();
        cheap.rotate_left(k);
    }
    cheap.extend(dear);
    cheap
}

/// Draws `(t, h)` with `h t = 1` and `h^t = 1 (mod p)`, skipping pairs in
/// `taken`. Falls back to `t = h = p - 1` after `retries` misses.
pub fn choose_pair<R: Rng + ?Sized>(
    p: u64,
    retries: usize,
    taken: &BTreeSet<(u64, u64)>,
    rng: &mut R,
) -> (u64, u64) {
    if p > 2 {
        for _ in 0..retries {
            let t = rng.gen_range(1..p);
            let Ok(h) = mod_inverse(&t, &p) else {
                continue;
            };
            if mod_pow(&h, &t, &p) == 1 && !taken.contains(&(t, h)) {
                return (t, h);
            }
        }
    }
    (p - 1, p - 1)
}

/// Parameters for the cloud at `slot` from the sum it announced.
///
/// The first cloud on a prime gets `t = h = 1`, which keeps `r t` equal to
/// the order of `X` and so makes the peer check as strict as it can be.
/// Later clouds on the same prime get random pairs. `attempt` counts
/// reissues after the cloud found no witness: each moves to the next
/// candidate prime, and once they run out the authority sends `t = h = 1`
/// on the first candidate, which any unit `X` satisfies.
pub fn tca_issue_for<R: Rng + ?Sized>(
    sum: &IntPoly,
    slot: usize,
    attempt: usize,
    retries: usize,
    taken: &BTreeSet<(u64, u64, u64)>,
    rng: &mut R,
) -> Result<VerificationParams, ProtocolError> {
    let primes = verification_primes(sum, slot);
    let first = *primes.first().ok_or(ProtocolError::NoValidPrime)?;
    match primes.get(attempt) {
        Some(&g_p) if attempt < MAX_REISSUES => {
            let (t, h) = if taken.contains(&(g_p, 1, 1)) {
                let on_prime = taken
                    .iter()
                    .filter(|(p, _, _)| *p == g_p)
                    .map(|&(_, t, h)| (t, h))
                    .collect();
                choose_pair(g_p, retries, &on_prime, rng)
            } else {
                (1, 1)
            };
            Ok(VerificationParams { g_p, t, h })
        }
        _ => Ok(VerificationParams { g_p: first, t: 1, h: 1 }),
    }
}

/// Reissues tried with fresh primes before the identity fallback.
pub const MAX_REISSUES: usize = 3;

/// Parameters for every cloud from one common sum, distinct
/// `(g_p, t, h)` per cloud where the primes allow.
pub fn tca_issue_verification<R: Rng + ?Sized>(
    sum: &IntPoly,
    clouds: &[CloudId],
    retries: usize,
    rng: &mut R,
) -> Result<Vec<(CloudId, VerificationParams)>, ProtocolError> {
    let mut taken = BTreeSet::new();
    clouds
        .iter()
        .enumerate()
        .map(|(slot, c)| {
            let params = tca_issue_for(sum, slot, 0, retries, &taken, rng)?;
            taken.insert((params.g_p, params.t, params.h));
            Ok((*c, params))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfpoly::Poly;
    use crate::mathcore::{is_prime, DEFAULT_PRIME_BITS};
    use num_bigint::BigUint;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn cred(name: &str) -> Credentials {
        Credentials {
            grant_type: "client_credentials".into(),
            service_type: "storage".into(),
            client_name: name.into(),
            client_region: "eu".into(),
            client_location: "dublin".into(),
            service_payment: 100,
            expiry_date: "2030-01-01".into(),
        }
    }

    fn ip(c: &[u64]) -> IntPoly {
        Poly::new(c.iter().map(|&v| BigUint::from(v)).collect())
    }

    #[test]
    fn sessions_are_distinct_and_seeded() {
        let creds: Vec<_> = ["a", "b", "c", "d"].iter().map(|n| cred(n)).collect();
        let g1 = tca_open_session(&creds, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        let g2 = tca_open_session(&creds, &mut ChaCha20Rng::seed_from_u64(5)).unwrap();
        assert_eq!(g1, g2);
        let ids: BTreeSet<_> = g1.iter().map(|g| g.session_id).collect();
        assert_eq!(ids.len(), 4);
        assert_eq!(
            tca_open_session(&creds[..1], &mut ChaCha20Rng::seed_from_u64(5)),
            Err(ProtocolError::TooFewClouds(1))
        );
    }

    #[test]
    fn duplicate_credentials_share_keys() {
        let creds = vec![cred("x"), cred("x")];
        let keys = tca_derive_keys(&creds, DEFAULT_PRIME_BITS).unwrap();
        assert_eq!((keys[0].cp, keys[0].np), (keys[1].cp, keys[1].np));
        assert_ne!(keys[0].cloud, keys[1].cloud);
        assert!(is_prime(&keys[0].cp));
        assert_eq!(keys[0].np, 2 * keys[0].cp);
        let grants = tca_open_session(&creds, &mut ChaCha20Rng::seed_from_u64(0)).unwrap();
        assert_ne!(grants[0].session_id, grants[1].session_id);
    }

    #[test]
    fn pair_examples() {
        let none = BTreeSet::new();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(choose_pair(7, 0, &none, &mut rng), (6, 6));
        assert_eq!(choose_pair(5, 0, &none, &mut rng), (4, 4));
        // t = 3, h = 5 is an inverse pair mod 7 but 5^3 = 6
        assert_eq!(mod_inverse(&3u64, &7), Ok(5));
        assert_eq!(mod_pow(&5u64, &3, &7), 6);
        for _ in 0..200 {
            let (t, h) = choose_pair(7, 5, &none, &mut rng);
            assert_ne!((t, h), (3, 5));
            assert_eq!(t * h % 7, 1);
            assert_eq!(mod_pow(&h, &t, &7), 1);
        }
        assert_eq!(choose_pair(2, 10, &none, &mut rng), (1, 1));
    }

    #[test]
    fn primes_avoid_leading_and_constant_divisors() {
        // leading 30 = 2*3*5, constant 7
        let sum = ip(&[7, 1, 30]);
        let primes = verification_primes(&sum, 0);
        assert_eq!(&primes[..3], &[11, 13, 17]);
        assert!(primes.iter().all(|p| 30 % p != 0 && 7 % p != 0));
        assert_eq!(verification_primes(&sum, 1)[0], 13);
        assert!(verification_primes(&ip(&[5]), 0).is_empty());
    }

    #[test]
    fn exhausted_primes_are_an_error() {
        let product: BigUint = VERIFICATION_PRIMES.iter().map(|&p| BigUint::from(p)).product();
        let sum = Poly::new(vec![BigUint::from(1u32), product]);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(
            tca_issue_verification(&sum, &[CloudId(1)], 4, &mut rng),
            Err(ProtocolError::NoValidPrime)
        );
    }

    #[test]
    fn issued_params_hold_their_invariants() {
        let sum = ip(&[1_000_003, 87, 50, 56]);
        let clouds: Vec<_> = (0..4).map(CloudId::from_index).collect();
        let issued = tca_issue_verification(&sum, &clouds, 8, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let primes: BTreeSet<_> = issued.iter().map(|(_, p)| p.g_p).collect();
        assert_eq!(primes.len(), 4);
        for (_, p) in issued {
            assert_eq!(p.h * p.t % p.g_p, 1 % p.g_p);
            assert_eq!(mod_pow(&p.h, &p.t, &p.g_p), 1 % p.g_p);
        }
        let last = tca_issue_for(&sum, 0, 99, 8, &BTreeSet::new(), &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        assert_eq!((last.t, last.h), (1, 1));
    }

    #[test]
    fn shared_prime_gets_a_fresh_pair() {
        // slot 1 lands on 3, whose only other valid pair is (2, 2)
        let sum = ip(&[1, 1, 1]);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let first = tca_issue_for(&sum, 1, 0, 32, &BTreeSet::new(), &mut rng).unwrap();
        assert_eq!((first.t, first.h), (1, 1));
        let taken = BTreeSet::from([(first.g_p, 1, 1)]);
        let second = tca_issue_for(&sum, 1, 0, 32, &taken, &mut rng).unwrap();
        assert_eq!((second.g_p, second.t, second.h), (3, 2, 2));
    }
}
