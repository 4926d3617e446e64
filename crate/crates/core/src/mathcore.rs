//! Number-theoretic primitives behind key derivation and blinding.
//!
//! Everything here is a pure function. The generic routines work over any
//! [`Scalar`]; key material itself is kept in `u64` because the moduli it
//! produces must also index the prime field used for share coefficients.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Pow, ToPrimitive};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::CloudId;

/// Deterministic Miller-Rabin witnesses, exact for every `n < 3.3e24`.
const MR_WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Smallest accepted credential prime width.
pub const MIN_PRIME_BITS: u32 = 8;
/// Largest accepted credential prime width.
pub const MAX_PRIME_BITS: u32 = 64;
/// Default width for credential-derived primes.
pub const DEFAULT_PRIME_BITS: u32 = 12;
/// Default size cap, in bits, for exact blinding factors.
pub const DEFAULT_MAX_BITS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("{a} is not invertible modulo {m}")]
    NotCoprime { a: String, m: String },
    #[error("invalid modulus {0}")]
    InvalidModulus(String),
    #[error("exact result would exceed {max_bits} bits")]
    SizeExceeded { max_bits: u64 },
    #[error("prime width {0} is outside [{MIN_PRIME_BITS}, {MAX_PRIME_BITS}]")]
    InvalidBitWidth(u32),
    #[error("credential field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("{0} is not a prime above 2")]
    NotPrime(String),
    #[error("no 64-bit prime at or above {0}")]
    PrimeOverflow(u64),
}

/// Cloud credentials as submitted to the trusted authority.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Credentials {
    pub grant_type: String,
    pub service_type: String,
    pub client_name: String,
    pub client_region: String,
    pub client_location: String,
    pub service_payment: u64,
    pub expiry_date: String,
}

impl Credentials {
    pub fn validate(&self) -> Result<(), MathError> {
        let text = [
            ("grant_type", &self.grant_type),
            ("service_type", &self.service_type),
            ("client_name", &self.client_name),
            ("client_region", &self.client_region),
            ("client_location", &self.client_location),
            ("expiry_date", &self.expiry_date),
        ];
        for (name, value) in text {
            if value.is_empty() {
                return Err(MathError::EmptyField(name));
            }
        }
        Ok(())
    }

    /// Fixed-order, newline-separated UTF-8 serialization used for hashing.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let payment = self.service_payment.to_string();
        [
            self.grant_type.as_str(),
            &self.service_type,
            &self.client_name,
            &self.client_region,
            &self.client_location,
            &payment,
            &self.expiry_date,
        ]
        .join("\n")
        .into_bytes()
    }
}

/// Per-cloud key material: the credential prime, its doubled modulus and a
/// primitive root of that modulus. `g` is private to the owning cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CloudKeyMaterial {
    pub cloud: CloudId,
    pub cp: u64,
    pub np: u64,
    pub g: u64,
}

impl CloudKeyMaterial {
    /// Builds key material around a known odd prime.
    pub fn from_prime(cloud: CloudId, cp: u64) -> Result<Self, MathError> {
        if cp <= 2 || !is_prime(&cp) {
            return Err(MathError::NotPrime(cp.to_string()));
        }
        let np = cp
            .checked_mul(2)
            .ok_or(MathError::SizeExceeded { max_bits: 64 })?;
        let g = find_primitive_root(np)?;
        Ok(CloudKeyMaterial { cloud, cp, np, g })
    }
}

pub fn mod_pow<T: Scalar>(base: &T, exp: &T, modulus: &T) -> T {
    if modulus.is_one() {
        return T::zero();
    }
    let two = T::two();
    let mut result = T::one();
    let mut b = base.mod_floor(modulus);
    let mut e = exp.clone();
    while !e.is_zero() {
        if e.is_odd() {
            result = result.mul_mod(&b, modulus);
        }
        b = b.mul_mod(&b, modulus);
        e = e / two.clone();
    }
    result
}

/// Primality test. Exact Miller-Rabin below 2^64, trial division above.
pub fn is_prime<T: Scalar>(n: &T) -> bool {
    match n.to_u64() {
        Some(v) => is_prime_u64(v),
        None => is_prime_by_division(n),
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &MR_WITNESSES {
        let mut x = mod_pow(&a, &d, &n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = x.mul_mod(&x, &n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_prime_by_division<T: Scalar>(n: &T) -> bool {
    let two = T::two();
    if n < &two {
        return false;
    }
    if n.is_even() {
        return n == &two;
    }
    let mut d = T::lift(3);
    while d.clone() * d.clone() <= *n {
        if n.is_multiple_of(&d) {
            return false;
        }
        d = d + two.clone();
    }
    true
}

/// Smallest prime `>= n`, or `None` when it does not fit in 64 bits.
pub fn next_prime(n: u64) -> Option<u64> {
    (n.max(2)..=u64::MAX).find(|c| is_prime_u64(*c))
}

/// Prime factorization as ascending `(prime, exponent)` pairs.
pub fn factorize<T: Scalar>(n: &T) -> Vec<(T, u32)> {
    match n.to_u64() {
        Some(v) => factorize_u64(v)
            .into_iter()
            .map(|(p, e)| (T::lift(p), e))
            .collect(),
        None => factorize_by_division(n),
    }
}

fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut primes = Vec::new();
    if n < 2 {
        return Vec::new();
    }
    for p in [2u64, 3, 5] {
        while n.is_multiple_of(p) {
            primes.push(p);
            n /= p;
        }
    }
    let mut d = 7u64;
    while d < 1 << 12 && d * d <= n {
        while n.is_multiple_of(d) {
            primes.push(d);
            n /= d;
        }
        d += 2;
    }
    if n > 1 {
        split_u64(n, &mut primes);
    }
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

fn split_u64(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime_u64(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    split_u64(d, out);
    split_u64(n / d, out);
}

/// Floyd-cycle Pollard rho; `n` must be odd and composite.
fn pollard_rho(n: u64) -> u64 {
    for c in 1u64.. {
        let step = |x: u64| ((x as u128 * x as u128 + c as u128) % n as u128) as u64;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = step(x);
            y = step(step(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
    }
    unreachable!("pollard rho exhausted its increments")
}

fn factorize_by_division<T: Scalar>(n: &T) -> Vec<(T, u32)> {
    let mut n = n.clone();
    let mut out = Vec::new();
    let mut d = T::two();
    while d.clone() * d.clone() <= n {
        let mut e = 0;
        while n.is_multiple_of(&d) {
            n = n / d.clone();
            e += 1;
        }
        if e > 0 {
            out.push((d.clone(), e));
        }
        d = d + T::one();
    }
    if n > T::one() {
        out.push((n, 1));
    }
    out
}

pub fn euler_phi<T: Scalar>(n: &T) -> T {
    factorize(n).into_iter().fold(T::one(), |acc, (p, e)| {
        let mut term = p.clone() - T::one();
        for _ in 1..e {
            term = term * p.clone();
        }
        acc * term
    })
}

/// Smallest `k >= 1` with `a^k = 1 (mod n)`, found by stripping prime
/// factors off `phi(n)`.
pub fn multiplicative_order<T: Scalar>(a: &T, n: &T) -> Result<T, MathError> {
    if n < &T::two() {
        return Err(MathError::InvalidModulus(n.to_string()));
    }
    let a = a.mod_floor(n);
    if !a.gcd(n).is_one() {
        return Err(MathError::NotCoprime {
            a: a.to_string(),
            m: n.to_string(),
        });
    }
    let phi = euler_phi(n);
    let mut order = phi.clone();
    for (q, _) in factorize(&phi) {
        while order.is_multiple_of(&q) && mod_pow(&a, &(order.clone() / q.clone()), n).is_one() {
            order = order / q.clone();
        }
    }
    Ok(order)
}

/// Inverse of `a` modulo `m` in `[1, m-1]`, via the extended Euclidean
/// algorithm with coefficients kept reduced so the routine stays unsigned.
pub fn mod_inverse<T: Scalar>(a: &T, m: &T) -> Result<T, MathError> {
    if m < &T::two() {
        return Err(MathError::InvalidModulus(m.to_string()));
    }
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (T::zero(), T::one());
    while !r1.is_zero() {
        let (q, r2) = r0.div_rem(&r1);
        let t2 = (t0.clone() + m.clone() - q.mul_mod(&t1, m)).mod_floor(m);
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if !r0.is_one() {
        return Err(MathError::NotCoprime {
            a: a.to_string(),
            m: m.to_string(),
        });
    }
    Ok(t0)
}

/// Smallest primitive root of `np = 2p` for an odd prime `p`.
pub fn find_primitive_root(np: u64) -> Result<u64, MathError> {
    let invalid = || MathError::InvalidModulus(format!("{np} is not twice an odd prime"));
    if !np.is_multiple_of(2) {
        return Err(invalid());
    }
    let p = np / 2;
    if p <= 2 || !is_prime_u64(p) {
        return Err(invalid());
    }
    let phi = p - 1;
    let factors = factorize_u64(phi);
    (2..np)
        .find(|g| {
            g.gcd(&np) == 1
                && factors
                    .iter()
                    .all(|(q, _)| mod_pow(g, &(phi / q), &np) != 1)
        })
        .ok_or_else(invalid)
}

/// `log2` of a big integer, accurate to double precision.
pub fn log2_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 53 {
        return n.to_f64().unwrap_or(0.0).log2();
    }
    let shift = bits - 53;
    (n >> shift).to_f64().unwrap_or(0.0).log2() + shift as f64
}

/// Exact `base^exp`, refusing results whose size exceeds `max_bits`.
pub fn int_pow_exact(base: &BigUint, exp: u64, max_bits: u64) -> Result<BigUint, MathError> {
    if exp == 0 {
        return Ok(BigUint::one());
    }
    if base <= &BigUint::one() {
        return Ok(base.clone());
    }
    if exp as f64 * log2_big(base) > max_bits as f64 {
        return Err(MathError::SizeExceeded { max_bits });
    }
    Ok(Pow::pow(base, exp))
}

/// The seed a credential hashes to: the top `bits` bits of SHA-256 over the
/// canonical serialization, with the highest bit forced on.
pub fn credential_seed(cred: &Credentials, bits: u32) -> u64 {
    let digest = Sha256::digest(cred.canonical_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    let top = u64::from_be_bytes(head);
    let truncated = if bits >= 64 { top } else { top >> (64 - bits) };
    truncated | (1u64 << (bits - 1))
}

/// Deterministic credential-to-prime map: the smallest prime at or above
/// [`credential_seed`].
pub fn hash_to_prime(cred: &Credentials, bits: u32) -> Result<u64, MathError> {
    if !(MIN_PRIME_BITS..=MAX_PRIME_BITS).contains(&bits) {
        return Err(MathError::InvalidBitWidth(bits));
    }
    cred.validate()?;
    let seed = credential_seed(cred, bits);
    next_prime(seed).ok_or(MathError::PrimeOverflow(seed))
}
