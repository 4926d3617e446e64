//! Authority and cloud-host operations for every protocol phase.
//!
//! The functions here are the per-party steps; [`crate::simnet`] sequences
//! them over a [`Transport`]. Nothing in this module holds shared state.

mod cloud;
mod message;
mod recovery;
mod smc;
mod tca;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gfpoly::PolyError;
use crate::mathcore::MathError;
use crate::{CloudId, Int, IntPoly};

pub use cloud::{
    admissible_exponents, cloud_blind_secret, cloud_blind_with_exponent, cloud_make_share,
    cloud_solve_witness, cloud_verify_peer,
};
pub use message::{Envelope, Party, Payload, PhaseTag, Sessions, Transport};
pub use recovery::{assess_recoverability, recover_aggregate, recover_missing};
pub use smc::{escrow_round, random_mask, ring_sum_round};
pub use tca::{
    choose_pair, tca_derive_keys, tca_issue_for, tca_issue_verification, tca_open_session,
    verification_primes, DLOG_BUDGET, DLOG_SCAN_CAP, MAX_REISSUES, VERIFICATION_PRIMES,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("a federation needs at least 2 clouds, got {0}")]
    TooFewClouds(usize),
    #[error(transparent)]
    Math(#[from] MathError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("{cloud}: secret {secret} is not below its modulus {np}")]
    SecretOutOfRange { cloud: CloudId, secret: u64, np: u64 },
    #[error("{cloud}: blinding exponent {b} is not a unit modulo {np}")]
    InvalidExponent { cloud: CloudId, b: u64, np: u64 },
    #[error("envelope {from} -> {to} carries session {got}, expected {expected}")]
    SessionMismatch {
        from: Party,
        to: Party,
        got: SessionId,
        expected: String,
    },
    #[error("no session is registered for {0} -> {1}")]
    UnknownParty(Party, Party),
    #[error("share polynomials disagree on degree")]
    DegreeMismatch,
    #[error("ring sum came back below its mask")]
    SumUnderflow,
    #[error("every candidate verification prime divides the sum's leading or constant coefficient")]
    NoValidPrime,
    #[error("escrowed corrections exceed the blinded total")]
    NegativeResult,
    #[error("recovery of a single missing share needs exactly one absent cloud, got {0}")]
    MultipleMissing(usize),
    #[error("unexpected {got} payload where {expected} was due")]
    UnexpectedPayload { expected: &'static str, got: &'static str },
}

/// Opaque 128-bit session token, written as a decimal string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SessionId(pub u128);

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for SessionId {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse().map(SessionId)
    }
}

impl Serialize for SessionId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::dec::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for SessionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        crate::dec::deserialize(d).map(SessionId)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionGrant {
    pub session_id: SessionId,
    pub cloud: CloudId,
    /// Logical simulation step at which the grant was issued.
    pub issued_at: u64,
}

/// The exponents and exact factor a cloud blinds its secret with.
///
/// `d = g^(b * delta)` with `b * delta` a multiple of the order of `g`, so
/// `d = 1 (mod np)` and subtracting `correction = secret * (d - 1)` from the
/// blinded value gives the secret back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlindingFactor {
    pub b: u64,
    pub delta: u64,
    pub d: Int,
    pub correction: Int,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretShare {
    pub secret: u64,
    pub blinded_a0: Int,
}

/// A cloud's blinded share polynomial together with the values it keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharePolynomial {
    pub cloud: CloudId,
    pub poly: IntPoly,
    pub share: SecretShare,
    pub blinding: BlindingFactor,
}

/// Per-cloud verification parameters issued by the authority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VerificationParams {
    pub g_p: u64,
    pub t: u64,
    pub h: u64,
}

/// The exponent a cloud found with `X^r = h` in its own sum's ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerificationWitness {
    pub r: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CaseTag {
    AllHonest,
    MissingShareRecovered,
    Unrecoverable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryOutcome {
    pub case_tag: CaseTag,
    #[serde(with = "crate::dec::option")]
    pub aggregate: Option<Int>,
    /// Aggregate of the clouds left after exclusion, when it was recomputed.
    #[serde(with = "crate::dec::option")]
    pub partial_aggregate: Option<Int>,
    /// Combined contribution of the excluded clouds that did enter the sum.
    #[serde(with = "crate::dec::option")]
    pub missing_contribution: Option<Int>,
    pub flagged_clouds: BTreeSet<CloudId>,
    pub missing_clouds: BTreeSet<CloudId>,
    /// Set when the escrowed corrections exceeded the blinded total, which
    /// only a lying escrow can cause.
    pub escrow_inconsistent: bool,
}
