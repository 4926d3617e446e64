//! Message envelope exchanged between the authority and cloud hosts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{CaseTag, ProtocolError, SessionGrant, SessionId};
use crate::{CloudId, Int, IntPoly};

/// Sender or recipient of an envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Tca,
    Cloud(CloudId),
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Tca => f.write_str("TCA"),
            Party::Cloud(c) => c.fmt(f),
        }
    }
}

impl FromStr for Party {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "TCA" {
            Ok(Party::Tca)
        } else {
            s.parse().map(Party::Cloud)
        }
    }
}

impl Serialize for Party {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Party {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

/// Protocol phase, in execution order. Dropouts take effect at the start of
/// the named phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseTag {
    /// Session grants and key material.
    Keys,
    /// Share generation, masked ring sums and correction escrow.
    Distribution,
    /// Sum announcements, verification parameters and peer checks.
    Verification,
    /// Aggregate recovery and, when needed, the partial recomputation.
    Recovery,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum Payload {
    KeyGrant {
        #[serde(with = "crate::dec")]
        cp: u64,
        #[serde(with = "crate::dec")]
        np: u64,
        #[serde(with = "crate::dec")]
        g: u64,
    },
    /// Masked running sum of a ring round started by `initiator`.
    ShareAccumulator { initiator: Party, sum: IntPoly },
    /// Masked running total of escrowed blinding corrections.
    CorrectionEscrow {
        #[serde(with = "crate::dec")]
        amount: Int,
    },
    SumAnnounce { sum: IntPoly },
    VerifyParams {
        #[serde(with = "crate::dec")]
        g_p: u64,
        #[serde(with = "crate::dec")]
        t: u64,
        #[serde(with = "crate::dec")]
        h: u64,
    },
    /// A verifier's report: every peer whose announced sum failed its check.
    VerifyFlag { accused: Vec<CloudId> },
    RecoveryReport {
        case_tag: CaseTag,
        #[serde(with = "crate::dec::option")]
        aggregate: Option<Int>,
    },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::KeyGrant { .. } => "KeyGrant",
            Payload::ShareAccumulator { .. } => "ShareAccumulator",
            Payload::CorrectionEscrow { .. } => "CorrectionEscrow",
            Payload::SumAnnounce { .. } => "SumAnnounce",
            Payload::VerifyParams { .. } => "VerifyParams",
            Payload::VerifyFlag { .. } => "VerifyFlag",
            Payload::RecoveryReport { .. } => "RecoveryReport",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Envelope {
    pub session_id: SessionId,
    pub from: Party,
    pub to: Party,
    pub phase: PhaseTag,
    pub payload: Payload,
}

/// A message channel between protocol parties.
pub trait Transport {
    /// Delivers one envelope and returns it as the recipient received it.
    /// Rejected envelopes never reach the recipient.
    fn send(&mut self, envelope: Envelope) -> Result<Envelope, ProtocolError>;
}

/// Session ids by cloud. A cloud signs its own messages with its id; the
/// authority addresses each cloud under that cloud's id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Sessions(BTreeMap<CloudId, SessionId>);

impl Sessions {
    pub fn from_grants(grants: &[SessionGrant]) -> Self {
        Sessions(grants.iter().map(|g| (g.cloud, g.session_id)).collect())
    }

    pub fn get(&self, cloud: CloudId) -> Option<SessionId> {
        self.0.get(&cloud).copied()
    }

    /// The session id an envelope from `from` to `to` must carry.
    pub fn expected(&self, from: Party, to: Party) -> Option<SessionId> {
        match (from, to) {
            (Party::Cloud(c), _) | (Party::Tca, Party::Cloud(c)) => self.get(c),
            (Party::Tca, Party::Tca) => None,
        }
    }

    pub fn envelope(
        &self,
        from: Party,
        to: Party,
        phase: PhaseTag,
        payload: Payload,
    ) -> Result<Envelope, ProtocolError> {
        let session_id = self
            .expected(from, to)
            .ok_or(ProtocolError::UnknownParty(from, to))?;
        Ok(Envelope {
            session_id,
            from,
            to,
            phase,
            payload,
        })
    }
}
