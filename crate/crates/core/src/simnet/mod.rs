//! Deterministic in-process network for protocol runs.
//!
//! Delivery is synchronous and in order. Every envelope is checked against
//! the session table, passed through the fault plan and appended to the
//! transcript before the recipient sees it.

mod run;

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::protocol::{Envelope, Payload, PhaseTag, ProtocolError, RecoveryOutcome, Sessions, Transport};
use crate::scenario::ConfigError;
use crate::{CloudId, Int, IntPoly};

pub use run::{run_scenario, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum FaultKind {
    /// Adds `delta` to one coefficient of every sum the cloud announces.
    CorruptSum {
        #[serde(with = "crate::dec")]
        coefficient_index: usize,
        #[serde(with = "crate::dec")]
        delta: i64,
    },
    /// Adds `delta` to the escrow total the cloud forwards.
    WrongCorrection {
        #[serde(with = "crate::dec")]
        delta: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaliciousCloud {
    pub cloud: CloudId,
    pub fault: FaultKind,
}

/// A host that disappears at the start of `phase` and never returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dropout {
    pub cloud: CloudId,
    pub phase: PhaseTag,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultPlan {
    #[serde(default)]
    pub malicious: Vec<MaliciousCloud>,
    #[serde(default)]
    pub dropouts: Vec<Dropout>,
}

impl FaultPlan {
    pub fn validate(&self, n: usize) -> Result<(), ConfigError> {
        let exists = |c: CloudId| c.0 >= 1 && c.index() < n;
        for (i, m) in self.malicious.iter().enumerate() {
            if !exists(m.cloud) {
                return Err(ConfigError::new(
                    format!("faults.malicious[{i}].cloud"),
                    format!("{} is not in the federation", m.cloud),
                ));
            }
        }
        let mut dropped = BTreeSet::new();
        for (i, d) in self.dropouts.iter().enumerate() {
            let path = format!("faults.dropouts[{i}].cloud");
            if !exists(d.cloud) {
                return Err(ConfigError::new(path, format!("{} is not in the federation", d.cloud)));
            }
            if self.is_malicious(d.cloud) {
                return Err(ConfigError::new(path, format!("{} is both malicious and dropped", d.cloud)));
            }
            if !dropped.insert(d.cloud) {
                return Err(ConfigError::new(path, format!("{} is dropped twice", d.cloud)));
            }
        }
        Ok(())
    }

    pub fn is_malicious(&self, cloud: CloudId) -> bool {
        self.malicious.iter().any(|m| m.cloud == cloud)
    }

    /// The phase at which `cloud` vanishes, if it does.
    pub fn dropout_phase(&self, cloud: CloudId) -> Option<PhaseTag> {
        self.dropouts.iter().find(|d| d.cloud == cloud).map(|d| d.phase)
    }

    /// Whether `cloud` is gone by `phase`.
    pub fn is_dropped(&self, cloud: CloudId, phase: PhaseTag) -> bool {
        self.dropout_phase(cloud).is_some_and(|p| p <= phase)
    }

    /// Clouds touched by any entry of the plan.
    pub fn touched(&self) -> BTreeSet<CloudId> {
        self.malicious
            .iter()
            .map(|m| m.cloud)
            .chain(self.dropouts.iter().map(|d| d.cloud))
            .collect()
    }
}

fn shift(value: &Int, delta: i64) -> Int {
    let magnitude = BigUint::from(delta.unsigned_abs());
    if delta >= 0 {
        value + magnitude
    } else if *value > magnitude {
        value - magnitude
    } else {
        Int::default()
    }
}

fn corrupt(sum: &IntPoly, index: usize, delta: i64) -> IntPoly {
    sum.with_coeff(index, shift(&sum.coeff(index), delta))
}

/// Applies the sender's faults to an envelope. Honest senders pass through.
/// Negative deltas saturate at zero.
pub fn inject_fault(envelope: Envelope, plan: &FaultPlan) -> Envelope {
    let crate::protocol::Party::Cloud(sender) = envelope.from else {
        return envelope;
    };
    let mut env = envelope;
    for m in plan.malicious.iter().filter(|m| m.cloud == sender) {
        env.payload = match (m.fault, env.payload) {
            (FaultKind::CorruptSum { coefficient_index, delta }, Payload::SumAnnounce { sum }) => {
                Payload::SumAnnounce {
                    sum: corrupt(&sum, coefficient_index, delta),
                }
            }
            (FaultKind::CorruptSum { coefficient_index, delta }, Payload::ShareAccumulator { initiator, sum }) => {
                Payload::ShareAccumulator {
                    initiator,
                    sum: corrupt(&sum, coefficient_index, delta),
                }
            }
            (FaultKind::WrongCorrection { delta }, Payload::CorrectionEscrow { amount }) => {
                Payload::CorrectionEscrow {
                    amount: shift(&amount, delta),
                }
            }
            (_, other) => other,
        };
    }
    env
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeliveryStatus {
    Delivered,
    Rejected,
}

/// One verifier's verdict on one peer's announced sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub peer: CloudId,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub step: u64,
    /// The envelope as the recipient received it.
    pub envelope: Envelope,
    pub status: DeliveryStatus,
    /// Filled on a verifier's flag report.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<Record>,
    #[serde(rename = "final")]
    pub outcome: RecoveryOutcome,
}

impl Transcript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    /// Every verdict with the verifier that issued it.
    pub fn verdicts(&self) -> Vec<(CloudId, Verdict)> {
        self.records
            .iter()
            .filter_map(|r| match r.envelope.from {
                crate::protocol::Party::Cloud(c) => Some((c, r)),
                crate::protocol::Party::Tca => None,
            })
            .flat_map(|(c, r)| r.verdicts.iter().map(move |v| (c, *v)))
            .collect()
    }
}

/// Network bound to one session table and fault plan.
///
/// Accumulator hops of the masked ring are exempt from sum corruption: a
/// corrupted accumulator would spoil every honest party's sum alike and
/// leave nothing for verification to compare against.
#[derive(Debug, Clone)]
pub struct Network {
    sessions: Sessions,
    plan: FaultPlan,
    records: Vec<Record>,
    pending_verdicts: Vec<Verdict>,
}

impl Network {
    pub fn new(sessions: Sessions, plan: FaultPlan) -> Self {
        Network {
            sessions,
            plan,
            records: Vec::new(),
            pending_verdicts: Vec::new(),
        }
    }

    pub fn sessions(&self) -> &Sessions {
        &self.sessions
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn into_records(self) -> Vec<Record> {
        self.records
    }

    /// Sends a flag report and attaches the verdicts behind it to its record.
    pub fn send_report(&mut self, envelope: Envelope, verdicts: Vec<Verdict>) -> Result<Envelope, ProtocolError> {
        self.pending_verdicts = verdicts;
        let out = self.send(envelope);
        self.pending_verdicts.clear();
        out
    }
}

impl Transport for Network {
    fn send(&mut self, envelope: Envelope) -> Result<Envelope, ProtocolError> {
        let step = self.records.len() as u64 + 1;
        let expected = self.sessions.expected(envelope.from, envelope.to);
        if expected != Some(envelope.session_id) {
            let err = ProtocolError::SessionMismatch {
                from: envelope.from,
                to: envelope.to,
                got: envelope.session_id,
                expected: expected.map_or_else(|| "none".to_string(), |s| s.to_string()),
            };
            self.records.push(Record {
                step,
                envelope,
                status: DeliveryStatus::Rejected,
                verdicts: Vec::new(),
            });
            return Err(err);
        }
        let delivered = match envelope.payload {
            Payload::ShareAccumulator { .. } => envelope,
            _ => inject_fault(envelope, &self.plan),
        };
        self.records.push(Record {
            step,
            envelope: delivered.clone(),
            status: DeliveryStatus::Delivered,
            verdicts: std::mem::take(&mut self.pending_verdicts),
        });
        Ok(delivered)
    }
}
