//! Run summary written next to the transcript.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::mathcore::CloudKeyMaterial;
use crate::protocol::{CaseTag, Party, Payload};
use crate::scenario::Scenario;
use crate::simnet::{Transcript, Verdict};
use crate::{CloudId, Int};

/// Public key parameters of one cloud. The generator stays private.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyRow {
    pub cloud: CloudId,
    #[serde(with = "crate::dec")]
    pub cp: u64,
    #[serde(with = "crate::dec")]
    pub np: u64,
}

/// The parameters a cloud verified with and what it concluded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub cloud: CloudId,
    #[serde(with = "crate::dec")]
    pub g_p: u64,
    #[serde(with = "crate::dec")]
    pub t: u64,
    #[serde(with = "crate::dec")]
    pub h: u64,
    pub verdicts: Vec<Verdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    /// The scenario as run, with `seed` set to the seed actually used.
    pub scenario: Scenario,
    #[serde(with = "crate::dec")]
    pub seed: u64,
    pub case_tag: CaseTag,
    #[serde(with = "crate::dec::option")]
    pub aggregate: Option<Int>,
    #[serde(with = "crate::dec::option")]
    pub partial_aggregate: Option<Int>,
    #[serde(with = "crate::dec::option")]
    pub missing_contribution: Option<Int>,
    pub flagged_clouds: BTreeSet<CloudId>,
    pub missing_clouds: BTreeSet<CloudId>,
    pub escrow_inconsistent: bool,
    pub keys: Vec<KeyRow>,
    pub verification: Vec<VerificationRow>,
}

impl Report {
    pub fn new(scenario: &Scenario, seed: u64, keys: &[CloudKeyMaterial], transcript: &Transcript) -> Self {
        let mut verification: Vec<VerificationRow> = Vec::new();
        for r in &transcript.records {
            match (&r.envelope.payload, r.envelope.from, r.envelope.to) {
                // a reissue replaces the earlier parameters
                (Payload::VerifyParams { g_p, t, h }, Party::Tca, Party::Cloud(c)) => {
                    verification.retain(|v| v.cloud != c);
                    verification.push(VerificationRow {
                        cloud: c,
                        g_p: *g_p,
                        t: *t,
                        h: *h,
                        verdicts: Vec::new(),
                    });
                }
                (Payload::VerifyFlag { .. }, Party::Cloud(c), _) => {
                    if let Some(row) = verification.iter_mut().find(|v| v.cloud == c) {
                        row.verdicts = r.verdicts.clone();
                    }
                }
                _ => {}
            }
        }
        let o = &transcript.outcome;
        let mut scenario = scenario.clone();
        scenario.seed = seed;
        Report {
            scenario,
            seed,
            case_tag: o.case_tag,
            aggregate: o.aggregate.clone(),
            partial_aggregate: o.partial_aggregate.clone(),
            missing_contribution: o.missing_contribution.clone(),
            flagged_clouds: o.flagged_clouds.clone(),
            missing_clouds: o.missing_clouds.clone(),
            escrow_inconsistent: o.escrow_inconsistent,
            keys: keys
                .iter()
                .map(|k| KeyRow {
                    cloud: k.cloud,
                    cp: k.cp,
                    np: k.np,
                })
                .collect(),
            verification,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Whether any verifier rejected any peer.
    pub fn any_flag(&self) -> bool {
        !self.flagged_clouds.is_empty()
    }
}
