//! The four-cloud reference federation and the checks that reproduce it.

use std::fmt;

use crate::mathcore::{euler_phi, find_primitive_root, multiplicative_order};
use crate::protocol::{CaseTag, PhaseTag};
use crate::scenario::{CloudSpec, Scenario};
use crate::simnet::{run_scenario, Dropout, FaultKind, FaultPlan, MaliciousCloud, SimError};
use crate::CloudId;

/// Credential primes of the example.
pub const REFERENCE_PRIMES: [u64; 4] = [4327, 5669, 6203, 5843];
/// Generators paired with those primes.
pub const REFERENCE_GENERATORS: [u64; 4] = [8647, 11311, 12401, 11681];
pub const REFERENCE_SECRETS: [u64; 4] = [2, 4, 6, 8];
pub const REFERENCE_SEED: u64 = 2015;

fn cloud(name: &str, region: &str, location: &str, payment: u64, expiry: &str, cp: u64, secret: u64) -> CloudSpec {
    CloudSpec {
        grant_type: "Client".into(),
        service_type: "Application".into(),
        client_name: name.into(),
        client_region: region.into(),
        client_location: location.into(),
        service_payment: payment,
        expiry_date: expiry.into(),
        secret,
        fixed_cp: Some(cp),
    }
}

/// The honest four-cloud federation with its primes injected.
pub fn reference_scenario() -> Scenario {
    let [p1, p2, p3, p4] = REFERENCE_PRIMES;
    let [s1, s2, s3, s4] = REFERENCE_SECRETS;
    Scenario {
        seed: REFERENCE_SEED,
        prime_bits: 13,
        degree: Some(3),
        clouds: vec![
            cloud("Amazon", "Asia", "India", 250_000_000, "31-Dec-2025", p1, s1),
            cloud("Google Docs", "America", "Mexico City", 3_000_000_000, "31-Dec-2030", p2, s2),
            cloud("Google Cloud Services", "Asia", "Pakistan", 300_000_000_000, "31-Dec-2025", p3, s3),
            cloud("HP Cloud Provider", "Asia", "Bangladesh", 3_600_000_000, "31-Dec-2035", p4, s4),
        ],
        faults: FaultPlan::default(),
    }
}

/// What the example must reproduce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceExpectations {
    pub aggregate: u64,
    pub partial: u64,
    pub missing: u64,
    /// Cloud that vanishes before recovery.
    pub dropped: CloudId,
    /// Clouds that relay corrupted sums.
    pub corrupt: Vec<CloudId>,
}

impl Default for ReferenceExpectations {
    fn default() -> Self {
        ReferenceExpectations {
            aggregate: 20,
            partial: 12,
            missing: 8,
            dropped: CloudId(4),
            corrupt: vec![CloudId(1), CloudId(2)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub name: &'static str,
    pub expected: String,
    pub actual: String,
}

impl Assertion {
    pub fn holds(&self) -> bool {
        self.expected == self.actual
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.holds() { "ok  " } else { "FAIL" };
        write!(f, "[{mark}] {}: got {}, expected {}", self.name, self.actual, self.expected)
    }
}

/// One row of the generator compatibility table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatRow {
    pub cloud: CloudId,
    pub np: u64,
    pub g: u64,
    /// `None` when `g` is not a unit modulo `np`.
    pub order: Option<u64>,
    pub group_order: u64,
    pub smallest_root: u64,
}

impl CompatRow {
    pub fn primitive(&self) -> bool {
        self.order == Some(self.group_order)
    }
}

fn show<T: fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "none".to_string(), |v| v.to_string())
}

/// Runs the three cases on `base` and compares them with `expect`.
pub fn check_cases(base: &Scenario, expect: &ReferenceExpectations) -> Result<Vec<Assertion>, SimError> {
    let mut out = Vec::new();

    let honest = run_scenario(base, base.seed)?.outcome;
    out.push(Assertion {
        name: "case 1 aggregate",
        expected: expect.aggregate.to_string(),
        actual: show(honest.aggregate),
    });

    let mut dropout = base.clone();
    dropout.faults.dropouts.push(Dropout {
        cloud: expect.dropped,
        phase: PhaseTag::Recovery,
    });
    let partial = run_scenario(&dropout, dropout.seed)?.outcome;
    out.push(Assertion {
        name: "case 2 partial aggregate",
        expected: expect.partial.to_string(),
        actual: show(partial.partial_aggregate),
    });
    out.push(Assertion {
        name: "case 2 missing contribution",
        expected: expect.missing.to_string(),
        actual: show(partial.missing_contribution),
    });

    let mut corrupt = base.clone();
    corrupt.faults.malicious.extend(expect.corrupt.iter().map(|&c| MaliciousCloud {
        cloud: c,
        fault: FaultKind::CorruptSum {
            coefficient_index: 1,
            delta: 1,
        },
    }));
    let broken = run_scenario(&corrupt, corrupt.seed)?.outcome;
    out.push(Assertion {
        name: "case 3 with two corrupt sums",
        expected: format!("{:?}", CaseTag::Unrecoverable),
        actual: format!("{:?}", broken.case_tag),
    });
    Ok(out)
}

/// Orders of the reference generators, computed independently of them.
pub fn compatibility_table() -> Vec<CompatRow> {
    REFERENCE_PRIMES
        .iter()
        .zip(REFERENCE_GENERATORS)
        .enumerate()
        .map(|(i, (&cp, g))| {
            let np = 2 * cp;
            CompatRow {
                cloud: CloudId::from_index(i),
                np,
                g,
                order: multiplicative_order(&g, &np).ok(),
                group_order: euler_phi(&np),
                smallest_root: find_primitive_root(np).expect("2p with p an odd prime"),
            }
        })
        .collect()
}
