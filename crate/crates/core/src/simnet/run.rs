use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{Network, Transcript, Verdict};
use crate::mathcore::{MathError, DEFAULT_MAX_BITS};
use crate::protocol::{
    assess_recoverability, cloud_make_share, cloud_solve_witness, cloud_verify_peer, escrow_round,
    recover_aggregate, recover_missing, ring_sum_round, tca_issue_for, tca_open_session, CaseTag,
    Envelope, Party, Payload, PhaseTag, ProtocolError, RecoveryOutcome, Sessions, SharePolynomial,
    Transport, VerificationParams, VerificationWitness, MAX_REISSUES,
};
use crate::scenario::{ConfigError, Scenario};
use crate::{CloudId, Int, IntPoly};

/// Attempts at a fresh `(t, h)` pair before the authority falls back.
const PAIR_RETRIES: usize = 16;
/// Extra mask width over the largest correction in the escrow ring.
const ESCROW_MASK_SLACK: u64 = 128;

// Independent random streams, so a fault in one phase never shifts the
// randomness of another.
const STREAM_SESSIONS: u64 = 1;
const STREAM_ESCROW: u64 = 2;
const STREAM_VERIFY: u64 = 3;
const STREAM_PARTIAL_RING: u64 = 4;
const STREAM_PARTIAL_ESCROW: u64 = 5;
const STREAM_SHARE: u64 = 1 << 16;
const STREAM_RING: u64 = 2 << 16;

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    Config(ConfigError),
    Protocol(ProtocolError),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Config(e) => write!(f, "invalid scenario: {e}"),
            SimError::Protocol(e) => write!(f, "protocol failure: {e}"),
        }
    }
}

impl std::error::Error for SimError {}

impl From<ConfigError> for SimError {
    fn from(e: ConfigError) -> Self {
        SimError::Config(e)
    }
}

impl From<ProtocolError> for SimError {
    fn from(e: ProtocolError) -> Self {
        SimError::Protocol(e)
    }
}

fn unrecoverable(flagged: BTreeSet<CloudId>, missing: BTreeSet<CloudId>, escrow_inconsistent: bool) -> RecoveryOutcome {
    RecoveryOutcome {
        case_tag: CaseTag::Unrecoverable,
        aggregate: None,
        partial_aggregate: None,
        missing_contribution: None,
        flagged_clouds: flagged,
        missing_clouds: missing,
        escrow_inconsistent,
    }
}

/// Most common sum, ties going to the earliest announcer.
fn majority(sums: &[&IntPoly]) -> Option<IntPoly> {
    let mut best: Option<(&IntPoly, usize)> = None;
    for s in sums {
        let count = sums.iter().filter(|o| *o == s).count();
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((s, count));
        }
    }
    best.map(|(s, _)| s.clone())
}

struct Run<'a> {
    scenario: &'a Scenario,
    seed: u64,
    sessions: Sessions,
    net: Network,
    all: Vec<CloudId>,
}

impl Run<'_> {
    fn present(&self, phase: PhaseTag) -> Vec<CloudId> {
        self.all
            .iter()
            .copied()
            .filter(|c| !self.scenario.faults.is_dropped(*c, phase))
            .collect()
    }

    fn send(&mut self, from: Party, to: Party, phase: PhaseTag, payload: Payload) -> Result<Envelope, ProtocolError> {
        let env = self.sessions.envelope(from, to, phase, payload)?;
        self.net.send(env)
    }

    fn ring(
        &mut self,
        parties: &[(CloudId, &IntPoly)],
        initiator: usize,
        phase: PhaseTag,
        rng: &mut ChaCha20Rng,
    ) -> Result<IntPoly, ProtocolError> {
        ring_sum_round(parties, initiator, &self.sessions, phase, &mut self.net, rng)
    }

    fn escrow(&mut self, shares: &[&SharePolynomial], phase: PhaseTag, rng_id: u64) -> Result<Int, ProtocolError> {
        let entries: Vec<_> = shares.iter().map(|s| (s.cloud, &s.blinding.correction)).collect();
        let widest = shares.iter().map(|s| s.blinding.correction.bits()).max().unwrap_or(0);
        let mut rng = stream(self.seed, rng_id);
        escrow_round(
            &entries,
            &self.sessions,
            phase,
            widest.max(DEFAULT_MAX_BITS) + ESCROW_MASK_SLACK,
            &mut self.net,
            &mut rng,
        )
    }

    /// Issues parameters to `cloud` until it finds a witness for its own sum.
    fn witness_for(
        &mut self,
        cloud: CloudId,
        slot: usize,
        announced: &IntPoly,
        trusted: &IntPoly,
        taken: &mut BTreeSet<(u64, u64, u64)>,
        rng: &mut ChaCha20Rng,
    ) -> Result<Option<(VerificationParams, VerificationWitness)>, ProtocolError> {
        for attempt in 0..=MAX_REISSUES {
            let params = match tca_issue_for(announced, slot, attempt, PAIR_RETRIES, taken, rng) {
                Ok(p) => p,
                Err(ProtocolError::NoValidPrime) => return Ok(None),
                Err(e) => return Err(e),
            };
            let env = self.send(
                Party::Tca,
                Party::Cloud(cloud),
                PhaseTag::Verification,
                Payload::VerifyParams {
                    g_p: params.g_p,
                    t: params.t,
                    h: params.h,
                },
            )?;
            let Payload::VerifyParams { g_p, t, h } = env.payload else {
                return Err(ProtocolError::UnexpectedPayload {
                    expected: "VerifyParams",
                    got: env.payload.kind(),
                });
            };
            let params = VerificationParams { g_p, t, h };
            match cloud_solve_witness(trusted, &params) {
                Ok(w) => {
                    taken.insert((g_p, t, h));
                    return Ok(Some((params, w)));
                }
                Err(ProtocolError::Poly(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }
}

/// Runs every phase of the protocol for `scenario` under `seed`.
///
/// Identical inputs give identical transcripts. Each purpose draws from
/// its own ChaCha20 stream, so faults change only what depends on them.
pub fn run_scenario(scenario: &Scenario, seed: u64) -> Result<Transcript, SimError> {
    let keys = scenario.validate()?;
    let plan = &scenario.faults;
    let n = scenario.n();
    let creds: Vec<_> = scenario.clouds.iter().map(|c| c.credentials()).collect();
    let grants = tca_open_session(&creds, &mut stream(seed, STREAM_SESSIONS))?;
    let sessions = Sessions::from_grants(&grants);
    let mut run = Run {
        scenario,
        seed,
        net: Network::new(sessions.clone(), plan.clone()),
        sessions,
        all: (0..n).map(CloudId::from_index).collect(),
    };

    // keys
    for c in run.present(PhaseTag::Keys) {
        let k = &keys[c.index()];
        run.send(
            Party::Tca,
            Party::Cloud(c),
            PhaseTag::Keys,
            Payload::KeyGrant {
                cp: k.cp,
                np: k.np,
                g: k.g,
            },
        )?;
    }

    // distribution
    let contributors = run.present(PhaseTag::Distribution);
    let degree = scenario.effective_degree();
    let mut shares = BTreeMap::new();
    for &c in &contributors {
        let mut rng = stream(seed, STREAM_SHARE + c.index() as u64);
        let secret = scenario.clouds[c.index()].secret;
        let share = cloud_make_share(&keys[c.index()], secret, degree, &mut rng, DEFAULT_MAX_BITS).map_err(|e| match e {
            ProtocolError::Math(m @ MathError::SizeExceeded { .. }) => {
                SimError::Config(ConfigError::new("prime_bits", format!("{m}; lower prime_bits")))
            }
            other => SimError::Protocol(other),
        })?;
        shares.insert(c, share);
    }
    let mut trusted: BTreeMap<CloudId, IntPoly> = BTreeMap::new();
    let mut escrow_total = None;
    let mut escrow_bad = false;
    if contributors.len() >= 2 {
        let parties: Vec<(CloudId, &IntPoly)> = contributors.iter().map(|c| (*c, &shares[c].poly)).collect();
        for (k, c) in contributors.iter().enumerate() {
            let mut rng = stream(seed, STREAM_RING + c.index() as u64);
            let sum = run.ring(&parties, k, PhaseTag::Distribution, &mut rng)?;
            trusted.insert(*c, sum);
        }
        let all_shares: Vec<_> = contributors.iter().map(|c| &shares[c]).collect();
        match run.escrow(&all_shares, PhaseTag::Distribution, STREAM_ESCROW) {
            Ok(total) => escrow_total = Some(total),
            Err(ProtocolError::NegativeResult) => escrow_bad = true,
            Err(e) => return Err(e.into()),
        }
    }

    // verification
    let announcers: Vec<CloudId> = run
        .present(PhaseTag::Verification)
        .into_iter()
        .filter(|c| trusted.contains_key(c))
        .collect();
    let mut heard: BTreeMap<(Party, CloudId), IntPoly> = BTreeMap::new();
    for &a in &announcers {
        let targets = std::iter::once(Party::Tca).chain(announcers.iter().filter(|p| **p != a).map(|p| Party::Cloud(*p)));
        for to in targets.collect::<Vec<_>>() {
            let env = run.send(
                Party::Cloud(a),
                to,
                PhaseTag::Verification,
                Payload::SumAnnounce { sum: trusted[&a].clone() },
            )?;
            if let Payload::SumAnnounce { sum } = env.payload {
                heard.insert((to, a), sum);
            }
        }
    }
    let mut vrng = stream(seed, STREAM_VERIFY);
    let mut taken = BTreeSet::new();
    let mut witnesses = BTreeMap::new();
    for (slot, &a) in announcers.iter().enumerate() {
        let announced = heard[&(Party::Tca, a)].clone();
        if let Some(w) = run.witness_for(a, slot, &announced, &trusted[&a], &mut taken, &mut vrng)? {
            witnesses.insert(a, w);
        }
    }
    let mut flagged = BTreeSet::new();
    for &a in &announcers {
        let Some((params, witness)) = witnesses.get(&a) else {
            continue;
        };
        let verdicts: Vec<Verdict> = announcers
            .iter()
            .filter(|p| **p != a)
            .map(|&peer| Verdict {
                peer,
                pass: cloud_verify_peer(&heard[&(Party::Cloud(a), peer)], witness, params),
            })
            .collect();
        let accused: Vec<CloudId> = verdicts.iter().filter(|v| !v.pass).map(|v| v.peer).collect();
        let env = run
            .sessions
            .envelope(Party::Cloud(a), Party::Tca, PhaseTag::Verification, Payload::VerifyFlag { accused })?;
        if let Payload::VerifyFlag { accused } = run.net.send_report(env, verdicts)?.payload {
            flagged.extend(accused);
        }
    }

    // recovery
    let missing: BTreeSet<CloudId> = plan.dropouts.iter().map(|d| d.cloud).collect();
    let excluded: BTreeSet<CloudId> = flagged.union(&missing).copied().collect();
    let outcome = if !assess_recoverability(n, excluded.len()) {
        unrecoverable(flagged, missing, false)
    } else if escrow_bad {
        unrecoverable(flagged, missing, true)
    } else {
        let candidates: Vec<&IntPoly> = announcers
            .iter()
            .filter(|a| !flagged.contains(a))
            .map(|a| &heard[&(Party::Tca, *a)])
            .collect();
        recover(&mut run, &shares, &contributors, majority(&candidates), escrow_total, flagged, missing, &excluded)?
    };
    for c in run.present(PhaseTag::Recovery) {
        run.send(
            Party::Tca,
            Party::Cloud(c),
            PhaseTag::Recovery,
            Payload::RecoveryReport {
                case_tag: outcome.case_tag,
                aggregate: outcome.aggregate.clone(),
            },
        )?;
    }
    Ok(Transcript {
        records: run.net.into_records(),
        outcome,
    })
}

#[allow(clippy::too_many_arguments)]
fn recover(
    run: &mut Run<'_>,
    shares: &BTreeMap<CloudId, SharePolynomial>,
    contributors: &[CloudId],
    full_sum: Option<IntPoly>,
    escrow_total: Option<Int>,
    flagged: BTreeSet<CloudId>,
    missing: BTreeSet<CloudId>,
    excluded: &BTreeSet<CloudId>,
) -> Result<RecoveryOutcome, ProtocolError> {
    let (Some(full_sum), Some(escrow_total)) = (full_sum, escrow_total) else {
        return Ok(unrecoverable(flagged, missing, false));
    };
    let aggregate = match recover_aggregate(&full_sum, &[escrow_total]) {
        Ok(s) => s,
        Err(ProtocolError::NegativeResult) => return Ok(unrecoverable(flagged, missing, true)),
        Err(e) => return Err(e),
    };
    let mut outcome = RecoveryOutcome {
        case_tag: CaseTag::AllHonest,
        aggregate: Some(aggregate.clone()),
        partial_aggregate: None,
        missing_contribution: None,
        flagged_clouds: flagged,
        missing_clouds: missing,
        escrow_inconsistent: false,
    };
    if excluded.is_empty() {
        return Ok(outcome);
    }
    outcome.case_tag = CaseTag::MissingShareRecovered;
    let absent: Vec<CloudId> = contributors.iter().filter(|c| excluded.contains(c)).copied().collect();
    if absent.is_empty() {
        // the excluded clouds never entered the sum
        return Ok(outcome);
    }
    let remaining: Vec<CloudId> = contributors.iter().filter(|c| !excluded.contains(c)).copied().collect();
    let parties: Vec<(CloudId, &IntPoly)> = remaining.iter().map(|c| (*c, &shares[c].poly)).collect();
    let mut rng = stream(run.seed, STREAM_PARTIAL_RING);
    let partial_sum = run.ring(&parties, 0, PhaseTag::Recovery, &mut rng)?;
    let env = run.send(
        Party::Cloud(remaining[0]),
        Party::Tca,
        PhaseTag::Recovery,
        Payload::SumAnnounce { sum: partial_sum },
    )?;
    let Payload::SumAnnounce { sum: partial_sum } = env.payload else {
        unreachable!("faults never change the payload kind");
    };
    let remaining_shares: Vec<_> = remaining.iter().map(|c| &shares[c]).collect();
    let split = run
        .escrow(&remaining_shares, PhaseTag::Recovery, STREAM_PARTIAL_ESCROW)
        .and_then(|partial_escrow| split_aggregate(&absent, &aggregate, partial_escrow, &partial_sum));
    match split {
        Ok((partial, rest)) => {
            outcome.partial_aggregate = Some(partial);
            outcome.missing_contribution = Some(rest);
            Ok(outcome)
        }
        Err(ProtocolError::NegativeResult) => Ok(unrecoverable(outcome.flagged_clouds, outcome.missing_clouds, true)),
        Err(e) => Err(e),
    }
}

/// Partial aggregate of the remaining clouds and the rest of `aggregate`.
fn split_aggregate(
    absent: &[CloudId],
    aggregate: &Int,
    partial_escrow: Int,
    partial_sum: &IntPoly,
) -> Result<(Int, Int), ProtocolError> {
    if absent.len() == 1 {
        return recover_missing(absent, aggregate, &[partial_escrow], partial_sum);
    }
    let partial = recover_aggregate(partial_sum, &[partial_escrow])?;
    if &partial > aggregate {
        return Err(ProtocolError::NegativeResult);
    }
    let rest = aggregate - &partial;
    Ok((partial, rest))
}
