use num_bigint::{BigUint, RandBigInt};
use rand::Rng;

use super::{Envelope, Party, Payload, PhaseTag, ProtocolError, Sessions, Transport};
use crate::gfpoly::Poly;
use crate::{CloudId, Int, IntPoly};

/// Mask polynomial of the given degree, every coefficient uniform in `[0, 2^64)`.
pub fn random_mask<R: Rng + ?Sized>(degree: usize, rng: &mut R) -> IntPoly {
    Poly::new((0..=degree).map(|_| BigUint::from(rng.gen::<u64>())).collect())
}

fn accumulator(env: Envelope) -> Result<IntPoly, ProtocolError> {
    match env.payload {
        Payload::ShareAccumulator { sum, .. } => Ok(sum),
        other => Err(ProtocolError::UnexpectedPayload {
            expected: "ShareAccumulator",
            got: other.kind(),
        }),
    }
}

fn escrow_amount(env: Envelope) -> Result<Int, ProtocolError> {
    match env.payload {
        Payload::CorrectionEscrow { amount } => Ok(amount),
        other => Err(ProtocolError::UnexpectedPayload {
            expected: "CorrectionEscrow",
            got: other.kind(),
        }),
    }
}

fn unmask(total: &IntPoly, mask: &IntPoly) -> Result<IntPoly, ProtocolError> {
    let len = total.coeffs().len().max(mask.coeffs().len());
    let mut out = Vec::with_capacity(len);
    for j in 0..len {
        let (t, m) = (total.coeff(j), mask.coeff(j));
        if t < m {
            return Err(ProtocolError::SumUnderflow);
        }
        out.push(t - m);
    }
    Ok(Poly::new(out))
}

/// One masked ring pass started by `parties[initiator]`.
///
/// The initiator sends `M + f_initiator` to the next party in `parties`
/// order, each party adds its own polynomial and forwards, and the last
/// hop returns to the initiator, which removes `M`. Only the initiator
/// learns the result.
pub fn ring_sum_round<T: Transport + ?Sized, R: Rng + ?Sized>(
    parties: &[(CloudId, &IntPoly)],
    initiator: usize,
    sessions: &Sessions,
    phase: PhaseTag,
    transport: &mut T,
    rng: &mut R,
) -> Result<IntPoly, ProtocolError> {
    let n = parties.len();
    if n < 2 {
        return Err(ProtocolError::TooFewClouds(n));
    }
    let mut degree = None;
    for (_, p) in parties {
        match (degree, p.degree()) {
            (_, None) => {}
            (None, Some(d)) => degree = Some(d),
            (Some(a), Some(b)) if a != b => return Err(ProtocolError::DegreeMismatch),
            _ => {}
        }
    }
    let (origin, own) = parties[initiator];
    let origin = Party::Cloud(origin);
    let mask = random_mask(degree.unwrap_or(0), rng);
    let mut acc = &mask + own;
    for step in 1..=n {
        let from = Party::Cloud(parties[(initiator + step - 1) % n].0);
        let (to_id, poly) = parties[(initiator + step) % n];
        let to = Party::Cloud(to_id);
        let payload = Payload::ShareAccumulator {
            initiator: origin,
            sum: acc,
        };
        let received = accumulator(transport.send(sessions.envelope(from, to, phase, payload)?)?)?;
        acc = if step == n { received } else { &received + poly };
    }
    unmask(&acc, &mask)
}

/// Masked escrow of blinding corrections, started and closed by the authority.
///
/// The authority sends a mask of `mask_bits` random bits to the first
/// cloud; each cloud adds its correction and forwards, and the last one
/// returns the running total. The authority learns only the sum.
pub fn escrow_round<T: Transport + ?Sized, R: Rng + ?Sized>(
    entries: &[(CloudId, &Int)],
    sessions: &Sessions,
    phase: PhaseTag,
    mask_bits: u64,
    transport: &mut T,
    rng: &mut R,
) -> Result<Int, ProtocolError> {
    if entries.is_empty() {
        return Ok(Int::default());
    }
    let mask = rng.gen_biguint(mask_bits);
    let mut amount = mask.clone();
    let mut from = Party::Tca;
    for (cloud, correction) in entries {
        let to = Party::Cloud(*cloud);
        let env = sessions.envelope(from, to, phase, Payload::CorrectionEscrow { amount })?;
        amount = escrow_amount(transport.send(env)?)? + *correction;
        from = to;
    }
    let env = sessions.envelope(from, Party::Tca, phase, Payload::CorrectionEscrow { amount })?;
    let total = escrow_amount(transport.send(env)?)?;
    if total < mask {
        return Err(ProtocolError::NegativeResult);
    }
    Ok(total - mask)
}
