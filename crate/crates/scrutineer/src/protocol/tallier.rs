//! The tallier's end-to-end tallying pass, run identically by every
//! tallier over its own accepted shares.
//!
//! Ballots stay additively shared (all-or-nothing secrecy) up to and
//! including aggregation; threshold resharing happens only for the values
//! the shared circuits consume: per-ballot validation entries and the
//! aggregate score vector entering selection.

use super::select::select_top_k;
use super::validate::{validate_ballots, RejectReason};
use super::{ElectionPhase, PhasedError};
use crate::field::FieldElement;
use crate::mpc::{MpcError, TallierEngine};
use crate::rules::ElectionConfig;
use crate::sharing::{additive_reconstruct, ShareVector, VoterTag};
use crate::transport::MessageKind;
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, BTreeSet};

/// What one tallier brings into the tallying phase.
pub struct TallierInputs {
    /// Accepted share vectors by voter tag.
    pub accepted: BTreeMap<String, Vec<FieldElement>>,
}

/// The public outcome every tallier independently arrives at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TallierOutcome {
    /// No voter was accepted by every tallier.
    Empty,
    Completed {
        winners: Vec<usize>,
        /// Reconciled voter order with each voter's verdict.
        verdicts: Vec<(String, Option<RejectReason>)>,
        /// Recovered ballots of rejected voters, as dishonesty evidence.
        evidence: BTreeMap<String, Vec<u64>>,
    },
}

fn phased<T>(phase: ElectionPhase, r: Result<T, MpcError>) -> Result<T, PhasedError> {
    r.map_err(|source| PhasedError { phase, source })
}

pub fn tallier_main(
    engine: &mut TallierEngine,
    config: &ElectionConfig,
    inputs: &TallierInputs,
) -> Result<TallierOutcome, PhasedError> {
    let m = config.candidate_count();

    // Step: agree on the electorate. Talliers exchange accepted voter tags
    // and proceed on the intersection, then cross-check a digest of it.
    let voters = phased(
        ElectionPhase::Reconciliation,
        reconcile(engine, inputs.accepted.keys()),
    )?;
    if voters.is_empty() {
        return Ok(TallierOutcome::Empty);
    }
    engine.note(format!("reconciled electorate of {}", voters.len()));

    // Validation first, so illegal ballots never enter the tally. Each
    // ballot's entries get reshared to threshold form for the circuits.
    let (failures, evidence) = phased(
        ElectionPhase::Validation,
        (|| {
            let mut summands = Vec::with_capacity(voters.len() * m);
            for tag in &voters {
                summands.extend_from_slice(&inputs.accepted[tag]);
            }
            let shared_entries = engine.input_additive(&summands)?;
            let per_voter: Vec<Vec<_>> = shared_entries.chunks(m).map(|c| c.to_vec()).collect();
            let failures = validate_ballots(engine, config, &per_voter)?;
            let rejected: Vec<(String, RejectReason)> = voters
                .iter()
                .zip(&failures)
                .filter_map(|(tag, failure)| failure.map(|reason| (tag.clone(), reason)))
                .collect();
            let evidence = recover_evidence(engine, config, &inputs.accepted, &rejected)?;
            Ok((failures, evidence))
        })(),
    )?;

    // Aggregation over the surviving ballots is local share addition,
    // followed by one resharing round into the threshold circuit.
    let score_shares = phased(ElectionPhase::Aggregation, {
        let mut aggregate = vec![config.modulus.zero(); m];
        for (tag, failure) in voters.iter().zip(&failures) {
            if failure.is_some() {
                continue;
            }
            for (acc, entry) in aggregate.iter_mut().zip(&inputs.accepted[tag]) {
                *acc += *entry;
            }
        }
        engine.note("aggregated accepted ballots");
        engine.input_additive(&aggregate)
    })?;

    let winners = phased(
        ElectionPhase::Selection,
        select_top_k(engine, &score_shares, config.winners),
    )?;
    engine.note(format!("selected winners {winners:?}"));

    Ok(TallierOutcome::Completed {
        winners,
        verdicts: voters.iter().cloned().zip(failures).collect(),
        evidence,
    })
}

/// Exchanges accepted voter tags, intersects, and confirms the digest of
/// the agreed set. A digest mismatch means the talliers diverged.
pub fn reconcile<'a>(
    engine: &mut TallierEngine,
    my_tags: impl Iterator<Item = &'a String>,
) -> Result<Vec<String>, MpcError> {
    let mine: Vec<&String> = my_tags.collect();
    let payload = mine
        .iter()
        .map(|s| s.as_str())
        .collect::<Vec<_>>()
        .join("\n")
        .into_bytes();
    let inbox = engine.exchange_bytes(MessageKind::VoterSet, &payload)?;

    let mut intersection: Option<BTreeSet<String>> = None;
    for bytes in &inbox {
        let set: BTreeSet<String> = std::str::from_utf8(bytes)
            .map_err(|_| MpcError::Abort("voter set payload is not text".into()))?
            .lines()
            .filter(|l| !l.is_empty())
            .map(|l| l.to_string())
            .collect();
        intersection = Some(match intersection {
            None => set,
            Some(prev) => prev.intersection(&set).cloned().collect(),
        });
    }
    let agreed: Vec<String> = intersection.unwrap_or_default().into_iter().collect();

    let digest: [u8; 32] = Sha256::new()
        .chain_update(agreed.join("\n").as_bytes())
        .finalize()
        .into();
    let confirmations = engine.exchange_bytes(MessageKind::VoterSet, &digest)?;
    for (party, confirmation) in confirmations.iter().enumerate() {
        if confirmation.as_slice() != digest {
            return Err(MpcError::Abort(format!(
                "tallier {} diverged on the accepted voter set",
                party + 1
            )));
        }
    }
    Ok(agreed)
}

/// Pools additive shares of each rejected ballot and reconstructs it as
/// evidence. Reconstruction takes every tallier's participation, which the
/// all-or-nothing sharing already forces.
fn recover_evidence(
    engine: &mut TallierEngine,
    config: &ElectionConfig,
    accepted: &BTreeMap<String, Vec<FieldElement>>,
    rejected: &[(String, RejectReason)],
) -> Result<BTreeMap<String, Vec<u64>>, MpcError> {
    if rejected.is_empty() {
        return Ok(BTreeMap::new());
    }
    let m = config.candidate_count();
    let mut mine = Vec::with_capacity(rejected.len() * m);
    for (tag, _) in rejected {
        mine.extend_from_slice(&accepted[tag]);
    }
    let payload = crate::transport::encode_elements(&mine, config.modulus);
    let inbox = engine.exchange_bytes(MessageKind::Evidence, &payload)?;

    let mut evidence = BTreeMap::new();
    for (idx, (tag, reason)) in rejected.iter().enumerate() {
        let shares: Vec<ShareVector> = inbox
            .iter()
            .enumerate()
            .map(|(party, bytes)| {
                let elems = crate::transport::decode_elements(bytes, config.modulus)
                    .map_err(|e| MpcError::Abort(format!("bad evidence payload: {e}")))?;
                if elems.len() != rejected.len() * m {
                    return Err(MpcError::Abort("short evidence payload".into()));
                }
                Ok(ShareVector {
                    tallier_index: party as u16 + 1,
                    entries: elems[idx * m..(idx + 1) * m].to_vec(),
                    voter_tag: VoterTag(tag.clone()),
                })
            })
            .collect::<Result<_, _>>()?;
        let ballot = additive_reconstruct(&shares, config.talliers)
            .map_err(|e| MpcError::Abort(format!("evidence reconstruction failed: {e}")))?;
        let scores: Vec<u64> = ballot.iter().map(|e| e.value()).collect();
        engine.note(format!(
            "rejection-evidence voter={tag} reason={} ballot={scores:?}",
            reason.label()
        ));
        evidence.insert(tag.clone(), scores);
    }
    Ok(evidence)
}
