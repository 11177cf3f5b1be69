//! Voter-side submission and the tallier-side submission server.
//!
//! A voter splits its ballot into additive shares and sends one
//! authenticated share frame to each tallier, resending until the tallier
//! confirms receipt and verification. The server keeps exactly one accepted
//! share per voter tag: redelivery of the same message is re-confirmed
//! (idempotence), a second vote under the same tag is silently ignored.

use crate::field::{FieldElement, PrimeModulus};
use crate::rules::{Ballot, ElectionConfig};
use crate::sharing::{additive_share, VoterTag};
use crate::transport::{
    decode_elements, derive_voter_key, encode_elements, Frame, FrameHeader, MessageKind,
};
use rand::RngCore;
use std::collections::BTreeMap;
use thiserror::Error;

/// Resend attempts per tallier before the voter gives up.
pub const SUBMIT_ATTEMPTS: u32 = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubmitError {
    #[error("tallier {tallier} unreachable after {SUBMIT_ATTEMPTS} attempts")]
    Timeout { tallier: u16 },
    #[error("confirmation from tallier {tallier} failed verification")]
    BadConfirmation { tallier: u16 },
}

/// How a voter reaches one tallier: a request with an optional response.
/// `None` models a dropped message or a server that refused to confirm.
pub trait VoterLink {
    fn request(&mut self, tallier: u16, body: Vec<u8>) -> Option<Vec<u8>>;
}

fn share_payload(
    nonce: u64,
    tag: &str,
    entries: &[FieldElement],
    modulus: PrimeModulus,
) -> Vec<u8> {
    let mut payload = Vec::with_capacity(10 + tag.len() + entries.len() * modulus.byte_len());
    payload.extend_from_slice(&nonce.to_be_bytes());
    payload.extend_from_slice(&(tag.len() as u16).to_be_bytes());
    payload.extend_from_slice(tag.as_bytes());
    payload.extend_from_slice(&encode_elements(entries, modulus));
    payload
}

fn parse_share_payload(
    payload: &[u8],
    modulus: PrimeModulus,
) -> Option<(u64, String, Vec<FieldElement>)> {
    if payload.len() < 10 {
        return None;
    }
    let nonce = u64::from_be_bytes(payload[..8].try_into().ok()?);
    let tag_len = u16::from_be_bytes(payload[8..10].try_into().ok()?) as usize;
    if payload.len() < 10 + tag_len {
        return None;
    }
    let tag = std::str::from_utf8(&payload[10..10 + tag_len])
        .ok()?
        .to_string();
    // tags travel through line-oriented records (reconciliation, ballot
    // files), so control characters and the field separator are refused
    if tag.is_empty() || tag.chars().any(|c| c.is_control() || c == ';') {
        return None;
    }
    let entries = decode_elements(&payload[10 + tag_len..], modulus).ok()?;
    Some((nonce, tag, entries))
}

/// Builds the authenticated share frame a voter sends to one tallier.
pub fn build_share_frame(
    session_secret: &[u8; 32],
    session_id: [u8; 16],
    nonce: u64,
    tag: &str,
    tallier: u16,
    entries: &[FieldElement],
    modulus: PrimeModulus,
) -> Vec<u8> {
    let frame = Frame::new(
        FrameHeader {
            kind: MessageKind::VoterShare,
            session_id,
            sender: 0,
            round: 0,
        },
        share_payload(nonce, tag, entries, modulus),
    );
    let key = derive_voter_key(session_secret, tag, tallier);
    frame.encode_body(&key)
}

/// One tallier's submission endpoint.
pub struct SubmissionServer {
    tallier: u16,
    session_secret: [u8; 32],
    session_id: [u8; 16],
    modulus: PrimeModulus,
    entry_count: usize,
    accepted: BTreeMap<String, (u64, Vec<FieldElement>)>,
}

impl SubmissionServer {
    pub fn new(
        tallier: u16,
        session_secret: [u8; 32],
        session_id: [u8; 16],
        config: &ElectionConfig,
    ) -> Self {
        SubmissionServer {
            tallier,
            session_secret,
            session_id,
            modulus: config.modulus,
            entry_count: config.candidate_count(),
            accepted: BTreeMap::new(),
        }
    }

    /// Handles one submission body (the frame without its length prefix).
    /// Returns the confirmation body iff the message verified; anything
    /// malformed, tampered or duplicate-voting gets no confirmation.
    pub fn handle(&mut self, body: &[u8]) -> Option<Vec<u8>> {
        let frame = Frame::decode_unverified(body).ok()?;
        if frame.header.kind != MessageKind::VoterShare
            || frame.header.session_id != self.session_id
        {
            return None;
        }
        let (nonce, tag, entries) = parse_share_payload(&frame.payload, self.modulus)?;
        if entries.len() != self.entry_count {
            return None;
        }
        let key = derive_voter_key(&self.session_secret, &tag, self.tallier);
        if !Frame::verify_mac(body, &key) {
            return None;
        }
        match self.accepted.get(&tag) {
            // redelivery of the accepted message: confirm again
            Some((stored_nonce, _)) if *stored_nonce == nonce => {}
            // a second vote under this tag: only the first is processed
            Some(_) => return None,
            None => {
                self.accepted.insert(tag.clone(), (nonce, entries));
            }
        }
        let confirm = Frame::new(
            FrameHeader {
                kind: MessageKind::Confirm,
                session_id: self.session_id,
                sender: self.tallier,
                round: 0,
            },
            nonce.to_be_bytes().to_vec(),
        );
        Some(confirm.encode_body(&key))
    }

    pub fn accepted_count(&self) -> usize {
        self.accepted.len()
    }

    /// Hands the accepted shares over to the tallying phase.
    pub fn into_accepted(self) -> BTreeMap<String, Vec<FieldElement>> {
        self.accepted
            .into_iter()
            .map(|(tag, (_, entries))| (tag, entries))
            .collect()
    }
}

/// Splits the ballot and submits one share to each tallier, resending until
/// every tallier has confirmed.
pub fn voter_submit(
    config: &ElectionConfig,
    session_secret: &[u8; 32],
    session_id: [u8; 16],
    ballot: &Ballot,
    rng: &mut (impl RngCore + ?Sized),
    link: &mut dyn VoterLink,
) -> Result<(), SubmitError> {
    let modulus = config.modulus;
    let entries: Vec<FieldElement> = ballot.scores.iter().map(|&s| modulus.elem(s)).collect();
    let tag = &ballot.voter_tag.0;
    let shares = additive_share(&entries, config.talliers, &VoterTag(tag.clone()), rng)
        .expect("config guarantees D >= 2");
    let nonce = rng.next_u64();

    for share in &shares {
        let tallier = share.tallier_index;
        let body = build_share_frame(
            session_secret,
            session_id,
            nonce,
            tag,
            tallier,
            &share.entries,
            modulus,
        );
        let key = derive_voter_key(session_secret, tag, tallier);
        let mut confirmed = false;
        for _ in 0..SUBMIT_ATTEMPTS {
            let Some(response) = link.request(tallier, body.clone()) else {
                continue;
            };
            let confirm = Frame::decode(&response, &key)
                .map_err(|_| SubmitError::BadConfirmation { tallier })?;
            if confirm.header.kind != MessageKind::Confirm || confirm.payload != nonce.to_be_bytes()
            {
                return Err(SubmitError::BadConfirmation { tallier });
            }
            confirmed = true;
            break;
        }
        if !confirmed {
            return Err(SubmitError::Timeout { tallier });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeModulus;
    use crate::rules::RuleKind;
    use crate::sharing::additive_reconstruct;
    use crate::sharing::ShareVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn config() -> ElectionConfig {
        ElectionConfig::new(
            RuleKind::Plurality,
            vec!["A".into(), "B".into(), "C".into()],
            10,
            1,
            None,
            3,
            PrimeModulus::MERSENNE_13,
        )
        .unwrap()
    }

    fn servers(cfg: &ElectionConfig) -> Vec<SubmissionServer> {
        (1..=3)
            .map(|d| SubmissionServer::new(d, [9u8; 32], [4u8; 16], cfg))
            .collect()
    }

    struct DirectLink<'a>(&'a mut [SubmissionServer]);
    impl VoterLink for DirectLink<'_> {
        fn request(&mut self, tallier: u16, body: Vec<u8>) -> Option<Vec<u8>> {
            self.0[(tallier - 1) as usize].handle(&body)
        }
    }

    fn ballot(tag: &str, scores: Vec<u64>) -> Ballot {
        Ballot {
            voter_tag: VoterTag::from(tag),
            scores,
        }
    }

    #[test]
    fn honest_submission_confirms_and_reconstructs() {
        let cfg = config();
        let mut servers = servers(&cfg);
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        voter_submit(
            &cfg,
            &[9u8; 32],
            [4u8; 16],
            &ballot("v1", vec![0, 1, 0]),
            &mut rng,
            &mut DirectLink(&mut servers),
        )
        .unwrap();
        assert!(servers.iter().all(|s| s.accepted_count() == 1));
        let shares: Vec<ShareVector> = servers
            .iter()
            .enumerate()
            .map(|(i, s)| ShareVector {
                tallier_index: i as u16 + 1,
                entries: s.accepted.get("v1").unwrap().1.clone(),
                voter_tag: VoterTag::from("v1"),
            })
            .collect();
        let recon = additive_reconstruct(&shares, 3).unwrap();
        assert_eq!(
            recon.iter().map(|e| e.value()).collect::<Vec<_>>(),
            vec![0, 1, 0]
        );
    }

    #[test]
    fn second_vote_same_tag_is_ignored_first_retained() {
        let cfg = config();
        let mut servers = servers(&cfg);
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        voter_submit(
            &cfg,
            &[9u8; 32],
            [4u8; 16],
            &ballot("v1", vec![1, 0, 0]),
            &mut rng,
            &mut DirectLink(&mut servers),
        )
        .unwrap();
        // the same voter tries to vote again with a fresh nonce
        let second = voter_submit(
            &cfg,
            &[9u8; 32],
            [4u8; 16],
            &ballot("v1", vec![0, 0, 1]),
            &mut rng,
            &mut DirectLink(&mut servers),
        );
        assert_eq!(second, Err(SubmitError::Timeout { tallier: 1 }));
        // first ballot still reconstructs
        let shares: Vec<ShareVector> = servers
            .iter()
            .enumerate()
            .map(|(i, s)| ShareVector {
                tallier_index: i as u16 + 1,
                entries: s.accepted.get("v1").unwrap().1.clone(),
                voter_tag: VoterTag::from("v1"),
            })
            .collect();
        let recon = additive_reconstruct(&shares, 3).unwrap();
        assert_eq!(
            recon.iter().map(|e| e.value()).collect::<Vec<_>>(),
            vec![1, 0, 0]
        );
    }

    #[test]
    fn same_nonce_redelivery_is_idempotent() {
        let cfg = config();
        let mut servers = servers(&cfg);
        let entries: Vec<FieldElement> =
            [1u64, 0, 0].iter().map(|&v| cfg.modulus.elem(v)).collect();
        let body = build_share_frame(&[9u8; 32], [4u8; 16], 42, "v1", 1, &entries, cfg.modulus);
        assert!(servers[0].handle(&body).is_some());
        assert!(servers[0].handle(&body).is_some());
        assert_eq!(servers[0].accepted_count(), 1);
    }

    #[test]
    fn tampered_share_gets_no_confirmation_then_retry_succeeds() {
        let cfg = config();
        let mut servers = servers(&cfg);

        // a link that flips one payload bit on the first attempt to each tallier
        struct Tampering<'a> {
            servers: &'a mut [SubmissionServer],
            tampered: [bool; 3],
        }
        impl VoterLink for Tampering<'_> {
            fn request(&mut self, tallier: u16, mut body: Vec<u8>) -> Option<Vec<u8>> {
                let idx = (tallier - 1) as usize;
                if !self.tampered[idx] {
                    self.tampered[idx] = true;
                    let flip = body.len() / 2;
                    body[flip] ^= 0x01;
                }
                self.servers[idx].handle(&body)
            }
        }

        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let mut link = Tampering {
            servers: &mut servers,
            tampered: [false; 3],
        };
        voter_submit(
            &cfg,
            &[9u8; 32],
            [4u8; 16],
            &ballot("v1", vec![0, 0, 1]),
            &mut rng,
            &mut link,
        )
        .unwrap();
        assert!(servers.iter().all(|s| s.accepted_count() == 1));
    }

    #[test]
    fn unreachable_tallier_times_out() {
        let cfg = config();
        struct Dead;
        impl VoterLink for Dead {
            fn request(&mut self, _tallier: u16, _body: Vec<u8>) -> Option<Vec<u8>> {
                None
            }
        }
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let result = voter_submit(
            &cfg,
            &[9u8; 32],
            [4u8; 16],
            &ballot("v1", vec![1, 0, 0]),
            &mut rng,
            &mut Dead,
        );
        assert_eq!(result, Err(SubmitError::Timeout { tallier: 1 }));
    }

    #[test]
    fn forged_confirmation_is_an_error() {
        let cfg = config();
        struct Forger;
        impl VoterLink for Forger {
            fn request(&mut self, _tallier: u16, body: Vec<u8>) -> Option<Vec<u8>> {
                Some(body) // echoes the request, which cannot verify as a confirm
            }
        }
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let result = voter_submit(
            &cfg,
            &[9u8; 32],
            [4u8; 16],
            &ballot("v1", vec![1, 0, 0]),
            &mut rng,
            &mut Forger,
        );
        assert_eq!(result, Err(SubmitError::BadConfirmation { tallier: 1 }));
    }
}
