//! One tallier's view of the shared-circuit computation.
//!
//! Linear operations are local; everything interactive goes through a
//! blocking all-to-all exchange that bumps the round counter and the
//! transcript. Opened values split into two classes: `open_batch` records an
//! intentional disclosure, `reveal_masked_batch` records a protocol-internal
//! reveal of an information-theoretically masked value.

use super::dealer::DealerStream;
use super::transcript::{Transcript, TranscriptEvent};
use super::{CircuitStats, DisclosureKind, MaskKind, MpcError, SessionParams};
use crate::field::{FieldElement, PrimeModulus};
use crate::sharing::lagrange_weights_at_zero;
use crate::transport::{
    decode_elements, encode_elements, Channels, Frame, FrameHeader, MessageKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// This tallier's share of an unknown field element, tagged with its
/// session. Degree stays at the sharing threshold through every operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shared {
    value: FieldElement,
    session: u32,
}

impl Shared {
    /// The raw share this tallier holds. This is the tallier's own view,
    /// not the hidden plaintext; the secrecy checks sample it directly.
    pub fn local_share(&self) -> FieldElement {
        self.value
    }
}

pub struct TallierEngine {
    params: SessionParams,
    me: u16,
    chans: Box<dyn Channels>,
    rng: ChaCha20Rng,
    dealer: DealerStream,
    /// Lagrange weights over parties `1..=t+1` (primary reconstruction).
    weights_low: Vec<FieldElement>,
    /// Weights over parties `D-t..=D` (consistency cross-check).
    weights_high: Vec<FieldElement>,
    inv_two: FieldElement,
    session_tag: u32,
    round: u64,
    stats: CircuitStats,
    transcript: Transcript,
}

impl TallierEngine {
    pub fn new(params: SessionParams, chans: Box<dyn Channels>) -> Self {
        let me = chans.me();
        assert_eq!(chans.party_count(), params.talliers);
        let modulus = params.modulus;
        let d = params.talliers as usize;
        let t = params.threshold;
        assert!(2 * t < d, "honest majority requires t < D/2");

        let low: Vec<FieldElement> = (1..=t as u64 + 1).map(|i| modulus.elem(i)).collect();
        let high: Vec<FieldElement> = ((d - t) as u64..=d as u64)
            .map(|i| modulus.elem(i))
            .collect();
        let session_tag = u32::from_be_bytes(params.session_id[..4].try_into().unwrap());

        let digest = Sha256::new()
            .chain_update(b"tallier-rng")
            .chain_update(params.seed.to_be_bytes())
            .chain_update(me.to_be_bytes())
            .finalize();
        let mut rng_seed = [0u8; 32];
        rng_seed.copy_from_slice(&digest);

        TallierEngine {
            me,
            weights_low: lagrange_weights_at_zero(&low),
            weights_high: lagrange_weights_at_zero(&high),
            inv_two: modulus.elem(2).inverse().expect("odd prime"),
            session_tag,
            rng: ChaCha20Rng::from_seed(rng_seed),
            dealer: DealerStream::new(params.seed, modulus, t, me),
            round: 0,
            stats: CircuitStats::default(),
            transcript: Transcript::new(me),
            chans,
            params,
        }
    }

    pub fn me(&self) -> u16 {
        self.me
    }

    pub fn party_count(&self) -> u16 {
        self.params.talliers
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.params.modulus
    }

    pub fn threshold(&self) -> usize {
        self.params.threshold
    }

    pub fn stats(&self) -> &CircuitStats {
        &self.stats
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn export_transcript(&self) -> String {
        self.transcript.export_text(&self.stats)
    }

    /// Adds a phase marker to the transcript.
    pub fn note(&mut self, text: impl Into<String>) {
        self.transcript.record(TranscriptEvent::Note {
            round: self.round,
            text: text.into(),
        });
    }

    pub(crate) fn wrap(&self, value: FieldElement) -> Shared {
        Shared {
            value,
            session: self.session_tag,
        }
    }

    fn unwrap(&self, shared: &Shared) -> Result<FieldElement, MpcError> {
        if shared.session != self.session_tag {
            return Err(MpcError::Session);
        }
        Ok(shared.value)
    }

    // ---- local (non-interactive) share arithmetic ----

    /// A public constant as a shared value (constant polynomial).
    pub fn constant(&self, value: u64) -> Shared {
        self.wrap(self.params.modulus.elem(value))
    }

    pub fn add(&self, x: &Shared, y: &Shared) -> Result<Shared, MpcError> {
        Ok(self.wrap(self.unwrap(x)? + self.unwrap(y)?))
    }

    pub fn sub(&self, x: &Shared, y: &Shared) -> Result<Shared, MpcError> {
        Ok(self.wrap(self.unwrap(x)? - self.unwrap(y)?))
    }

    pub fn neg(&self, x: &Shared) -> Result<Shared, MpcError> {
        Ok(self.wrap(-self.unwrap(x)?))
    }

    pub fn add_public(&self, x: &Shared, c: FieldElement) -> Result<Shared, MpcError> {
        Ok(self.wrap(self.unwrap(x)? + c))
    }

    pub fn sub_public(&self, x: &Shared, c: FieldElement) -> Result<Shared, MpcError> {
        Ok(self.wrap(self.unwrap(x)? - c))
    }

    /// Multiplication by a public scalar; local, consumes nothing.
    pub fn scale_public(&self, x: &Shared, c: FieldElement) -> Result<Shared, MpcError> {
        Ok(self.wrap(self.unwrap(x)? * c))
    }

    pub fn sum(&self, values: &[Shared]) -> Result<Shared, MpcError> {
        let mut acc = self.params.modulus.zero();
        for v in values {
            acc += self.unwrap(v)?;
        }
        Ok(self.wrap(acc))
    }

    // ---- round exchanges ----

    fn header(&self, kind: MessageKind) -> FrameHeader {
        FrameHeader {
            kind,
            session_id: self.params.session_id,
            sender: self.me,
            round: self.round as u32,
        }
    }

    fn check_incoming(&self, frame: &Frame, from: u16, kind: MessageKind) -> Result<(), MpcError> {
        let h = &frame.header;
        if h.session_id != self.params.session_id {
            return Err(MpcError::Abort(format!(
                "round {}: frame from {} belongs to another session",
                self.round, from
            )));
        }
        if h.sender != from || h.kind != kind || h.round != self.round as u32 {
            return Err(MpcError::Abort(format!(
                "round {}: unexpected frame from {} (sender={}, kind={:?}, round={})",
                self.round, from, h.sender, h.kind, h.round
            )));
        }
        Ok(())
    }

    /// One blocking all-to-all round with per-peer raw payloads.
    /// `per_peer[d-1]` goes to party `d`; the slot for `me` is returned
    /// unchanged in the result.
    pub fn exchange_bytes_distinct(
        &mut self,
        kind: MessageKind,
        per_peer: Vec<Vec<u8>>,
    ) -> Result<Vec<Vec<u8>>, MpcError> {
        let d = self.params.talliers;
        assert_eq!(per_peer.len(), d as usize);
        self.round += 1;
        self.stats.rounds += 1;
        let header = self.header(kind);

        let mut sent_bytes = 0u64;
        for to in 1..=d {
            if to == self.me {
                continue;
            }
            let payload = per_peer[(to - 1) as usize].clone();
            sent_bytes += payload.len() as u64;
            self.transcript.absorb_sent(&payload);
            self.chans.send(to, &Frame::new(header, payload))?;
        }
        self.stats.bytes_sent += sent_bytes;
        self.transcript.record(TranscriptEvent::Round {
            round: self.round,
            kind: kind_label(kind),
            bytes_sent: sent_bytes,
        });

        let mut inbox: Vec<Vec<u8>> = vec![Vec::new(); d as usize];
        inbox[(self.me - 1) as usize] = per_peer[(self.me - 1) as usize].clone();
        for from in 1..=d {
            if from == self.me {
                continue;
            }
            let frame = self.chans.recv(from)?;
            self.check_incoming(&frame, from, kind)?;
            inbox[(from - 1) as usize] = frame.payload;
        }
        Ok(inbox)
    }

    /// Broadcast round: the same raw payload to every peer.
    pub fn exchange_bytes(
        &mut self,
        kind: MessageKind,
        payload: &[u8],
    ) -> Result<Vec<Vec<u8>>, MpcError> {
        let per_peer = vec![payload.to_vec(); self.params.talliers as usize];
        self.exchange_bytes_distinct(kind, per_peer)
    }

    /// Broadcast round carrying field elements.
    fn exchange_elements(
        &mut self,
        elements: &[FieldElement],
    ) -> Result<Vec<Vec<FieldElement>>, MpcError> {
        let payload = encode_elements(elements, self.params.modulus);
        let inbox = self.exchange_bytes(MessageKind::EngineRound, &payload)?;
        self.decode_inbox(inbox, elements.len())
    }

    /// Scatter round with per-peer element payloads.
    fn exchange_elements_distinct(
        &mut self,
        per_peer: Vec<Vec<FieldElement>>,
        expect: usize,
    ) -> Result<Vec<Vec<FieldElement>>, MpcError> {
        let payloads = per_peer
            .into_iter()
            .map(|elems| encode_elements(&elems, self.params.modulus))
            .collect();
        let inbox = self.exchange_bytes_distinct(MessageKind::EngineRound, payloads)?;
        self.decode_inbox(inbox, expect)
    }

    fn decode_inbox(
        &self,
        inbox: Vec<Vec<u8>>,
        expect: usize,
    ) -> Result<Vec<Vec<FieldElement>>, MpcError> {
        inbox
            .into_iter()
            .enumerate()
            .map(|(i, bytes)| {
                let elems = decode_elements(&bytes, self.params.modulus)
                    .map_err(|e| MpcError::Abort(format!("bad payload from {}: {e}", i + 1)))?;
                if elems.len() != expect {
                    return Err(MpcError::Abort(format!(
                        "party {} sent {} elements, expected {expect}",
                        i + 1,
                        elems.len()
                    )));
                }
                Ok(elems)
            })
            .collect()
    }

    // ---- reconstruction ----

    fn reconstruct_all(
        &mut self,
        shares_by_party: &[Vec<FieldElement>],
        count: usize,
    ) -> Result<Vec<FieldElement>, MpcError> {
        let t = self.params.threshold;
        let d = self.params.talliers as usize;
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let mut primary = self.params.modulus.zero();
            for (w, shares) in self.weights_low.iter().zip(shares_by_party.iter()) {
                primary += *w * shares[i];
            }
            // cross-check against the top t+1 parties: any inconsistent
            // share set (degree too high, desync, corruption) diverges here
            let mut check = self.params.modulus.zero();
            for (w, shares) in self
                .weights_high
                .iter()
                .zip(shares_by_party[d - t - 1..].iter())
            {
                check += *w * shares[i];
            }
            if primary != check {
                return Err(MpcError::Abort(format!(
                    "inconsistent opening at round {}",
                    self.round
                )));
            }
            out.push(primary);
        }
        Ok(out)
    }

    /// Opens shared values to everyone as an intentional disclosure. This is
    /// the only operation that appends to the disclosure log.
    pub fn open_batch(
        &mut self,
        values: &[Shared],
        kind: DisclosureKind,
    ) -> Result<Vec<FieldElement>, MpcError> {
        let mine: Vec<FieldElement> = values
            .iter()
            .map(|v| self.unwrap(v))
            .collect::<Result<_, _>>()?;
        let by_party = self.exchange_elements(&mine)?;
        let opened = self.reconstruct_all(&by_party, values.len())?;
        self.transcript.record(TranscriptEvent::Disclosure {
            round: self.round,
            kind,
            values: opened.iter().map(|v| v.value()).collect(),
        });
        Ok(opened)
    }

    pub fn open(&mut self, value: &Shared, kind: DisclosureKind) -> Result<FieldElement, MpcError> {
        Ok(self.open_batch(std::slice::from_ref(value), kind)?[0])
    }

    /// Reveals masked values (uniform, independent of all secrets) for
    /// protocol-internal use. Logged separately from disclosures.
    pub(crate) fn reveal_masked_batch(
        &mut self,
        values: &[Shared],
        kind: MaskKind,
    ) -> Result<Vec<FieldElement>, MpcError> {
        let mine: Vec<FieldElement> = values
            .iter()
            .map(|v| self.unwrap(v))
            .collect::<Result<_, _>>()?;
        let by_party = self.exchange_elements(&mine)?;
        let opened = self.reconstruct_all(&by_party, values.len())?;
        self.transcript.record(TranscriptEvent::MaskedReveal {
            round: self.round,
            kind,
            count: values.len(),
        });
        Ok(opened)
    }

    // ---- inputs ----

    /// Per-party Shamir shares of `secret`, drawn from this engine's rng.
    fn share_out(&mut self, secret: FieldElement) -> Vec<FieldElement> {
        let modulus = self.params.modulus;
        let t = self.params.threshold;
        let coeffs: Vec<FieldElement> = (0..t)
            .map(|_| modulus.sample_uniform(&mut self.rng))
            .collect();
        (1..=self.params.talliers as u64)
            .map(|x| {
                let point = modulus.elem(x);
                let mut value = secret;
                let mut power = modulus.one();
                for &c in &coeffs {
                    power *= point;
                    value += c * power;
                }
                value
            })
            .collect()
    }

    /// Converts additively-held values into threshold shares: every tallier
    /// Shamir-shares its summand, everyone sums what it received. One round;
    /// nothing is opened.
    pub fn input_additive(&mut self, summands: &[FieldElement]) -> Result<Vec<Shared>, MpcError> {
        let d = self.params.talliers as usize;
        let mut per_peer: Vec<Vec<FieldElement>> = vec![Vec::with_capacity(summands.len()); d];
        for &summand in summands {
            for (peer, share) in self.share_out(summand).into_iter().enumerate() {
                per_peer[peer].push(share);
            }
        }
        let inbox = self.exchange_elements_distinct(per_peer, summands.len())?;
        Ok((0..summands.len())
            .map(|i| {
                let mut acc = self.params.modulus.zero();
                for party in &inbox {
                    acc += party[i];
                }
                self.wrap(acc)
            })
            .collect())
    }

    /// Input gates owned by one party: the owner shares its secrets, the
    /// rest contribute empty payloads. `count` is the agreed input width.
    pub fn input_from(
        &mut self,
        owner: u16,
        secrets: Option<&[FieldElement]>,
        count: usize,
    ) -> Result<Vec<Shared>, MpcError> {
        let d = self.params.talliers as usize;
        let mut per_peer: Vec<Vec<FieldElement>> = vec![Vec::new(); d];
        if self.me == owner {
            let secrets = secrets.expect("owner supplies secrets");
            assert_eq!(secrets.len(), count);
            per_peer = vec![Vec::with_capacity(count); d];
            for &secret in secrets {
                for (peer, share) in self.share_out(secret).into_iter().enumerate() {
                    per_peer[peer].push(share);
                }
            }
        }
        let payloads: Vec<Vec<u8>> = per_peer
            .into_iter()
            .map(|elems| encode_elements(&elems, self.params.modulus))
            .collect();
        let inbox = self.exchange_bytes_distinct(MessageKind::EngineRound, payloads)?;
        let from_owner = decode_elements(&inbox[(owner - 1) as usize], self.params.modulus)
            .map_err(|e| MpcError::Abort(format!("bad input payload: {e}")))?;
        if from_owner.len() != count {
            return Err(MpcError::Abort(format!(
                "input owner {} sent {} values, expected {count}",
                owner,
                from_owner.len()
            )));
        }
        Ok(from_owner.into_iter().map(|v| self.wrap(v)).collect())
    }

    // ---- multiplication ----

    /// Secure products for all pairs in one communication round, one Beaver
    /// triple per pair.
    pub fn mul_batch(&mut self, pairs: &[(Shared, Shared)]) -> Result<Vec<Shared>, MpcError> {
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        if let Some(budget) = self.params.triple_budget {
            if self.dealer.triples_drawn + pairs.len() as u64 > budget {
                return Err(MpcError::Preprocessing(format!(
                    "triple budget {budget} exceeded"
                )));
            }
        }
        let mut triples = Vec::with_capacity(pairs.len());
        let mut to_reveal = Vec::with_capacity(pairs.len() * 2);
        for (x, y) in pairs {
            let (a, b, c) = self.dealer.triple();
            let d = self.unwrap(x)? - a;
            let e = self.unwrap(y)? - b;
            to_reveal.push(self.wrap(d));
            to_reveal.push(self.wrap(e));
            triples.push((a, b, c));
        }
        let opened = self.reveal_masked_batch(&to_reveal, MaskKind::BeaverOpening)?;
        self.stats.mult_gates += pairs.len() as u64;
        self.stats.mult_rounds += 1;
        Ok(triples
            .into_iter()
            .enumerate()
            .map(|(i, (a, b, c))| {
                let d = opened[2 * i];
                let e = opened[2 * i + 1];
                // z = c + d*b + e*a + d*e
                self.wrap(c + d * b + e * a + d * e)
            })
            .collect())
    }

    pub fn mul(&mut self, x: &Shared, y: &Shared) -> Result<Shared, MpcError> {
        Ok(self.mul_batch(&[(*x, *y)])?[0])
    }

    // ---- shared randomness ----

    /// Jointly random shared values: every tallier shares a uniform
    /// contribution and everyone sums. No coalition of `t` or fewer
    /// talliers learns anything about the result.
    pub fn rand_shared_batch(&mut self, count: usize) -> Result<Vec<Shared>, MpcError> {
        let contributions: Vec<FieldElement> = (0..count)
            .map(|_| self.params.modulus.sample_uniform(&mut self.rng))
            .collect();
        self.input_additive(&contributions)
    }

    pub fn rand_shared(&mut self) -> Result<Shared, MpcError> {
        Ok(self.rand_shared_batch(1)?[0])
    }

    /// Jointly random shared bits, uniform on {0, 1}: square a random value,
    /// reveal the square (which is independent of the sign), divide out the
    /// canonical root and rescale. Retries the rare zero squares.
    pub fn rand_shared_bit_batch(&mut self, count: usize) -> Result<Vec<Shared>, MpcError> {
        let modulus = self.params.modulus;
        let mut out: Vec<Option<Shared>> = vec![None; count];
        let mut pending: Vec<usize> = (0..count).collect();
        while !pending.is_empty() {
            let randoms = self.rand_shared_batch(pending.len())?;
            let squares: Vec<(Shared, Shared)> = randoms.iter().map(|r| (*r, *r)).collect();
            let squared = self.mul_batch(&squares)?;
            let opened = self.reveal_masked_batch(&squared, MaskKind::RandomnessSetup)?;
            let mut still = Vec::new();
            for ((slot, r), sq) in pending.iter().zip(&randoms).zip(opened) {
                if sq.is_zero() {
                    still.push(*slot);
                    continue;
                }
                let root = sq.sqrt().expect("squares are residues");
                let unit = self.scale_public(r, root.inverse().expect("nonzero"))?;
                // (r / root + 1) / 2 is a uniform bit
                let shifted = self.add_public(&unit, modulus.one())?;
                out[*slot] = Some(self.scale_public(&shifted, self.inv_two)?);
            }
            pending = still;
        }
        Ok(out.into_iter().map(|b| b.expect("filled")).collect())
    }

    pub fn rand_shared_bit(&mut self) -> Result<Shared, MpcError> {
        Ok(self.rand_shared_bit_batch(1)?[0])
    }

    /// Jointly random shared values uniform on the nonzero elements. The
    /// product with an independent random mask certifies nonzero-ness
    /// without revealing anything about the value itself.
    pub fn rand_shared_nonzero_batch(&mut self, count: usize) -> Result<Vec<Shared>, MpcError> {
        let mut out: Vec<Option<Shared>> = vec![None; count];
        let mut pending: Vec<usize> = (0..count).collect();
        while !pending.is_empty() {
            let candidates = self.rand_shared_batch(pending.len())?;
            let masks = self.rand_shared_batch(pending.len())?;
            let pairs: Vec<(Shared, Shared)> = candidates
                .iter()
                .zip(&masks)
                .map(|(r, m)| (*r, *m))
                .collect();
            let products = self.mul_batch(&pairs)?;
            let opened = self.reveal_masked_batch(&products, MaskKind::RandomnessSetup)?;
            let mut still = Vec::new();
            for ((slot, r), prod) in pending.iter().zip(&candidates).zip(opened) {
                if prod.is_zero() {
                    still.push(*slot);
                } else {
                    out[*slot] = Some(*r);
                }
            }
            pending = still;
        }
        Ok(out.into_iter().map(|b| b.expect("filled")).collect())
    }

    pub fn rand_shared_nonzero(&mut self) -> Result<Shared, MpcError> {
        Ok(self.rand_shared_nonzero_batch(1)?[0])
    }

    /// Joint public coins, fixed only after every party has committed its
    /// contribution (plain exchange in simulate mode, commit-then-reveal in
    /// network mode).
    pub fn joint_coins(&mut self, count: usize) -> Result<Vec<FieldElement>, MpcError> {
        let modulus = self.params.modulus;
        let contributions: Vec<FieldElement> = (0..count)
            .map(|_| modulus.sample_uniform(&mut self.rng))
            .collect();
        let payload = encode_elements(&contributions, modulus);

        let by_party = if self.params.commit_reveal_coins {
            let salt: Vec<u8> = {
                let mut buf = [0u8; 16];
                rand::RngCore::fill_bytes(&mut self.rng, &mut buf);
                buf.to_vec()
            };
            let commitment: [u8; 32] = Sha256::new()
                .chain_update(&payload)
                .chain_update(&salt)
                .finalize()
                .into();
            let commitments = self.exchange_bytes(MessageKind::EngineRound, &commitment)?;
            let mut reveal = payload.clone();
            reveal.extend_from_slice(&salt);
            let reveals = self.exchange_bytes(MessageKind::EngineRound, &reveal)?;
            let mut decoded = Vec::with_capacity(reveals.len());
            for (party, bytes) in reveals.into_iter().enumerate() {
                if bytes.len() < 16 {
                    return Err(MpcError::Abort(format!(
                        "short coin reveal from {}",
                        party + 1
                    )));
                }
                let (body, their_salt) = bytes.split_at(bytes.len() - 16);
                let expected: [u8; 32] = Sha256::new()
                    .chain_update(body)
                    .chain_update(their_salt)
                    .finalize()
                    .into();
                if commitments[party] != expected {
                    return Err(MpcError::Abort(format!(
                        "coin commitment mismatch from party {}",
                        party + 1
                    )));
                }
                decoded.push(
                    decode_elements(body, modulus)
                        .map_err(|e| MpcError::Abort(format!("bad coin payload: {e}")))?,
                );
            }
            decoded
        } else {
            let inbox = self.exchange_bytes(MessageKind::EngineRound, &payload)?;
            self.decode_inbox(inbox, count)?
        };

        Ok((0..count)
            .map(|i| {
                let mut acc = modulus.zero();
                for party in &by_party {
                    acc += party[i];
                }
                acc
            })
            .collect())
    }

    // ---- circuits over shared values ----

    /// Falling products `u (u-1) (u-2) ... (u-c+1)`, one per input, each
    /// consuming exactly `c - 1` multiplication gates, evaluated as a
    /// balanced tree so the depth is `ceil(log2 c)` rounds.
    pub fn product_chain_batch(
        &mut self,
        inputs: &[Shared],
        chain_len: u64,
    ) -> Result<Vec<Shared>, MpcError> {
        assert!(chain_len >= 1, "chain needs at least one factor");
        let modulus = self.params.modulus;
        let chains: Vec<Vec<Shared>> = inputs
            .iter()
            .map(|u| {
                (0..chain_len)
                    .map(|j| self.sub_public(u, modulus.elem(j)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        self.tree_product_batch(chains)
    }

    /// Products of each group's factors, pairing layer by layer so every
    /// group of `n` factors costs `n - 1` gates in `ceil(log2 n)` rounds and
    /// the whole batch shares those rounds. Empty groups yield 1.
    pub fn tree_product_batch(
        &mut self,
        groups: Vec<Vec<Shared>>,
    ) -> Result<Vec<Shared>, MpcError> {
        let mut chains = groups;
        while chains.iter().any(|c| c.len() > 1) {
            let mut layer_pairs = Vec::new();
            for chain in &chains {
                let mut i = 0;
                while i + 1 < chain.len() {
                    layer_pairs.push((chain[i], chain[i + 1]));
                    i += 2;
                }
            }
            let products = self.mul_batch(&layer_pairs)?;
            let mut cursor = 0;
            for chain in &mut chains {
                let mut next = Vec::with_capacity(chain.len().div_ceil(2));
                let mut i = 0;
                while i + 1 < chain.len() {
                    next.push(products[cursor]);
                    cursor += 1;
                    i += 2;
                }
                if i < chain.len() {
                    next.push(chain[i]);
                }
                *chain = next;
            }
        }
        Ok(chains
            .into_iter()
            .map(|c| c.first().copied().unwrap_or_else(|| self.constant(1)))
            .collect())
    }

    pub fn product_chain(&mut self, input: &Shared, chain_len: u64) -> Result<Shared, MpcError> {
        Ok(self.product_chain_batch(std::slice::from_ref(input), chain_len)?[0])
    }

    /// Batched zero tests: per group, opens random linear combinations of
    /// the group's values (coins sampled jointly after the values are
    /// fixed) and accepts iff they all open to zero. Soundness error is
    /// 1/p per combination; small fields get a second independent
    /// combination.
    pub fn zero_test_groups(&mut self, groups: &[Vec<Shared>]) -> Result<Vec<bool>, MpcError> {
        let reps = self.zero_test_repetitions();
        let total: usize = groups.iter().map(|g| g.len()).sum();
        if total == 0 {
            return Ok(vec![true; groups.len()]);
        }
        let coins = self.joint_coins(total * reps)?;
        let mut combos = Vec::with_capacity(groups.iter().filter(|g| !g.is_empty()).count() * reps);
        let mut cursor = 0;
        for group in groups {
            for _ in 0..reps {
                if group.is_empty() {
                    continue;
                }
                let mut acc = self.constant(0);
                for value in group {
                    let scaled = self.scale_public(value, coins[cursor])?;
                    acc = self.add(&acc, &scaled)?;
                    cursor += 1;
                }
                combos.push(acc);
            }
        }
        let opened = self.open_batch(&combos, DisclosureKind::ValidationVerdict)?;
        let mut verdicts = Vec::with_capacity(groups.len());
        let mut idx = 0;
        for group in groups {
            if group.is_empty() {
                verdicts.push(true);
                continue;
            }
            let ok = (0..reps).all(|r| opened[idx + r].is_zero());
            idx += reps;
            verdicts.push(ok);
        }
        Ok(verdicts)
    }

    /// Number of independent random combinations per zero test: doubled for
    /// small fields where 1/p alone is above the target failure budget.
    pub fn zero_test_repetitions(&self) -> usize {
        if self.params.modulus.bits() < 20 {
            2
        } else {
            1
        }
    }

    pub(crate) fn dealer_mut(&mut self) -> &mut DealerStream {
        &mut self.dealer
    }
}

fn kind_label(kind: MessageKind) -> &'static str {
    match kind {
        MessageKind::VoterShare => "voter-share",
        MessageKind::Confirm => "confirm",
        MessageKind::EngineRound => "engine",
        MessageKind::VoterSet => "voter-set",
        MessageKind::Evidence => "evidence",
        MessageKind::WindowClose => "window-close",
    }
}
