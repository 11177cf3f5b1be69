//! The wire frame: a 4-byte big-endian length prefix, then
//! `{version: 1, kind: 1, session id: 16, sender: 2, round: 4}`, then the
//! payload (field elements, each in `ceil(bits/8)` big-endian bytes), then a
//! 32-byte MAC over header and payload.

use super::mac::MacKey;
use crate::field::{FieldElement, PrimeModulus};
use thiserror::Error;

pub const PROTOCOL_VERSION: u8 = 1;
pub const HEADER_LEN: usize = 1 + 1 + 16 + 2 + 4;
pub const MAC_LEN: usize = 32;
/// Generous cap; the largest legitimate frame is a batched multiplication
/// layer, well under this.
pub const MAX_FRAME_LEN: usize = 64 << 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("frame shorter than header and trailer")]
    Truncated,
    #[error("unsupported protocol version {0}")]
    BadVersion(u8),
    #[error("unknown message kind {0}")]
    BadKind(u8),
    #[error("frame length {0} exceeds cap")]
    TooLong(usize),
    #[error("MAC verification failed")]
    BadMac,
    #[error("payload length {0} is not a whole number of elements")]
    RaggedPayload(usize),
    #[error("element {0} is not below the modulus")]
    ElementOutOfRange(u64),
}

/// What a frame carries; one byte on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum MessageKind {
    /// A voter's share vector for one tallier.
    VoterShare = 1,
    /// Tallier-to-voter receipt confirmation.
    Confirm = 2,
    /// One round of the tallying MPC.
    EngineRound = 3,
    /// Accepted-voter-set reconciliation between talliers.
    VoterSet = 4,
    /// Additive shares pooled as rejection evidence.
    Evidence = 5,
    /// Control marker closing the submission window.
    WindowClose = 6,
}

impl TryFrom<u8> for MessageKind {
    type Error = FrameError;
    fn try_from(v: u8) -> Result<Self, FrameError> {
        Ok(match v {
            1 => MessageKind::VoterShare,
            2 => MessageKind::Confirm,
            3 => MessageKind::EngineRound,
            4 => MessageKind::VoterSet,
            5 => MessageKind::Evidence,
            6 => MessageKind::WindowClose,
            other => return Err(FrameError::BadKind(other)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub kind: MessageKind,
    pub session_id: [u8; 16],
    pub sender: u16,
    pub round: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub header: FrameHeader,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(header: FrameHeader, payload: Vec<u8>) -> Self {
        Frame { header, payload }
    }

    /// Serializes with length prefix and MAC trailer.
    pub fn encode(&self, key: &MacKey) -> Vec<u8> {
        let body = self.encode_body(key);
        let mut out = Vec::with_capacity(4 + body.len());
        out.extend_from_slice(&(body.len() as u32).to_be_bytes());
        out.extend_from_slice(&body);
        out
    }

    /// Serializes header, payload and MAC trailer without the length
    /// prefix, for carriers that frame messages themselves.
    pub fn encode_body(&self, key: &MacKey) -> Vec<u8> {
        let body_len = HEADER_LEN + self.payload.len() + MAC_LEN;
        let mut out = Vec::with_capacity(body_len);
        out.push(PROTOCOL_VERSION);
        out.push(self.header.kind as u8);
        out.extend_from_slice(&self.header.session_id);
        out.extend_from_slice(&self.header.sender.to_be_bytes());
        out.extend_from_slice(&self.header.round.to_be_bytes());
        out.extend_from_slice(&self.payload);
        let mac = key.mac(&out);
        out.extend_from_slice(&mac);
        out
    }

    /// Parses a body (everything after the length prefix) and verifies the MAC.
    pub fn decode(body: &[u8], key: &MacKey) -> Result<Frame, FrameError> {
        let frame = Frame::decode_unverified(body)?;
        let (signed, mac) = body.split_at(body.len() - MAC_LEN);
        if !key.verify(signed, mac) {
            return Err(FrameError::BadMac);
        }
        Ok(frame)
    }

    /// Structural parse without MAC verification, for receivers that must
    /// read the sender identity out of the payload before they can derive
    /// the right key. Callers must follow up with [`Frame::verify_mac`].
    pub fn decode_unverified(body: &[u8]) -> Result<Frame, FrameError> {
        if body.len() < HEADER_LEN + MAC_LEN {
            return Err(FrameError::Truncated);
        }
        if body.len() > MAX_FRAME_LEN {
            return Err(FrameError::TooLong(body.len()));
        }
        let signed = &body[..body.len() - MAC_LEN];
        if signed[0] != PROTOCOL_VERSION {
            return Err(FrameError::BadVersion(signed[0]));
        }
        let kind = MessageKind::try_from(signed[1])?;
        let mut session_id = [0u8; 16];
        session_id.copy_from_slice(&signed[2..18]);
        let sender = u16::from_be_bytes([signed[18], signed[19]]);
        let round = u32::from_be_bytes([signed[20], signed[21], signed[22], signed[23]]);
        Ok(Frame {
            header: FrameHeader {
                kind,
                session_id,
                sender,
                round,
            },
            payload: signed[HEADER_LEN..].to_vec(),
        })
    }

    /// Verifies the MAC trailer of an encoded body against a key.
    pub fn verify_mac(body: &[u8], key: &MacKey) -> bool {
        if body.len() < HEADER_LEN + MAC_LEN {
            return false;
        }
        let (signed, mac) = body.split_at(body.len() - MAC_LEN);
        key.verify(signed, mac)
    }
}

/// Packs field elements into the payload encoding.
pub fn encode_elements(elements: &[FieldElement], modulus: PrimeModulus) -> Vec<u8> {
    let width = modulus.byte_len();
    let mut out = Vec::with_capacity(elements.len() * width);
    for e in elements {
        out.extend_from_slice(&e.value().to_be_bytes()[8 - width..]);
    }
    out
}

/// Unpacks a payload back into canonical field elements.
pub fn decode_elements(
    bytes: &[u8],
    modulus: PrimeModulus,
) -> Result<Vec<FieldElement>, FrameError> {
    let width = modulus.byte_len();
    if !bytes.len().is_multiple_of(width) {
        return Err(FrameError::RaggedPayload(bytes.len()));
    }
    bytes
        .chunks_exact(width)
        .map(|chunk| {
            let mut buf = [0u8; 8];
            buf[8 - width..].copy_from_slice(chunk);
            let v = u64::from_be_bytes(buf);
            if v >= modulus.value() {
                return Err(FrameError::ElementOutOfRange(v));
            }
            Ok(modulus.elem(v))
        })
        .collect()
}
