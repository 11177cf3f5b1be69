//! Message transport between protocol parties.
//!
//! Every message travels as a big-endian length-prefixed frame carrying a
//! fixed header, a field-element payload and a 32-byte MAC trailer. The
//! in-memory transport backs simulate mode; the TCP transport runs the same
//! frames over sockets.

mod frame;
mod mac;
mod mem;
mod tcp;

pub use frame::{
    decode_elements, encode_elements, Frame, FrameError, FrameHeader, MessageKind, MAX_FRAME_LEN,
    PROTOCOL_VERSION,
};
pub use mac::{derive_pair_key, derive_voter_key, MacKey};
pub use mem::{mem_mesh, MemChannels};
pub use tcp::{tcp_mesh, TcpChannels};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("channel to party {0} is closed")]
    Closed(u16),
    #[error("frame error: {0}")]
    Frame(#[from] FrameError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Point-to-point channels from one tallier to its peers. Sends are
/// non-blocking; receives block until the peer's next frame arrives, which
/// gives the round-barrier semantics the MPC engine relies on.
pub trait Channels: Send {
    /// This party's index (1-based).
    fn me(&self) -> u16;
    /// Total number of parties.
    fn party_count(&self) -> u16;
    /// Sends a frame to one peer.
    fn send(&mut self, to: u16, frame: &Frame) -> Result<(), TransportError>;
    /// Receives the next frame from one peer, verifying its MAC.
    fn recv(&mut self, from: u16) -> Result<Frame, TransportError>;
}
