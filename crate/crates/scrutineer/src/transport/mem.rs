//! Deterministic in-process channels for simulate mode.
//!
//! Frames travel as structs over mpsc queues, one queue per ordered pair of
//! parties, so per-peer FIFO order and the blocking-receive round barrier
//! hold exactly as they do over sockets.

use super::{Channels, Frame, TransportError};
use std::sync::mpsc::{channel, Receiver, Sender};

pub struct MemChannels {
    me: u16,
    n: u16,
    senders: Vec<Option<Sender<Frame>>>,
    receivers: Vec<Option<Receiver<Frame>>>,
}

/// Builds the full mesh for `n` parties; element `i` belongs to party `i+1`.
pub fn mem_mesh(n: u16) -> Vec<MemChannels> {
    let mut parties: Vec<MemChannels> = (1..=n)
        .map(|me| MemChannels {
            me,
            n,
            senders: (0..n).map(|_| None).collect(),
            receivers: (0..n).map(|_| None).collect(),
        })
        .collect();
    for from in 0..n as usize {
        for to in 0..n as usize {
            if from == to {
                continue;
            }
            let (tx, rx) = channel();
            parties[from].senders[to] = Some(tx);
            parties[to].receivers[from] = Some(rx);
        }
    }
    parties
}

impl Channels for MemChannels {
    fn me(&self) -> u16 {
        self.me
    }

    fn party_count(&self) -> u16 {
        self.n
    }

    fn send(&mut self, to: u16, frame: &Frame) -> Result<(), TransportError> {
        self.senders[(to - 1) as usize]
            .as_ref()
            .ok_or(TransportError::Closed(to))?
            .send(frame.clone())
            .map_err(|_| TransportError::Closed(to))
    }

    fn recv(&mut self, from: u16) -> Result<Frame, TransportError> {
        self.receivers[(from - 1) as usize]
            .as_ref()
            .ok_or(TransportError::Closed(from))?
            .recv()
            .map_err(|_| TransportError::Closed(from))
    }
}
