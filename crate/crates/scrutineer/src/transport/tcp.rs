//! Framed TCP channels for network mode.
//!
//! Connection setup follows a fixed convention: every party dials all
//! lower-indexed parties and accepts from all higher-indexed ones, then
//! identifies itself with a two-byte hello. Frames carry the MAC trailer
//! keyed per pair.

use super::{Channels, Frame, TransportError};
use crate::transport::mac::{derive_pair_key, MacKey};
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::time::Duration;

const DIAL_RETRIES: u32 = 50;
const DIAL_BACKOFF: Duration = Duration::from_millis(20);

struct Peer {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    key: MacKey,
}

pub struct TcpChannels {
    me: u16,
    n: u16,
    peers: Vec<Option<Peer>>,
}

/// Connects party `me` into the mesh. `peer_addrs[i]` is the listen address
/// of party `i + 1`; only lower-indexed entries are dialed.
pub fn tcp_mesh(
    session_secret: &[u8; 32],
    me: u16,
    n: u16,
    listener: &TcpListener,
    peer_addrs: &[SocketAddr],
) -> Result<TcpChannels, TransportError> {
    let mut peers: Vec<Option<Peer>> = (0..n).map(|_| None).collect();

    for other in 1..me {
        let stream = dial(peer_addrs[(other - 1) as usize])?;
        stream.set_nodelay(true)?;
        let mut writer = BufWriter::new(stream.try_clone()?);
        writer.write_all(&me.to_be_bytes())?;
        writer.flush()?;
        peers[(other - 1) as usize] = Some(Peer {
            reader: BufReader::new(stream.try_clone()?),
            writer,
            key: derive_pair_key(session_secret, me, other),
        });
    }

    for _ in me..n {
        let (stream, _) = listener.accept()?;
        stream.set_nodelay(true)?;
        let mut hello = [0u8; 2];
        let mut reader = BufReader::new(stream.try_clone()?);
        reader.read_exact(&mut hello)?;
        let other = u16::from_be_bytes(hello);
        peers[(other - 1) as usize] = Some(Peer {
            reader,
            writer: BufWriter::new(stream.try_clone()?),
            key: derive_pair_key(session_secret, me, other),
        });
    }

    Ok(TcpChannels { me, n, peers })
}

fn dial(addr: SocketAddr) -> Result<TcpStream, TransportError> {
    let mut last = None;
    for _ in 0..DIAL_RETRIES {
        match TcpStream::connect(addr) {
            Ok(s) => return Ok(s),
            Err(e) => {
                last = Some(e);
                std::thread::sleep(DIAL_BACKOFF);
            }
        }
    }
    Err(TransportError::Io(last.expect("at least one attempt")))
}

impl Channels for TcpChannels {
    fn me(&self) -> u16 {
        self.me
    }

    fn party_count(&self) -> u16 {
        self.n
    }

    fn send(&mut self, to: u16, frame: &Frame) -> Result<(), TransportError> {
        let peer = self.peers[(to - 1) as usize]
            .as_mut()
            .ok_or(TransportError::Closed(to))?;
        let wire = frame.encode(&peer.key);
        peer.writer.write_all(&wire)?;
        peer.writer.flush()?;
        Ok(())
    }

    fn recv(&mut self, from: u16) -> Result<Frame, TransportError> {
        let peer = self.peers[(from - 1) as usize]
            .as_mut()
            .ok_or(TransportError::Closed(from))?;
        let mut len_buf = [0u8; 4];
        peer.reader.read_exact(&mut len_buf)?;
        let len = u32::from_be_bytes(len_buf) as usize;
        if len > super::frame::MAX_FRAME_LEN {
            return Err(TransportError::Frame(super::FrameError::TooLong(len)));
        }
        let mut body = vec![0u8; len];
        peer.reader.read_exact(&mut body)?;
        Ok(Frame::decode(&body, &peer.key)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::{FrameHeader, MessageKind};

    #[test]
    fn three_party_tcp_mesh_round_trip() {
        let secret = [5u8; 32];
        let listeners: Vec<TcpListener> = (0..3)
            .map(|_| TcpListener::bind("127.0.0.1:0").unwrap())
            .collect();
        let addrs: Vec<SocketAddr> = listeners.iter().map(|l| l.local_addr().unwrap()).collect();

        let handles: Vec<_> = (1u16..=3)
            .zip(listeners)
            .map(|(me, listener)| {
                let addrs = addrs.clone();
                std::thread::spawn(move || {
                    let mut chans = tcp_mesh(&secret, me, 3, &listener, &addrs).unwrap();
                    // everyone sends its index to everyone, then reads all
                    let frame = Frame::new(
                        FrameHeader {
                            kind: MessageKind::EngineRound,
                            session_id: [1u8; 16],
                            sender: me,
                            round: 0,
                        },
                        vec![me as u8; 3],
                    );
                    for other in 1..=3 {
                        if other != me {
                            chans.send(other, &frame).unwrap();
                        }
                    }
                    let mut got = Vec::new();
                    for other in 1..=3 {
                        if other != me {
                            let f = chans.recv(other).unwrap();
                            assert_eq!(f.header.sender, other);
                            assert_eq!(f.payload, vec![other as u8; 3]);
                            got.push(other);
                        }
                    }
                    got
                })
            })
            .collect();

        for handle in handles {
            let got = handle.join().unwrap();
            assert_eq!(got.len(), 2);
        }
    }
}
