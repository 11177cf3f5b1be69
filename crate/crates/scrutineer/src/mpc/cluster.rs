//! Runs the same tallier body on every engine, one thread per tallier.
//!
//! Simulate mode wires the engines with in-memory channels; network mode
//! binds loopback TCP listeners and runs the identical body over sockets.
//! If one tallier fails, its channels drop and every peer's blocking
//! receive errors out, so a run never wedges.

use super::engine::TallierEngine;
use super::{CircuitStats, DisclosureKind, MpcError, SessionParams};
use crate::transport::{mem_mesh, tcp_mesh};
use sha2::{Digest, Sha256};
use std::net::TcpListener;

/// One tallier's outcome: the body's result plus its accounting.
pub struct TallierRun<R> {
    pub party: u16,
    pub result: R,
    pub stats: CircuitStats,
    pub transcript_text: String,
    pub disclosures: Vec<(DisclosureKind, Vec<u64>)>,
}

fn finish<R>(engine: TallierEngine, result: R) -> TallierRun<R> {
    TallierRun {
        party: engine.me(),
        stats: *engine.stats(),
        transcript_text: engine.export_transcript(),
        disclosures: engine
            .transcript()
            .disclosures()
            .map(|(kind, values)| (kind, values.to_vec()))
            .collect(),
        result,
    }
}

/// Runs `body` on `D` engines over in-memory channels. Results come back in
/// tallier order; the first error wins.
pub fn run_simulated<R, E, F>(params: &SessionParams, body: F) -> Result<Vec<TallierRun<R>>, E>
where
    R: Send,
    E: Send,
    F: Fn(&mut TallierEngine) -> Result<R, E> + Sync,
{
    let meshes = mem_mesh(params.talliers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = meshes
            .into_iter()
            .map(|chans| {
                let params = params.clone();
                let body = &body;
                scope.spawn(move || {
                    let mut engine = TallierEngine::new(params, Box::new(chans));
                    let result = body(&mut engine)?;
                    Ok(finish(engine, result))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("tallier thread panicked"))
            .collect()
    })
}

/// Session secret for MAC key derivation, provisioned out-of-band (here:
/// derived from the seed all parties were configured with).
pub(crate) fn session_secret(seed: u64) -> [u8; 32] {
    Sha256::new()
        .chain_update(b"session-secret")
        .chain_update(seed.to_be_bytes())
        .finalize()
        .into()
}

/// Same as [`run_simulated`] but over loopback TCP with authenticated
/// frames and commit-then-reveal public coins.
pub fn run_networked<R, E, F>(params: &SessionParams, body: F) -> Result<Vec<TallierRun<R>>, E>
where
    R: Send,
    E: Send + From<MpcError>,
    F: Fn(&mut TallierEngine) -> Result<R, E> + Sync,
{
    let mut params = params.clone();
    params.commit_reveal_coins = true;
    let secret = session_secret(params.seed);

    let io_err =
        |e: std::io::Error| E::from(MpcError::Transport(crate::transport::TransportError::Io(e)));
    let listeners: Vec<TcpListener> = (0..params.talliers)
        .map(|_| TcpListener::bind("127.0.0.1:0"))
        .collect::<std::io::Result<_>>()
        .map_err(io_err)?;
    let addrs: Vec<std::net::SocketAddr> = listeners
        .iter()
        .map(|l| l.local_addr())
        .collect::<std::io::Result<_>>()
        .map_err(io_err)?;

    std::thread::scope(|scope| {
        let handles: Vec<_> = listeners
            .into_iter()
            .enumerate()
            .map(|(i, listener)| {
                let params = params.clone();
                let addrs = addrs.clone();
                let body = &body;
                scope.spawn(move || {
                    let me = (i + 1) as u16;
                    let chans = tcp_mesh(&secret, me, params.talliers, &listener, &addrs)
                        .map_err(|e| E::from(MpcError::Transport(e)))?;
                    let mut engine = TallierEngine::new(params, Box::new(chans));
                    let result = body(&mut engine)?;
                    Ok(finish(engine, result))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("tallier thread panicked"))
            .collect()
    })
}
