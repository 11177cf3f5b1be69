//! End-to-end orchestration of a mediated election.
//!
//! Voters split ballots into additive shares and submit one authenticated
//! share per tallier (with confirmations and resends). Talliers reconcile
//! the accepted electorate, validate every hidden ballot, aggregate the
//! survivors, reshare the aggregate into the threshold circuit and select
//! the top K candidates with secure comparisons. Simulate mode runs the
//! talliers on in-memory channels and is bit-for-bit reproducible from the
//! seed; network mode runs the same code over authenticated loopback TCP.

mod select;
mod tallier;
mod validate;
mod voter;

pub use select::select_top_k;
pub use tallier::{reconcile, tallier_main, TallierInputs, TallierOutcome};
pub use validate::{validate_ballots, RejectReason};
pub use voter::{
    build_share_frame, voter_submit, SubmissionServer, SubmitError, VoterLink, SUBMIT_ATTEMPTS,
};

use crate::field::FieldElement;
use crate::mpc::{
    run_simulated, session_secret, CircuitStats, DisclosureKind, MpcError, SessionParams,
    TallierEngine, TallierRun,
};
use crate::rules::Ballot;
use crate::rules::{ConfigError, ElectionConfig};
use crate::transport::{derive_pair_key, tcp_mesh, Frame, FrameHeader, MessageKind};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use thiserror::Error;

/// Where in the protocol an error surfaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElectionPhase {
    Setup,
    Submission,
    Reconciliation,
    Validation,
    Aggregation,
    Selection,
}

impl std::fmt::Display for ElectionPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ElectionPhase::Setup => "setup",
            ElectionPhase::Submission => "submission",
            ElectionPhase::Reconciliation => "reconciliation",
            ElectionPhase::Validation => "validation",
            ElectionPhase::Aggregation => "aggregation",
            ElectionPhase::Selection => "selection",
        };
        f.write_str(name)
    }
}

/// An engine error with the phase it happened in.
#[derive(Debug, Error)]
#[error("{phase}: {source}")]
pub struct PhasedError {
    pub phase: ElectionPhase,
    pub source: MpcError,
}

impl From<MpcError> for PhasedError {
    fn from(source: MpcError) -> Self {
        PhasedError {
            phase: ElectionPhase::Setup,
            source,
        }
    }
}

#[derive(Debug, Error)]
pub enum ElectionError {
    #[error("invalid config: {0}")]
    Config(#[from] ConfigError),
    #[error("no voter was accepted by every tallier")]
    EmptyElection,
    #[error("submission failed for voter {voter}: {source}")]
    Submit {
        voter: String,
        #[source]
        source: SubmitError,
    },
    #[error("protocol abort in {0}")]
    Abort(#[from] PhasedError),
    #[error("talliers disagree on the outcome: {0}")]
    Disagreement(String),
    #[error("{got} distinct voters exceed the configured bound of {max}")]
    TooManyVoters { got: usize, max: usize },
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

/// Execution mode for an election run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Deterministic in-process talliers over memory channels.
    Simulate,
    /// Talliers as threads over authenticated loopback TCP; voters submit
    /// over TCP as well.
    Network,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "network" => Ok(Mode::Network),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Network => "network",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub mode: Mode,
    pub seed: u64,
}

/// One voter's fate in the validation report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoterVerdict {
    pub voter_tag: String,
    pub outcome: VerdictOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerdictOutcome {
    Accepted,
    Rejected {
        reason: RejectReason,
        /// The ballot, reconstructed from the pooled shares as evidence.
        recovered: Vec<u64>,
    },
}

/// Everything a finished election produces.
#[derive(Debug, Clone)]
pub struct ElectionResult {
    pub winner_indices: Vec<usize>,
    pub winner_names: Vec<String>,
    pub verdicts: Vec<VoterVerdict>,
    /// Tallier 1's cost counters (identical structure on every tallier).
    pub stats: CircuitStats,
    /// Per-tallier transcript exports.
    pub transcripts: Vec<String>,
    /// Tallier 1's disclosure log.
    pub disclosures: Vec<(DisclosureKind, Vec<u64>)>,
}

impl ElectionResult {
    pub fn accepted_count(&self) -> usize {
        self.verdicts
            .iter()
            .filter(|v| v.outcome == VerdictOutcome::Accepted)
            .count()
    }

    pub fn rejected(&self) -> impl Iterator<Item = &VoterVerdict> {
        self.verdicts
            .iter()
            .filter(|v| !matches!(v.outcome, VerdictOutcome::Accepted))
    }

    /// Deterministic text report: winners, verdict summary, cost counters.
    /// Contains no timing, so equal-seed simulate runs render identically.
    pub fn report_text(&self) -> String {
        let mut out = String::new();
        for (rank, (idx, name)) in self
            .winner_indices
            .iter()
            .zip(&self.winner_names)
            .enumerate()
        {
            out.push_str(&format!("winner {} index={idx} name={name}\n", rank + 1));
        }
        out.push_str(&format!(
            "voters accepted={} rejected={}\n",
            self.accepted_count(),
            self.verdicts.len() - self.accepted_count()
        ));
        for verdict in self.rejected() {
            if let VerdictOutcome::Rejected { reason, recovered } = &verdict.outcome {
                out.push_str(&format!(
                    "rejected voter={} reason={} recovered={recovered:?}\n",
                    verdict.voter_tag,
                    reason.label()
                ));
            }
        }
        out.push_str(&format!(
            "stats gates={} rounds={} mult_rounds={} bytes={}\n",
            self.stats.mult_gates, self.stats.rounds, self.stats.mult_rounds, self.stats.bytes_sent
        ));
        out
    }
}

pub(crate) fn voter_rng(seed: u64, tag: &str) -> rand_chacha::ChaCha20Rng {
    use rand::SeedableRng;
    let digest = Sha256::new()
        .chain_update(b"voter-rng")
        .chain_update(seed.to_be_bytes())
        .chain_update(tag.as_bytes())
        .finalize();
    let mut rng_seed = [0u8; 32];
    rng_seed.copy_from_slice(&digest);
    rand_chacha::ChaCha20Rng::from_seed(rng_seed)
}

/// Runs the full protocol over the given ballots. Ballots go in submission
/// order, first submission per voter tag wins, and their legality is only
/// established inside the MPC validation.
pub fn run_election(
    config: &ElectionConfig,
    ballots: &[Ballot],
    options: &RunOptions,
) -> Result<ElectionResult, ElectionError> {
    config.validate()?;
    let distinct = dedup_first(ballots).len();
    if distinct > config.voters {
        // the aggregate bound B, and with it the field choice, assumes at
        // most `voters` accepted ballots
        return Err(ElectionError::TooManyVoters {
            got: distinct,
            max: config.voters,
        });
    }
    let params = SessionParams::new(config.modulus, config.talliers as u16, options.seed);
    let secret = session_secret(options.seed);
    match options.mode {
        Mode::Simulate => run_simulate_mode(config, ballots, params, secret),
        Mode::Network => run_network_mode(config, ballots, params, secret),
    }
}

/// Keeps the first ballot per voter tag; later ones are the duplicate
/// submissions the servers would ignore anyway.
fn dedup_first(ballots: &[Ballot]) -> Vec<&Ballot> {
    let mut seen = std::collections::BTreeSet::new();
    ballots
        .iter()
        .filter(|b| seen.insert(b.voter_tag.0.clone()))
        .collect()
}

struct SimLink<'a> {
    servers: &'a mut [SubmissionServer],
}

impl VoterLink for SimLink<'_> {
    fn request(&mut self, tallier: u16, body: Vec<u8>) -> Option<Vec<u8>> {
        self.servers[(tallier - 1) as usize].handle(&body)
    }
}

fn run_simulate_mode(
    config: &ElectionConfig,
    ballots: &[Ballot],
    params: SessionParams,
    secret: [u8; 32],
) -> Result<ElectionResult, ElectionError> {
    let mut servers: Vec<SubmissionServer> = (1..=config.talliers as u16)
        .map(|d| SubmissionServer::new(d, secret, params.session_id, config))
        .collect();
    for ballot in dedup_first(ballots) {
        let mut rng = voter_rng(params.seed, &ballot.voter_tag.0);
        let mut link = SimLink {
            servers: &mut servers,
        };
        voter_submit(
            config,
            &secret,
            params.session_id,
            ballot,
            &mut rng,
            &mut link,
        )
        .map_err(|source| ElectionError::Submit {
            voter: ballot.voter_tag.0.clone(),
            source,
        })?;
    }
    let inputs: Vec<TallierInputs> = servers
        .into_iter()
        .map(|s| TallierInputs {
            accepted: s.into_accepted(),
        })
        .collect();

    let runs = run_simulated::<_, PhasedError, _>(&params, |engine| {
        tallier_main(engine, config, &inputs[(engine.me() - 1) as usize])
    })?;
    assemble(config, runs)
}

/// Reads one length-prefixed body from a stream.
fn read_body(stream: &mut TcpStream) -> std::io::Result<Vec<u8>> {
    let mut len_buf = [0u8; 4];
    stream.read_exact(&mut len_buf)?;
    let len = u32::from_be_bytes(len_buf) as usize;
    if len > crate::transport::MAX_FRAME_LEN {
        return Err(std::io::Error::other("frame too large"));
    }
    let mut body = vec![0u8; len];
    stream.read_exact(&mut body)?;
    Ok(body)
}

fn write_body(stream: &mut TcpStream, body: &[u8]) -> std::io::Result<()> {
    stream.write_all(&(body.len() as u32).to_be_bytes())?;
    stream.write_all(body)?;
    stream.flush()
}

/// Accepts voter submissions until the authority's window-close marker.
fn serve_submissions(
    listener: &TcpListener,
    server: &mut SubmissionServer,
    session_id: [u8; 16],
    control_key: &crate::transport::MacKey,
) -> std::io::Result<()> {
    loop {
        let (mut stream, _) = listener.accept()?;
        let Ok(body) = read_body(&mut stream) else {
            continue;
        };
        if let Ok(frame) = Frame::decode_unverified(&body) {
            if frame.header.kind == MessageKind::WindowClose
                && frame.header.session_id == session_id
                && Frame::verify_mac(&body, control_key)
            {
                return Ok(());
            }
        }
        if let Some(response) = server.handle(&body) {
            let _ = write_body(&mut stream, &response);
        }
    }
}

struct TcpVoterLink {
    addrs: Vec<SocketAddr>,
}

impl VoterLink for TcpVoterLink {
    fn request(&mut self, tallier: u16, body: Vec<u8>) -> Option<Vec<u8>> {
        let addr = self.addrs[(tallier - 1) as usize];
        let mut stream = TcpStream::connect(addr).ok()?;
        write_body(&mut stream, &body).ok()?;
        read_body(&mut stream).ok()
    }
}

fn run_network_mode(
    config: &ElectionConfig,
    ballots: &[Ballot],
    params: SessionParams,
    secret: [u8; 32],
) -> Result<ElectionResult, ElectionError> {
    let mut params = params;
    params.commit_reveal_coins = true;
    let d = config.talliers as u16;

    let mesh_listeners: Vec<TcpListener> = (0..d)
        .map(|_| TcpListener::bind("127.0.0.1:0"))
        .collect::<std::io::Result<_>>()?;
    let mesh_addrs: Vec<SocketAddr> = mesh_listeners
        .iter()
        .map(|l| l.local_addr())
        .collect::<std::io::Result<_>>()?;
    let sub_listeners: Vec<TcpListener> = (0..d)
        .map(|_| TcpListener::bind("127.0.0.1:0"))
        .collect::<std::io::Result<_>>()?;
    let sub_addrs: Vec<SocketAddr> = sub_listeners
        .iter()
        .map(|l| l.local_addr())
        .collect::<std::io::Result<_>>()?;

    std::thread::scope(|scope| {
        let handles: Vec<_> = mesh_listeners
            .into_iter()
            .zip(sub_listeners)
            .enumerate()
            .map(|(i, (mesh_listener, sub_listener))| {
                let me = (i + 1) as u16;
                let params = params.clone();
                let mesh_addrs = mesh_addrs.clone();
                let config = &config;
                let secret = &secret;
                scope.spawn(move || -> Result<TallierRun<TallierOutcome>, PhasedError> {
                    let control_key = derive_pair_key(secret, 0, me);
                    let mut server = SubmissionServer::new(me, *secret, params.session_id, config);
                    serve_submissions(&sub_listener, &mut server, params.session_id, &control_key)
                        .map_err(|e| PhasedError {
                            phase: ElectionPhase::Submission,
                            source: MpcError::Transport(e.into()),
                        })?;
                    let chans = tcp_mesh(secret, me, d, &mesh_listener, &mesh_addrs)
                        .map_err(MpcError::Transport)?;
                    let mut engine = TallierEngine::new(params, Box::new(chans));
                    let inputs = TallierInputs {
                        accepted: server.into_accepted(),
                    };
                    let outcome = tallier_main(&mut engine, config, &inputs)?;
                    Ok(TallierRun {
                        party: engine.me(),
                        stats: *engine.stats(),
                        transcript_text: engine.export_transcript(),
                        disclosures: engine
                            .transcript()
                            .disclosures()
                            .map(|(kind, values)| (kind, values.to_vec()))
                            .collect(),
                        result: outcome,
                    })
                })
            })
            .collect();

        // Drive the voters, then close every submission window no matter
        // what happened, so the tallier threads always make progress.
        let submit_result: Result<(), ElectionError> = (|| {
            let mut link = TcpVoterLink {
                addrs: sub_addrs.clone(),
            };
            for ballot in dedup_first(ballots) {
                let mut rng = voter_rng(params.seed, &ballot.voter_tag.0);
                voter_submit(
                    config,
                    &secret,
                    params.session_id,
                    ballot,
                    &mut rng,
                    &mut link,
                )
                .map_err(|source| ElectionError::Submit {
                    voter: ballot.voter_tag.0.clone(),
                    source,
                })?;
            }
            Ok(())
        })();
        for (i, addr) in sub_addrs.iter().enumerate() {
            let me = (i + 1) as u16;
            let control_key = derive_pair_key(&secret, 0, me);
            let frame = Frame::new(
                FrameHeader {
                    kind: MessageKind::WindowClose,
                    session_id: params.session_id,
                    sender: 0,
                    round: 0,
                },
                Vec::new(),
            );
            if let Ok(mut stream) = TcpStream::connect(*addr) {
                let _ = write_body(&mut stream, &frame.encode_body(&control_key));
            }
        }
        let runs: Result<Vec<_>, PhasedError> = handles
            .into_iter()
            .map(|h| h.join().expect("tallier thread panicked"))
            .collect();
        submit_result?;
        assemble(config, runs?)
    })
}

/// Checks that every tallier reached the same public outcome and shapes the
/// final result.
fn assemble(
    config: &ElectionConfig,
    runs: Vec<TallierRun<TallierOutcome>>,
) -> Result<ElectionResult, ElectionError> {
    let first = &runs[0].result;
    for run in &runs[1..] {
        if run.result != *first {
            return Err(ElectionError::Disagreement(format!(
                "tallier {} diverged from tallier 1",
                run.party
            )));
        }
    }
    let TallierOutcome::Completed {
        winners,
        verdicts,
        evidence,
    } = first
    else {
        return Err(ElectionError::EmptyElection);
    };

    let verdicts: Vec<VoterVerdict> = verdicts
        .iter()
        .map(|(tag, failure)| VoterVerdict {
            voter_tag: tag.clone(),
            outcome: match failure {
                None => VerdictOutcome::Accepted,
                Some(reason) => VerdictOutcome::Rejected {
                    reason: *reason,
                    recovered: evidence.get(tag).cloned().unwrap_or_default(),
                },
            },
        })
        .collect();

    Ok(ElectionResult {
        winner_names: winners
            .iter()
            .map(|&idx| config.candidates[idx].clone())
            .collect(),
        winner_indices: winners.clone(),
        verdicts,
        stats: runs[0].stats,
        transcripts: runs.iter().map(|r| r.transcript_text.clone()).collect(),
        disclosures: runs[0].disclosures.clone(),
    })
}

/// A tallier's local additive aggregate over a set of accepted share
/// vectors, the Step-4 computation between validation and resharing.
/// Exposed for the aggregation-identity checks.
pub fn additive_aggregate(
    shares_by_voter: &BTreeMap<String, Vec<FieldElement>>,
    modulus: crate::field::PrimeModulus,
    m: usize,
) -> Vec<FieldElement> {
    let mut aggregate = vec![modulus.zero(); m];
    for entries in shares_by_voter.values() {
        for (acc, entry) in aggregate.iter_mut().zip(entries) {
            *acc += *entry;
        }
    }
    aggregate
}
