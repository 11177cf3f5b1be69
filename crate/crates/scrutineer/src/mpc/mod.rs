//! Honest-majority, semi-honest secure computation over Shamir-shared
//! values, with full round, gate and byte accounting.
//!
//! One [`TallierEngine`] runs per tallier; engines talk only through the
//! transport, one blocking exchange per round, so correctness never depends
//! on arrival order within a round. Multiplication consumes preprocessed
//! Beaver triples; the comparison protocol runs in a fixed four interactive
//! rounds whatever the field or party count.
//!
//! Preprocessed material comes from a dealer stream that every engine
//! replays from the shared session seed. The dealer is simulation
//! scaffolding, not a protocol party; swapping in distributed preprocessing
//! is an extension point that leaves the online phase untouched.

mod cluster;
mod compare;
mod dealer;
mod engine;
mod transcript;

pub(crate) use cluster::session_secret;
pub use cluster::{run_networked, run_simulated, TallierRun};
pub use compare::{comparison_gates, reference_comparison_gates, COMPARISON_ROUNDS};
pub use engine::{Shared, TallierEngine};
pub use transcript::{Transcript, TranscriptEvent};

use crate::transport::TransportError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MpcError {
    #[error("shared value belongs to a different session")]
    Session,
    #[error("preprocessing exhausted: {0}")]
    Preprocessing(String),
    #[error("protocol abort: {0}")]
    Abort(String),
    #[error("transport failure: {0}")]
    Transport(#[from] TransportError),
}

impl MpcError {
    /// A peer went away mid-round.
    pub fn is_missing_tallier(&self) -> bool {
        matches!(self, MpcError::Transport(TransportError::Closed(_)))
    }
}

/// Session-wide parameters every engine agrees on up front.
#[derive(Debug, Clone)]
pub struct SessionParams {
    pub modulus: crate::field::PrimeModulus,
    /// Number of talliers `D`.
    pub talliers: u16,
    /// Sharing degree `t`; honest majority requires `t <= (D-1)/2`.
    pub threshold: usize,
    pub session_id: [u8; 16],
    /// Master seed; drives the dealer stream and each tallier's local
    /// randomness, making simulate-mode transcripts reproducible.
    pub seed: u64,
    /// Generate joint public coins by commit-then-reveal instead of a
    /// plain exchange (used in network mode).
    pub commit_reveal_coins: bool,
    /// Optional cap on multiplication resources, for exercising the
    /// exhaustion path; `None` means the dealer generates on demand.
    pub triple_budget: Option<u64>,
}

impl SessionParams {
    pub fn new(modulus: crate::field::PrimeModulus, talliers: u16, seed: u64) -> Self {
        let threshold = ((talliers as usize) - 1) / 2;
        SessionParams {
            modulus,
            talliers,
            threshold,
            session_id: derive_session_id(seed),
            seed,
            commit_reveal_coins: false,
            triple_budget: None,
        }
    }
}

pub(crate) fn derive_session_id(seed: u64) -> [u8; 16] {
    use sha2::{Digest, Sha256};
    let digest = Sha256::new()
        .chain_update(b"session-id")
        .chain_update(seed.to_be_bytes())
        .finalize();
    let mut id = [0u8; 16];
    id.copy_from_slice(&digest[..16]);
    id
}

/// Why a value was opened to everyone. The disclosure audit checks that a
/// full election run opens nothing outside these categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisclosureKind {
    /// A comparison bit from winner selection.
    ComparisonBit,
    /// A ballot-validation verdict value (zero-test combination, entry-sum,
    /// budget bit or masked distinctness product).
    ValidationVerdict,
    /// A declared protocol output.
    Output,
}

impl DisclosureKind {
    pub fn label(&self) -> &'static str {
        match self {
            DisclosureKind::ComparisonBit => "comparison-bit",
            DisclosureKind::ValidationVerdict => "validation-verdict",
            DisclosureKind::Output => "output",
        }
    }
}

/// Protocol-internal reveals of information-theoretically masked values.
/// These are uniform and independent of every secret, and the transcript
/// keeps them separate from intentional disclosures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskKind {
    /// Beaver openings `x - a`, `y - b`.
    BeaverOpening,
    /// A secret plus a fresh uniform mask (comparison input masking).
    MaskedValue,
    /// Prefix-product masking values.
    PrefixMask,
    /// Values opened while deriving shared randomness (squares, products).
    RandomnessSetup,
}

impl MaskKind {
    pub fn label(&self) -> &'static str {
        match self {
            MaskKind::BeaverOpening => "beaver-opening",
            MaskKind::MaskedValue => "masked-value",
            MaskKind::PrefixMask => "prefix-mask",
            MaskKind::RandomnessSetup => "randomness-setup",
        }
    }
}

/// Cumulative cost counters for one tallier's session.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CircuitStats {
    /// Interactive multiplication gates evaluated.
    pub mult_gates: u64,
    /// Communication rounds (blocking exchanges).
    pub rounds: u64,
    /// Rounds attributable to multiplication layers.
    pub mult_rounds: u64,
    /// Payload bytes this tallier sent (field elements only, headers and
    /// MACs excluded, matching the per-gate cost model).
    pub bytes_sent: u64,
}
