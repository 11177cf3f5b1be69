//! Plaintext semantics of the five score-based voting rules.
//!
//! Each rule is a strategy behind the [`ScoreRule`] trait, registered by
//! name and selected at runtime from the election config. Everything here is
//! exact integer arithmetic on public values; the MPC layers treat this
//! module as the trusted oracle their outputs are tested against.

mod approval;
mod borda;
mod config;
mod io;
mod plurality;
mod range;
mod veto;

pub use config::{parse_prime, ConfigError, ElectionConfig, TieBreak};
pub use io::{
    format_ballot, parse_ballot_line, parse_ballots, read_ballots, write_ballots, BallotParseError,
};

use crate::sharing::VoterTag;
use rand::RngCore;
use thiserror::Error;

/// The five supported score-based rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleKind {
    Plurality,
    Range,
    Approval,
    Veto,
    Borda,
}

impl RuleKind {
    pub const ALL: [RuleKind; 5] = [
        RuleKind::Plurality,
        RuleKind::Range,
        RuleKind::Approval,
        RuleKind::Veto,
        RuleKind::Borda,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            RuleKind::Plurality => "plurality",
            RuleKind::Range => "range",
            RuleKind::Approval => "approval",
            RuleKind::Veto => "veto",
            RuleKind::Borda => "borda",
        }
    }
}

impl std::str::FromStr for RuleKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        rule_by_name(s)
            .map(|r| r.kind())
            .ok_or_else(|| ConfigError::UnknownRule(s.to_string()))
    }
}

impl std::fmt::Display for RuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A voter's input, before it is expanded into a score vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Choice {
    /// Index of the single favorite candidate (plurality).
    Favorite(usize),
    /// A full score vector, one entry per candidate (range).
    Scores(Vec<u64>),
    /// Indices of the approved candidates (approval).
    Approvals(Vec<usize>),
    /// Index of the vetoed candidate (veto).
    VetoOf(usize),
    /// Candidate indices from most to least favorite (borda).
    Ranking(Vec<usize>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChoiceError {
    #[error("candidate index {0} out of range (M = {1})")]
    CandidateOutOfRange(usize, usize),
    #[error("expected {expected} scores, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("score {0} exceeds the rule maximum {1}")]
    ScoreTooLarge(u64, u64),
    #[error("candidate index {0} listed twice")]
    DuplicateCandidate(usize),
    #[error("at most {0} approvals allowed, got {1}")]
    TooManyApprovals(usize, usize),
    #[error("ranking must list every candidate exactly once")]
    NotAPermutation,
    #[error("choice kind does not match the {0} rule")]
    WrongChoiceKind(RuleKind),
}

/// A cast ballot: a length-M score vector plus the voter's tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ballot {
    pub voter_tag: VoterTag,
    pub scores: Vec<u64>,
}

/// Aggregated scores, entry-wise integer sums of legal ballots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TallyVector(pub Vec<u64>);

impl TallyVector {
    pub fn scores(&self) -> &[u64] {
        &self.0
    }
}

/// How a hidden ballot for this rule gets validated inside the MPC.
///
/// Per entry `u`, the circuit checks `u < chain_len` by testing
/// `u (u-1) ... (u-chain_len+1) = 0`; the whole-ballot checks cover the sum
/// and, for borda, pairwise distinctness of the entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationPlan {
    pub entry_chain_len: u64,
    pub sum_check: SumCheck,
    pub pairwise_distinct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SumCheck {
    /// The entry sum must equal this value (mod p).
    Exactly(u64),
    /// The entry sum must be at most this value (strict compare vs value+1).
    AtMost(u64),
    /// No constraint beyond the per-entry checks.
    Unconstrained,
}

/// A score-based voting rule: ballot template, legality predicate, score
/// bound and the validation circuit shape.
pub trait ScoreRule: Send + Sync {
    fn kind(&self) -> RuleKind;

    /// Upper bound `B` on any candidate's aggregated score, given the
    /// election parameters. The field modulus must exceed this.
    fn score_bound(&self, config: &ElectionConfig) -> u64;

    /// Expands a well-formed choice into the rule's canonical score vector.
    fn make_ballot(
        &self,
        config: &ElectionConfig,
        voter_tag: VoterTag,
        choice: &Choice,
    ) -> Result<Ballot, ChoiceError>;

    /// Total legality predicate over raw score vectors.
    fn is_legal(&self, config: &ElectionConfig, scores: &[u64]) -> bool;

    /// The MPC validation circuit shape for this rule.
    fn validation_plan(&self, config: &ElectionConfig) -> ValidationPlan;

    /// Draws a uniform-ish legal choice; used by the electorate generator.
    fn sample_choice(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Choice;

    /// Draws an illegal score vector of one of the rule's documented
    /// cheating shapes (e.g. casting `N * e_m` under plurality).
    fn sample_illegal_scores(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Vec<u64>;
}

static PLURALITY: plurality::Plurality = plurality::Plurality;
static RANGE: range::Range = range::Range;
static APPROVAL: approval::Approval = approval::Approval;
static VETO: veto::Veto = veto::Veto;
static BORDA: borda::Borda = borda::Borda;

static REGISTRY: [&dyn ScoreRule; 5] = [&PLURALITY, &RANGE, &APPROVAL, &VETO, &BORDA];

/// All registered rule strategies.
pub fn all_rules() -> &'static [&'static dyn ScoreRule] {
    &REGISTRY
}

/// Looks a rule up by its registered name (case-insensitive).
pub fn rule_by_name(name: &str) -> Option<&'static dyn ScoreRule> {
    let lowered = name.to_ascii_lowercase();
    REGISTRY
        .iter()
        .copied()
        .find(|r| r.kind().name() == lowered)
}

/// The strategy for a given kind.
pub fn rule_for(kind: RuleKind) -> &'static dyn ScoreRule {
    REGISTRY
        .iter()
        .copied()
        .find(|r| r.kind() == kind)
        .expect("every RuleKind is registered")
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TallyError {
    #[error("illegal ballot from voter {0}")]
    IllegalBallot(VoterTag),
    #[error("got {got} ballots but the election is sized for {max}")]
    TooManyBallots { got: usize, max: usize },
}

/// Entry-wise integer sum of the given ballots, rejecting any illegal one.
pub fn plaintext_tally(
    config: &ElectionConfig,
    ballots: &[Ballot],
) -> Result<TallyVector, TallyError> {
    if ballots.len() > config.voters {
        return Err(TallyError::TooManyBallots {
            got: ballots.len(),
            max: config.voters,
        });
    }
    let rule = rule_for(config.rule);
    let mut totals = vec![0u64; config.candidate_count()];
    for ballot in ballots {
        if !rule.is_legal(config, &ballot.scores) {
            return Err(TallyError::IllegalBallot(ballot.voter_tag.clone()));
        }
        for (total, &score) in totals.iter_mut().zip(&ballot.scores) {
            *total += score;
        }
    }
    Ok(TallyVector(totals))
}

/// Indices of the `k` highest-scoring candidates, descending by score, ties
/// broken toward the lower index.
pub fn plaintext_winners(tally: &TallyVector, k: usize, _tiebreak: TieBreak) -> Vec<usize> {
    let mut order: Vec<usize> = (0..tally.0.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(tally.0[i]), i));
    order.truncate(k);
    order
}
