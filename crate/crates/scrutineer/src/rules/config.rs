//! Election parameters and the key-value config file format.

use super::{rule_for, RuleKind};
use crate::field::PrimeModulus;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown rule '{0}'")]
    UnknownRule(String),
    #[error("need at least 2 candidates, got {0}")]
    TooFewCandidates(usize),
    #[error("winner count {k} must satisfy 1 <= K <= {m}")]
    BadWinnerCount { k: usize, m: usize },
    #[error("need at least 2 talliers, got {0}")]
    TooFewTalliers(usize),
    #[error("need at least 1 voter slot")]
    NoVoters,
    #[error("the range rule requires range-max >= 1")]
    MissingRangeMax,
    #[error("modulus too small for bound B (p = {p}, B = {bound})")]
    ModulusTooSmallForBound { p: u64, bound: u64 },
    #[error("modulus {p} must exceed the candidate count {m}")]
    ModulusTooSmallForCandidates { p: u64, m: usize },
    #[error("secure comparison needs B < p/2 (p = {p}, B = {bound})")]
    BoundTooCloseToModulus { p: u64, bound: u64 },
    #[error("duplicate candidate name '{0}'")]
    DuplicateCandidate(String),
    #[error("invalid prime '{0}': expected p13, p31 or a prime integer")]
    BadPrime(String),
    #[error("config line {0} is not 'key = value'")]
    BadLine(usize),
    #[error("missing required key '{0}'")]
    MissingKey(&'static str),
    #[error("invalid value for '{key}': {value}")]
    BadValue { key: &'static str, value: String },
    #[error("unknown config key '{0}'")]
    UnknownKey(String),
}

/// Tie-break policy for winner selection. Only deterministic lowest-index is
/// supported; keeping it in the config pins the policy for audits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LowestIndex,
}

impl TieBreak {
    pub fn name(&self) -> &'static str {
        "lowest-index"
    }
}

/// Everything that fixes an election: the rule, sizes, field and tie-break.
///
/// Candidate indices are assigned by the lexicographic order of their names,
/// so every participant derives the same indexing from the same config.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionConfig {
    pub rule: RuleKind,
    /// Candidate names, sorted lexicographically; index = position here.
    pub candidates: Vec<String>,
    /// Number of voter slots `N`; the score bound assumes at most this many
    /// ballots are accepted.
    pub voters: usize,
    /// Number of winners `K`.
    pub winners: usize,
    /// Maximum score `L` (range rule only).
    pub range_max: Option<u64>,
    /// Number of talliers `D`.
    pub talliers: usize,
    pub modulus: PrimeModulus,
    pub tiebreak: TieBreak,
}

impl ElectionConfig {
    /// Builds and validates a config; candidate names get sorted here.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rule: RuleKind,
        mut candidates: Vec<String>,
        voters: usize,
        winners: usize,
        range_max: Option<u64>,
        talliers: usize,
        modulus: PrimeModulus,
    ) -> Result<Self, ConfigError> {
        candidates.sort();
        let config = ElectionConfig {
            rule,
            candidates,
            voters,
            winners,
            range_max,
            talliers,
            modulus,
            tiebreak: TieBreak::LowestIndex,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    /// Upper bound `B` on any aggregated score under this config.
    pub fn score_bound(&self) -> u64 {
        rule_for(self.rule).score_bound(self)
    }

    /// Honest-majority sharing degree `t = floor((D - 1) / 2)`.
    pub fn threshold(&self) -> usize {
        (self.talliers - 1) / 2
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let m = self.candidate_count();
        if m < 2 {
            return Err(ConfigError::TooFewCandidates(m));
        }
        for (i, name) in self.candidates.iter().enumerate() {
            if self.candidates[..i].contains(name) {
                return Err(ConfigError::DuplicateCandidate(name.clone()));
            }
        }
        if self.winners == 0 || self.winners > m {
            return Err(ConfigError::BadWinnerCount { k: self.winners, m });
        }
        if self.talliers < 2 {
            return Err(ConfigError::TooFewTalliers(self.talliers));
        }
        if self.voters == 0 {
            return Err(ConfigError::NoVoters);
        }
        if self.rule == RuleKind::Range && self.range_max.unwrap_or(0) == 0 {
            return Err(ConfigError::MissingRangeMax);
        }
        let p = self.modulus.value();
        let bound = self.score_bound();
        if p <= bound {
            return Err(ConfigError::ModulusTooSmallForBound { p, bound });
        }
        if p <= m as u64 {
            return Err(ConfigError::ModulusTooSmallForCandidates { p, m });
        }
        // comparisons need the integer order of [0, B] to survive the field
        if bound >= p / 2 {
            return Err(ConfigError::BoundTooCloseToModulus { p, bound });
        }
        Ok(())
    }

    /// Parses the key-value config format; see the crate README for a
    /// worked example. Lines are `key = value`, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut rule = None;
        let mut candidates = None;
        let mut voters = None;
        let mut winners = None;
        let mut range_max = None;
        let mut talliers = None;
        let mut prime = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::BadLine(lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "rule" => rule = Some(value.parse::<RuleKind>()?),
                "candidates" => {
                    candidates = Some(
                        value
                            .split(',')
                            .map(|s| s.trim().to_string())
                            .filter(|s| !s.is_empty())
                            .collect::<Vec<_>>(),
                    )
                }
                "voters" => voters = Some(parse_num(key_static("voters"), value)?),
                "winners" => winners = Some(parse_num(key_static("winners"), value)?),
                "range-max" => range_max = Some(parse_num(key_static("range-max"), value)? as u64),
                "talliers" => talliers = Some(parse_num(key_static("talliers"), value)?),
                "prime" => prime = Some(parse_prime(value)?),
                "tiebreak" => {
                    if value != "lowest-index" {
                        return Err(ConfigError::BadValue {
                            key: "tiebreak",
                            value: value.to_string(),
                        });
                    }
                }
                other => return Err(ConfigError::UnknownKey(other.to_string())),
            }
        }

        ElectionConfig::new(
            rule.ok_or(ConfigError::MissingKey("rule"))?,
            candidates.ok_or(ConfigError::MissingKey("candidates"))?,
            voters.ok_or(ConfigError::MissingKey("voters"))?,
            winners.ok_or(ConfigError::MissingKey("winners"))?,
            range_max,
            talliers.ok_or(ConfigError::MissingKey("talliers"))?,
            prime.ok_or(ConfigError::MissingKey("prime"))?,
        )
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::BadValue {
            key: "config",
            value: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Renders the config back into the file format.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("rule = {}\n", self.rule));
        out.push_str(&format!("candidates = {}\n", self.candidates.join(", ")));
        out.push_str(&format!("voters = {}\n", self.voters));
        out.push_str(&format!("winners = {}\n", self.winners));
        if let Some(l) = self.range_max {
            out.push_str(&format!("range-max = {l}\n"));
        }
        out.push_str(&format!("talliers = {}\n", self.talliers));
        out.push_str(&format!("prime = {}\n", prime_name(self.modulus)));
        out.push_str(&format!("tiebreak = {}\n", self.tiebreak.name()));
        out
    }
}

fn key_static(key: &'static str) -> &'static str {
    key
}

fn parse_num(key: &'static str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key,
        value: value.to_string(),
    })
}

/// `p13` and `p31` name the two Mersenne primes; any other value must be a
/// prime integer literal.
pub fn parse_prime(value: &str) -> Result<PrimeModulus, ConfigError> {
    match value {
        "p13" => Ok(PrimeModulus::MERSENNE_13),
        "p31" => Ok(PrimeModulus::MERSENNE_31),
        other => other
            .parse::<u64>()
            .ok()
            .and_then(|n| PrimeModulus::new(n).ok())
            .ok_or_else(|| ConfigError::BadPrime(other.to_string())),
    }
}

fn prime_name(modulus: PrimeModulus) -> String {
    match modulus.value() {
        8191 => "p13".to_string(),
        2147483647 => "p31".to_string(),
        other => other.to_string(),
    }
}
