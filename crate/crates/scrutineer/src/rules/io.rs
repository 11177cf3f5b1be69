//! Ballot file format: one ballot per line, `voter_tag;s1,s2,...,sM`.

use super::Ballot;
use crate::sharing::VoterTag;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BallotParseError {
    #[error("line {0}: expected 'voter_tag;s1,s2,...'")]
    MissingSeparator(usize),
    #[error("line {0}: empty voter tag")]
    EmptyTag(usize),
    #[error("line {line}: bad score '{score}'")]
    BadScore { line: usize, score: String },
    #[error("cannot read ballots: {0}")]
    Io(String),
}

pub fn parse_ballot_line(lineno: usize, line: &str) -> Result<Ballot, BallotParseError> {
    let (tag, scores_text) = line
        .split_once(';')
        .ok_or(BallotParseError::MissingSeparator(lineno))?;
    let tag = tag.trim();
    if tag.is_empty() {
        return Err(BallotParseError::EmptyTag(lineno));
    }
    let scores = scores_text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| BallotParseError::BadScore {
                    line: lineno,
                    score: s.trim().to_string(),
                })
        })
        .collect::<Result<Vec<u64>, _>>()?;
    Ok(Ballot {
        voter_tag: VoterTag(tag.to_string()),
        scores,
    })
}

pub fn parse_ballots(text: &str) -> Result<Vec<Ballot>, BallotParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| {
            let t = line.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, line)| parse_ballot_line(i + 1, line.trim()))
        .collect()
}

pub fn read_ballots(path: &std::path::Path) -> Result<Vec<Ballot>, BallotParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| BallotParseError::Io(e.to_string()))?;
    parse_ballots(&text)
}

pub fn format_ballot(ballot: &Ballot) -> String {
    let scores: Vec<String> = ballot.scores.iter().map(|s| s.to_string()).collect();
    format!("{};{}", ballot.voter_tag, scores.join(","))
}

pub fn write_ballots(path: &std::path::Path, ballots: &[Ballot]) -> std::io::Result<()> {
    let mut out = String::new();
    for ballot in ballots {
        out.push_str(&format_ballot(ballot));
        out.push('\n');
    }
    std::fs::write(path, out)
}
