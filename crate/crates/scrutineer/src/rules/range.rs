//! Range: every candidate gets a score in `{0, ..., L}`.

use super::{
    Ballot, Choice, ChoiceError, ElectionConfig, RuleKind, ScoreRule, SumCheck, ValidationPlan,
};
use crate::sharing::VoterTag;
use rand::{Rng, RngCore};

pub struct Range;

impl Range {
    fn max_score(config: &ElectionConfig) -> u64 {
        config.range_max.expect("validated range config carries L")
    }
}

impl ScoreRule for Range {
    fn kind(&self) -> RuleKind {
        RuleKind::Range
    }

    fn score_bound(&self, config: &ElectionConfig) -> u64 {
        config.voters as u64 * Self::max_score(config)
    }

    fn make_ballot(
        &self,
        config: &ElectionConfig,
        voter_tag: VoterTag,
        choice: &Choice,
    ) -> Result<Ballot, ChoiceError> {
        let m = config.candidate_count();
        let max = Self::max_score(config);
        let scores = match choice {
            Choice::Scores(scores) => scores.clone(),
            _ => return Err(ChoiceError::WrongChoiceKind(self.kind())),
        };
        if scores.len() != m {
            return Err(ChoiceError::WrongLength {
                expected: m,
                got: scores.len(),
            });
        }
        if let Some(&bad) = scores.iter().find(|&&s| s > max) {
            return Err(ChoiceError::ScoreTooLarge(bad, max));
        }
        Ok(Ballot { voter_tag, scores })
    }

    fn is_legal(&self, config: &ElectionConfig, scores: &[u64]) -> bool {
        let max = Self::max_score(config);
        scores.len() == config.candidate_count() && scores.iter().all(|&s| s <= max)
    }

    fn validation_plan(&self, config: &ElectionConfig) -> ValidationPlan {
        ValidationPlan {
            entry_chain_len: Self::max_score(config) + 1,
            sum_check: SumCheck::Unconstrained,
            pairwise_distinct: false,
        }
    }

    fn sample_choice(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Choice {
        let max = Self::max_score(config);
        Choice::Scores(
            (0..config.candidate_count())
                .map(|_| rng.random_range(0..=max))
                .collect(),
        )
    }

    fn sample_illegal_scores(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Vec<u64> {
        let m = config.candidate_count();
        let max = Self::max_score(config);
        let p = config.modulus.value();
        let mut scores: Vec<u64> = (0..m).map(|_| rng.random_range(0..=max)).collect();
        // one entry pushed past L, capped below the modulus
        let boost = (max + 1 + rng.random_range(0..=max)).min(p - 1);
        scores[rng.random_range(0..m)] = boost;
        scores
    }
}
