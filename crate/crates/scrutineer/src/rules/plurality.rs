//! Plurality: one vote for exactly one candidate.

use super::{
    Ballot, Choice, ChoiceError, ElectionConfig, RuleKind, ScoreRule, SumCheck, ValidationPlan,
};
use crate::sharing::VoterTag;
use rand::{Rng, RngCore};

pub struct Plurality;

impl ScoreRule for Plurality {
    fn kind(&self) -> RuleKind {
        RuleKind::Plurality
    }

    fn score_bound(&self, config: &ElectionConfig) -> u64 {
        config.voters as u64
    }

    fn make_ballot(
        &self,
        config: &ElectionConfig,
        voter_tag: VoterTag,
        choice: &Choice,
    ) -> Result<Ballot, ChoiceError> {
        let m = config.candidate_count();
        let favorite = match choice {
            Choice::Favorite(idx) => *idx,
            _ => return Err(ChoiceError::WrongChoiceKind(self.kind())),
        };
        if favorite >= m {
            return Err(ChoiceError::CandidateOutOfRange(favorite, m));
        }
        let mut scores = vec![0u64; m];
        scores[favorite] = 1;
        Ok(Ballot { voter_tag, scores })
    }

    fn is_legal(&self, config: &ElectionConfig, scores: &[u64]) -> bool {
        scores.len() == config.candidate_count()
            && scores.iter().all(|&s| s <= 1)
            && scores.iter().sum::<u64>() == 1
    }

    fn validation_plan(&self, _config: &ElectionConfig) -> ValidationPlan {
        ValidationPlan {
            entry_chain_len: 2,
            sum_check: SumCheck::Exactly(1),
            pairwise_distinct: false,
        }
    }

    fn sample_choice(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Choice {
        Choice::Favorite(rng.random_range(0..config.candidate_count()))
    }

    fn sample_illegal_scores(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Vec<u64> {
        let m = config.candidate_count();
        let mut scores = vec![0u64; m];
        match rng.random_range(0..3u8) {
            0 => {
                // the classic boost: cast N votes for the favorite
                scores[rng.random_range(0..m)] = config.voters.max(2) as u64;
            }
            1 => {
                // vote for two candidates
                let a = rng.random_range(0..m);
                let b = (a + 1 + rng.random_range(0..m - 1)) % m;
                scores[a] = 1;
                scores[b] = 1;
            }
            _ => {
                // out-of-range single entry
                scores[rng.random_range(0..m)] = 2;
            }
        }
        scores
    }
}
