//! Veto: a 1 for everyone except the single vetoed candidate; the winner is
//! whoever collects the fewest zeros.

use super::{
    Ballot, Choice, ChoiceError, ElectionConfig, RuleKind, ScoreRule, SumCheck, ValidationPlan,
};
use crate::sharing::VoterTag;
use rand::{Rng, RngCore};

pub struct Veto;

impl ScoreRule for Veto {
    fn kind(&self) -> RuleKind {
        RuleKind::Veto
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
        let vetoed = match choice {
            Choice::VetoOf(idx) => *idx,
            _ => return Err(ChoiceError::WrongChoiceKind(self.kind())),
        };
        if vetoed >= m {
            return Err(ChoiceError::CandidateOutOfRange(vetoed, m));
        }
        let mut scores = vec![1u64; m];
        scores[vetoed] = 0;
        Ok(Ballot { voter_tag, scores })
    }

    fn is_legal(&self, config: &ElectionConfig, scores: &[u64]) -> bool {
        let m = config.candidate_count();
        scores.len() == m
            && scores.iter().all(|&s| s <= 1)
            && scores.iter().sum::<u64>() == (m as u64) - 1
    }

    fn validation_plan(&self, config: &ElectionConfig) -> ValidationPlan {
        ValidationPlan {
            entry_chain_len: 2,
            sum_check: SumCheck::Exactly(config.candidate_count() as u64 - 1),
            pairwise_distinct: false,
        }
    }

    fn sample_choice(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Choice {
        Choice::VetoOf(rng.random_range(0..config.candidate_count()))
    }

    fn sample_illegal_scores(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Vec<u64> {
        let m = config.candidate_count();
        match rng.random_range(0..3u8) {
            0 => vec![1u64; m], // vetoed nobody
            1 => {
                // vetoed two candidates
                let mut scores = vec![1u64; m];
                let a = rng.random_range(0..m);
                let b = (a + 1 + rng.random_range(0..m - 1)) % m;
                scores[a] = 0;
                scores[b] = 0;
                scores
            }
            _ => {
                // non-binary entry hidden among the ones
                let mut scores = vec![1u64; m];
                scores[rng.random_range(0..m)] = 2;
                scores
            }
        }
    }
}
