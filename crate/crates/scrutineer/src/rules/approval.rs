//! Approval: a binary vector with at most K ones, used to fill K seats.

use super::{
    Ballot, Choice, ChoiceError, ElectionConfig, RuleKind, ScoreRule, SumCheck, ValidationPlan,
};
use crate::sharing::VoterTag;
use rand::seq::index::sample;
use rand::{Rng, RngCore};

pub struct Approval;

impl ScoreRule for Approval {
    fn kind(&self) -> RuleKind {
        RuleKind::Approval
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
        let approvals = match choice {
            Choice::Approvals(list) => list,
            _ => return Err(ChoiceError::WrongChoiceKind(self.kind())),
        };
        if approvals.len() > config.winners {
            return Err(ChoiceError::TooManyApprovals(
                config.winners,
                approvals.len(),
            ));
        }
        let mut scores = vec![0u64; m];
        for &idx in approvals {
            if idx >= m {
                return Err(ChoiceError::CandidateOutOfRange(idx, m));
            }
            if scores[idx] == 1 {
                return Err(ChoiceError::DuplicateCandidate(idx));
            }
            scores[idx] = 1;
        }
        Ok(Ballot { voter_tag, scores })
    }

    fn is_legal(&self, config: &ElectionConfig, scores: &[u64]) -> bool {
        // "up to K" approvals: the empty ballot is a legal abstention
        scores.len() == config.candidate_count()
            && scores.iter().all(|&s| s <= 1)
            && scores.iter().sum::<u64>() <= config.winners as u64
    }

    fn validation_plan(&self, config: &ElectionConfig) -> ValidationPlan {
        ValidationPlan {
            entry_chain_len: 2,
            sum_check: SumCheck::AtMost(config.winners as u64),
            pairwise_distinct: false,
        }
    }

    fn sample_choice(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Choice {
        let count = rng.random_range(0..=config.winners);
        Choice::Approvals(sample(rng, config.candidate_count(), count).into_vec())
    }

    fn sample_illegal_scores(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Vec<u64> {
        let m = config.candidate_count();
        let k = config.winners;
        let mut scores = vec![0u64; m];
        if k < m && rng.random_bool(0.5) {
            // approve K + 1 candidates
            for idx in sample(rng, m, k + 1).into_vec() {
                scores[idx] = 1;
            }
        } else {
            // non-binary entry
            scores[rng.random_range(0..m)] = 2 + rng.random_range(0..3);
        }
        scores
    }
}
