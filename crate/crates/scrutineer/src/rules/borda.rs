//! Borda: the ballot is a permutation of `{0, ..., M-1}`, where `M-1` marks
//! the most favorite candidate and `0` the least.

use super::{
    Ballot, Choice, ChoiceError, ElectionConfig, RuleKind, ScoreRule, SumCheck, ValidationPlan,
};
use crate::sharing::VoterTag;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};

pub struct Borda;

impl ScoreRule for Borda {
    fn kind(&self) -> RuleKind {
        RuleKind::Borda
    }

    fn score_bound(&self, config: &ElectionConfig) -> u64 {
        config.voters as u64 * config.candidate_count() as u64
    }

    fn make_ballot(
        &self,
        config: &ElectionConfig,
        voter_tag: VoterTag,
        choice: &Choice,
    ) -> Result<Ballot, ChoiceError> {
        let m = config.candidate_count();
        let ranking = match choice {
            Choice::Ranking(order) => order,
            _ => return Err(ChoiceError::WrongChoiceKind(self.kind())),
        };
        if ranking.len() != m {
            return Err(ChoiceError::NotAPermutation);
        }
        let mut scores = vec![u64::MAX; m];
        for (position, &candidate) in ranking.iter().enumerate() {
            if candidate >= m {
                return Err(ChoiceError::CandidateOutOfRange(candidate, m));
            }
            if scores[candidate] != u64::MAX {
                return Err(ChoiceError::DuplicateCandidate(candidate));
            }
            // ranking[0] is the most favorite and earns M-1 points
            scores[candidate] = (m - 1 - position) as u64;
        }
        Ok(Ballot { voter_tag, scores })
    }

    fn is_legal(&self, config: &ElectionConfig, scores: &[u64]) -> bool {
        let m = config.candidate_count();
        if scores.len() != m {
            return false;
        }
        let mut seen = vec![false; m];
        for &s in scores {
            if s >= m as u64 || seen[s as usize] {
                return false;
            }
            seen[s as usize] = true;
        }
        true
    }

    fn validation_plan(&self, config: &ElectionConfig) -> ValidationPlan {
        let m = config.candidate_count() as u64;
        ValidationPlan {
            entry_chain_len: m,
            sum_check: SumCheck::Exactly(m * (m - 1) / 2),
            pairwise_distinct: true,
        }
    }

    fn sample_choice(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Choice {
        let mut order: Vec<usize> = (0..config.candidate_count()).collect();
        order.shuffle(rng);
        Choice::Ranking(order)
    }

    fn sample_illegal_scores(&self, config: &ElectionConfig, rng: &mut dyn RngCore) -> Vec<u64> {
        let m = config.candidate_count();
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let mut scores: Vec<u64> = order.iter().map(|&c| c as u64).collect();
        if rng.random_bool(0.5) {
            // duplicate one position's value: gives the same points twice
            let a = rng.random_range(0..m);
            let b = (a + 1 + rng.random_range(0..m - 1)) % m;
            scores[a] = scores[b];
        } else {
            // out-of-range position, inflating the favorite
            scores[rng.random_range(0..m)] = m as u64 + rng.random_range(0..=m as u64);
        }
        scores
    }
}
