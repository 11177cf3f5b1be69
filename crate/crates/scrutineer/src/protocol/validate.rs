//! Oblivious ballot validation.
//!
//! Works on threshold-shared ballot entries; ballots stay hidden
//! throughout. Per entry `u` the talliers evaluate the falling product
//! `u (u-1) ... (u-c+1)` and batch-test the results for zero, which proves
//! `u < c`. Whole-ballot checks follow the rule's plan: an exact entry-sum
//! opening, a budget comparison, and for borda a masked product of all
//! pairwise entry differences whose zero-ness exposes duplicate scores.
//!
//! Validation randomness is sampled jointly only after every tested value
//! is fixed. Checks for all voters run batched, so the multiplication
//! layers stay flat regardless of the electorate size.

use crate::mpc::DisclosureKind;
use crate::mpc::{MpcError, Shared, TallierEngine};
use crate::rules::{rule_for, ElectionConfig, SumCheck};

/// Why a ballot failed validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// Some entry fell outside the rule's allowed value range.
    EntryOutOfRange,
    /// The entry sum missed the rule's required value.
    SumMismatch,
    /// More approvals than the rule's budget allows.
    BudgetExceeded,
    /// Two entries carried the same score (borda).
    DuplicateScores,
}

impl RejectReason {
    pub fn label(&self) -> &'static str {
        match self {
            RejectReason::EntryOutOfRange => "entry-out-of-range",
            RejectReason::SumMismatch => "sum-mismatch",
            RejectReason::BudgetExceeded => "budget-exceeded",
            RejectReason::DuplicateScores => "duplicate-scores",
        }
    }
}

/// Validates every voter's shared ballot entries; `None` means accepted.
pub fn validate_ballots(
    engine: &mut TallierEngine,
    config: &ElectionConfig,
    per_voter: &[Vec<Shared>],
) -> Result<Vec<Option<RejectReason>>, MpcError> {
    let plan = rule_for(config.rule).validation_plan(config);
    let n = per_voter.len();
    let m = config.candidate_count();
    let modulus = config.modulus;

    // Per-entry range checks, one flat multiplication layer per tree level.
    let all_entries: Vec<Shared> = per_voter.iter().flatten().copied().collect();
    let chain_values = engine.product_chain_batch(&all_entries, plan.entry_chain_len)?;
    let groups: Vec<Vec<Shared>> = chain_values.chunks(m).map(|c| c.to_vec()).collect();
    let range_ok = engine.zero_test_groups(&groups)?;

    // Whole-ballot sum checks.
    let sums: Vec<Shared> = per_voter
        .iter()
        .map(|entries| engine.sum(entries))
        .collect::<Result<_, _>>()?;
    let sum_failure: Vec<Option<RejectReason>> = match plan.sum_check {
        SumCheck::Exactly(target) => {
            let opened = engine.open_batch(&sums, DisclosureKind::ValidationVerdict)?;
            let target = modulus.elem(target);
            opened
                .iter()
                .map(|&v| (v != target).then_some(RejectReason::SumMismatch))
                .collect()
        }
        SumCheck::AtMost(budget) => {
            // strict compare against budget + 1; sound whenever the entry
            // checks passed, which is the only case where it decides
            let threshold = engine.constant(budget + 1);
            let pairs: Vec<(Shared, Shared)> = sums.iter().map(|s| (*s, threshold)).collect();
            let bits = engine.less_than_batch(&pairs)?;
            let opened = engine.open_batch(&bits, DisclosureKind::ValidationVerdict)?;
            opened
                .iter()
                .map(|v| (v.value() != 1).then_some(RejectReason::BudgetExceeded))
                .collect()
        }
        SumCheck::Unconstrained => vec![None; n],
    };

    // Pairwise distinctness (borda): the product of all entry differences
    // is zero iff two entries coincide; a jointly random nonzero mask hides
    // everything else about it (for one, the permutation's sign).
    let distinct_failure: Vec<Option<RejectReason>> = if plan.pairwise_distinct {
        let mut diff_groups: Vec<Vec<Shared>> = Vec::with_capacity(n);
        for entries in per_voter {
            let mut diffs = Vec::with_capacity(m * (m - 1) / 2);
            for i in 0..m {
                for j in (i + 1)..m {
                    diffs.push(engine.sub(&entries[i], &entries[j])?);
                }
            }
            diff_groups.push(diffs);
        }
        let products = engine.tree_product_batch(diff_groups)?;
        let masks = engine.rand_shared_nonzero_batch(n)?;
        let masked_pairs: Vec<(Shared, Shared)> =
            products.iter().zip(&masks).map(|(p, r)| (*p, *r)).collect();
        let masked = engine.mul_batch(&masked_pairs)?;
        let opened = engine.open_batch(&masked, DisclosureKind::ValidationVerdict)?;
        opened
            .iter()
            .map(|v| v.is_zero().then_some(RejectReason::DuplicateScores))
            .collect()
    } else {
        vec![None; n]
    };

    Ok((0..n)
        .map(|i| {
            if !range_ok[i] {
                Some(RejectReason::EntryOutOfRange)
            } else if let Some(reason) = sum_failure[i] {
                Some(reason)
            } else {
                distinct_failure[i]
            }
        })
        .collect())
}
