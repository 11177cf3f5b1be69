//! Secure top-K selection over the shared aggregate scores.
//!
//! K passes of oblivious argmax: each pass scans the remaining candidates
//! keeping a current-best index and opens one strict comparison bit per
//! step, so ties fall to the lower index. `K (2M - K - 1) / 2` comparisons
//! total. The opened bits only reveal (part of) the order the aggregated
//! scores induce on the candidates; the scores themselves are never opened.

use crate::mpc::{DisclosureKind, MpcError, Shared, TallierEngine};

pub fn select_top_k(
    engine: &mut TallierEngine,
    scores: &[Shared],
    k: usize,
) -> Result<Vec<usize>, MpcError> {
    assert!(k <= scores.len());
    let mut remaining: Vec<usize> = (0..scores.len()).collect();
    let mut winners = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best = remaining[0];
        for &candidate in &remaining[1..] {
            let bit = engine.less_than(&scores[best], &scores[candidate])?;
            let opened = engine.open(&bit, DisclosureKind::ComparisonBit)?;
            if opened.value() == 1 {
                best = candidate;
            }
        }
        winners.push(best);
        remaining.retain(|&c| c != best);
    }
    Ok(winners)
}
