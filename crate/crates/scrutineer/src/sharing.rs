//! Additive D-out-of-D sharing of ballot vectors (voter side) and Shamir
//! threshold sharing (the substrate of the tallying MPC).
//!
//! Additive sharing is all-or-nothing: the full set of shares reconstructs,
//! any strict subset is jointly uniform. Shamir sharing reconstructs from any
//! `t + 1` of `D` shares; the tallying engine keeps `t = floor((D-1)/2)` so a
//! colluding minority learns nothing.

use crate::field::{FieldElement, PrimeModulus};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SharingError {
    #[error("additive sharing needs at least 2 talliers, got {0}")]
    TooFewTalliers(usize),
    #[error("share set is missing tallier index {0}")]
    MissingIndex(u16),
    #[error("share set holds duplicate tallier index {0}")]
    DuplicateIndex(u16),
    #[error("share vectors disagree on length or voter tag")]
    MismatchedShares,
    #[error("threshold sharing needs t + 1 <= D (t = {t}, D = {d})")]
    ThresholdTooHigh { t: usize, d: usize },
    #[error("evaluation points must be distinct and nonzero")]
    BadEvaluationPoints,
    #[error("need at least {needed} shares to reconstruct, got {got}")]
    InsufficientShares { needed: usize, got: usize },
}

/// Opaque voter identifier attached to every share and ballot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VoterTag(pub String);

impl std::fmt::Display for VoterTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for VoterTag {
    fn from(s: &str) -> Self {
        VoterTag(s.to_string())
    }
}

/// One tallier's additive share of a ballot vector: entry-wise, the `D`
/// share vectors of a ballot sum to the ballot mod p.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareVector {
    pub tallier_index: u16,
    pub entries: Vec<FieldElement>,
    pub voter_tag: VoterTag,
}

/// Splits a ballot vector into `d_count` additive shares.
///
/// Shares `1..D-1` are fresh uniform vectors; share `D` is the residual that
/// makes the entry-wise sum come out to the ballot.
pub fn additive_share<R: Rng + ?Sized>(
    ballot: &[FieldElement],
    d_count: usize,
    voter_tag: &VoterTag,
    rng: &mut R,
) -> Result<Vec<ShareVector>, SharingError> {
    if d_count < 2 {
        return Err(SharingError::TooFewTalliers(d_count));
    }
    let mut residual: Vec<FieldElement> = ballot.to_vec();
    let mut shares = Vec::with_capacity(d_count);
    for d in 1..d_count {
        let entries: Vec<FieldElement> = ballot
            .iter()
            .map(|entry| entry.modulus().sample_uniform(rng))
            .collect();
        for (acc, share_entry) in residual.iter_mut().zip(&entries) {
            *acc -= *share_entry;
        }
        shares.push(ShareVector {
            tallier_index: d as u16,
            entries,
            voter_tag: voter_tag.clone(),
        });
    }
    shares.push(ShareVector {
        tallier_index: d_count as u16,
        entries: residual,
        voter_tag: voter_tag.clone(),
    });
    Ok(shares)
}

/// Entry-wise modular sum of a complete share set (one share per tallier
/// index `1..=D`, same voter).
pub fn additive_reconstruct(
    shares: &[ShareVector],
    d_count: usize,
) -> Result<Vec<FieldElement>, SharingError> {
    let d = d_count;
    if d < 2 {
        return Err(SharingError::TooFewTalliers(d));
    }
    if shares.len() != d {
        if let Some(missing) =
            (1..=d as u16).find(|i| !shares.iter().any(|s| s.tallier_index == *i))
        {
            return Err(SharingError::MissingIndex(missing));
        }
    }
    let mut seen = vec![false; d + 1];
    for share in shares {
        let idx = share.tallier_index as usize;
        if idx == 0 || idx > d {
            return Err(SharingError::MissingIndex(share.tallier_index));
        }
        if seen[idx] {
            return Err(SharingError::DuplicateIndex(share.tallier_index));
        }
        seen[idx] = true;
    }
    if let Some(missing) = (1..=d).find(|&i| !seen[i]) {
        return Err(SharingError::MissingIndex(missing as u16));
    }
    let first = &shares[0];
    if shares
        .iter()
        .any(|s| s.entries.len() != first.entries.len() || s.voter_tag != first.voter_tag)
    {
        return Err(SharingError::MismatchedShares);
    }
    let mut sum = first.entries.clone();
    for share in &shares[1..] {
        for (acc, entry) in sum.iter_mut().zip(&share.entries) {
            *acc += *entry;
        }
    }
    Ok(sum)
}

/// A Shamir share: the value of a degree-`t` polynomial at a public nonzero
/// evaluation point; the secret sits at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShamirShare {
    pub evaluation_point: FieldElement,
    pub value: FieldElement,
    pub degree: usize,
}

/// Canonical evaluation points `1..=D` used throughout the tallying MPC.
pub fn canonical_points(modulus: PrimeModulus, d_count: usize) -> Vec<FieldElement> {
    (1..=d_count as u64).map(|i| modulus.elem(i)).collect()
}

/// Shares a secret as evaluations of a random degree-`t` polynomial with
/// constant term `secret`.
pub fn shamir_share<R: Rng + ?Sized>(
    secret: FieldElement,
    degree: usize,
    points: &[FieldElement],
    rng: &mut R,
) -> Result<Vec<ShamirShare>, SharingError> {
    if degree + 1 > points.len() {
        return Err(SharingError::ThresholdTooHigh {
            t: degree,
            d: points.len(),
        });
    }
    for (i, a) in points.iter().enumerate() {
        if a.is_zero() || points[..i].contains(a) {
            return Err(SharingError::BadEvaluationPoints);
        }
    }
    let modulus = secret.modulus();
    let mut coeffs = Vec::with_capacity(degree + 1);
    coeffs.push(secret);
    for _ in 0..degree {
        coeffs.push(modulus.sample_uniform(rng));
    }
    Ok(points
        .iter()
        .map(|&x| ShamirShare {
            evaluation_point: x,
            value: eval_poly(&coeffs, x),
            degree,
        })
        .collect())
}

/// Lagrange interpolation at zero from at least `t + 1` shares.
pub fn shamir_reconstruct(shares: &[ShamirShare]) -> Result<FieldElement, SharingError> {
    let degree = match shares.first() {
        Some(s) => s.degree,
        None => return Err(SharingError::InsufficientShares { needed: 1, got: 0 }),
    };
    if shares.iter().any(|s| s.degree != degree) {
        return Err(SharingError::MismatchedShares);
    }
    if shares.len() < degree + 1 {
        return Err(SharingError::InsufficientShares {
            needed: degree + 1,
            got: shares.len(),
        });
    }
    let used = &shares[..degree + 1];
    for (i, s) in used.iter().enumerate() {
        if used[..i]
            .iter()
            .any(|o| o.evaluation_point == s.evaluation_point)
        {
            return Err(SharingError::BadEvaluationPoints);
        }
    }
    let points: Vec<FieldElement> = used.iter().map(|s| s.evaluation_point).collect();
    let weights = lagrange_weights_at_zero(&points);
    let mut acc = points[0].modulus().zero();
    for (share, weight) in used.iter().zip(&weights) {
        acc += share.value * *weight;
    }
    Ok(acc)
}

/// Lagrange coefficients for interpolating at zero from the given points.
pub fn lagrange_weights_at_zero(points: &[FieldElement]) -> Vec<FieldElement> {
    let modulus = points[0].modulus();
    points
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let mut num = modulus.one();
            let mut den = modulus.one();
            for (j, &xj) in points.iter().enumerate() {
                if i != j {
                    num *= xj;
                    den *= xj - xi;
                }
            }
            num * den.inverse().expect("distinct points")
        })
        .collect()
}

fn eval_poly(coeffs: &[FieldElement], x: FieldElement) -> FieldElement {
    let mut acc = *coeffs.last().expect("nonempty polynomial");
    for &c in coeffs.iter().rev().skip(1) {
        acc = acc * x + c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeModulus;
    use crate::stats;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const P13: PrimeModulus = PrimeModulus::MERSENNE_13;

    fn tag(s: &str) -> VoterTag {
        VoterTag::from(s)
    }

    fn elems(modulus: PrimeModulus, vals: &[u64]) -> Vec<FieldElement> {
        vals.iter().map(|&v| modulus.elem(v)).collect()
    }

    #[test]
    fn additive_round_trip_small() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let ballot = elems(P13, &[1, 0]);
        let shares = additive_share(&ballot, 3, &tag("v1"), &mut rng).unwrap();
        assert_eq!(shares.len(), 3);
        assert_eq!(additive_reconstruct(&shares, 3).unwrap(), ballot);
    }

    #[test]
    fn additive_zero_ballot_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let ballot = elems(P13, &[0, 0, 0]);
        let shares = additive_share(&ballot, 3, &tag("v1"), &mut rng).unwrap();
        // shares of a zero ballot still look like field noise
        assert!(shares[0].entries.iter().any(|e| !e.is_zero()));
        assert_eq!(additive_reconstruct(&shares, 3).unwrap(), ballot);
    }

    #[test]
    fn additive_rejects_bad_parameters() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let ballot = elems(P13, &[1]);
        assert_eq!(
            additive_share(&ballot, 1, &tag("v1"), &mut rng),
            Err(SharingError::TooFewTalliers(1))
        );
    }

    #[test]
    fn reconstruct_specific_wraparound() {
        // 5 + 8186 + 1 = 8192 = 1 mod 8191
        let mk = |idx, v| ShareVector {
            tallier_index: idx,
            entries: elems(P13, &[v]),
            voter_tag: tag("v1"),
        };
        let shares = vec![mk(1, 5), mk(2, 8186), mk(3, 1)];
        assert_eq!(additive_reconstruct(&shares, 3).unwrap()[0].value(), 1);
    }

    #[test]
    fn reconstruct_rejects_broken_share_sets() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let ballot = elems(P13, &[1, 0]);
        let shares = additive_share(&ballot, 3, &tag("v1"), &mut rng).unwrap();

        let mut dup = shares.clone();
        dup[1].tallier_index = 1;
        assert_eq!(
            additive_reconstruct(&dup, 3),
            Err(SharingError::DuplicateIndex(1))
        );

        let missing = &shares[..2];
        assert!(matches!(
            additive_reconstruct(missing, 3),
            Err(SharingError::MissingIndex(_))
        ));
    }

    #[test]
    fn first_share_entries_look_uniform() {
        // 10^4 sharings of a fixed ballot: the first share's first entry
        // should be indistinguishable from uniform (chi-square, alpha 0.001).
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let ballot = elems(P13, &[3, 0]);
        let mut counts = [0u64; stats::BUCKETS];
        for _ in 0..10_000 {
            let shares = additive_share(&ballot, 3, &tag("v1"), &mut rng).unwrap();
            counts[stats::bucket_of(shares[0].entries[0].value(), 8191)] += 1;
        }
        let stat = stats::chi_square_uniform_exact(&counts, 8191);
        assert!(stat < stats::CHI2_CRIT_DF15_ALPHA_001, "stat {stat}");
    }

    #[test]
    fn coalition_view_independent_of_secret() {
        // Distribution of what D-1 talliers jointly see (summarised by the
        // sum of their shares) must not depend on the secret.
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let mut counts = [[0u64; stats::BUCKETS]; 2];
        for (slot, secret) in [(0usize, 0u64), (1, 7)] {
            let ballot = elems(P13, &[secret]);
            for _ in 0..10_000 {
                let shares = additive_share(&ballot, 3, &tag("v1"), &mut rng).unwrap();
                let coalition = shares[0].entries[0] + shares[1].entries[0];
                counts[slot][stats::bucket_of(coalition.value(), 8191)] += 1;
            }
        }
        let stat = stats::chi_square_two_sample(&counts[0], &counts[1]);
        assert!(stat < stats::CHI2_CRIT_DF15_ALPHA_001, "stat {stat}");
    }

    #[test]
    fn shamir_degree_zero_is_constant() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let points = canonical_points(P13, 3);
        let shares = shamir_share(P13.elem(42), 0, &points, &mut rng).unwrap();
        assert!(shares.iter().all(|s| s.value.value() == 42));
    }

    #[test]
    fn shamir_any_pair_reconstructs() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let points = canonical_points(P13, 3);
        let shares = shamir_share(P13.elem(7), 1, &points, &mut rng).unwrap();
        for pair in [[0, 1], [1, 2], [0, 2]] {
            let subset = [shares[pair[0]], shares[pair[1]]];
            assert_eq!(shamir_reconstruct(&subset).unwrap().value(), 7);
        }
    }

    #[test]
    fn shamir_threshold_enforced() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let points = canonical_points(P13, 5);
        let shares = shamir_share(P13.elem(99), 2, &points, &mut rng).unwrap();
        assert_eq!(shamir_reconstruct(&shares[..3]).unwrap().value(), 99);
        assert_eq!(
            shamir_reconstruct(&shares[..2]),
            Err(SharingError::InsufficientShares { needed: 3, got: 2 })
        );
    }

    #[test]
    fn shamir_rejects_bad_points() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let dup = vec![P13.elem(1), P13.elem(1), P13.elem(2)];
        assert_eq!(
            shamir_share(P13.elem(5), 1, &dup, &mut rng),
            Err(SharingError::BadEvaluationPoints)
        );
        let zero = vec![P13.elem(0), P13.elem(1)];
        assert_eq!(
            shamir_share(P13.elem(5), 1, &zero, &mut rng),
            Err(SharingError::BadEvaluationPoints)
        );
        assert_eq!(
            shamir_share(P13.elem(5), 3, &canonical_points(P13, 3), &mut rng),
            Err(SharingError::ThresholdTooHigh { t: 3, d: 3 })
        );
    }

    #[test]
    fn shamir_linearity_against_plaintext_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let points = canonical_points(P13, 5);
        for _ in 0..1000 {
            let x = P13.sample_uniform(&mut rng);
            let y = P13.sample_uniform(&mut rng);
            let alpha = P13.sample_uniform(&mut rng);
            let beta = P13.sample_uniform(&mut rng);
            let sx = shamir_share(x, 2, &points, &mut rng).unwrap();
            let sy = shamir_share(y, 2, &points, &mut rng).unwrap();
            let combined: Vec<ShamirShare> = sx
                .iter()
                .zip(&sy)
                .map(|(a, b)| ShamirShare {
                    evaluation_point: a.evaluation_point,
                    value: alpha * a.value + beta * b.value,
                    degree: 2,
                })
                .collect();
            assert_eq!(shamir_reconstruct(&combined).unwrap(), alpha * x + beta * y);
        }
    }

    #[test]
    fn shamir_single_share_hides_secret() {
        // one share of secret 0 vs secret 1 over 10^4 trials
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let points = canonical_points(P13, 3);
        let mut counts = [[0u64; stats::BUCKETS]; 2];
        for (slot, secret) in [(0usize, 0u64), (1, 1)] {
            for _ in 0..10_000 {
                let shares = shamir_share(P13.elem(secret), 1, &points, &mut rng).unwrap();
                counts[slot][stats::bucket_of(shares[0].value.value(), 8191)] += 1;
            }
        }
        let stat = stats::chi_square_two_sample(&counts[0], &counts[1]);
        assert!(stat < stats::CHI2_CRIT_DF15_ALPHA_001, "stat {stat}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn additive_round_trip_random(
            entries in prop::collection::vec(0u64..8191, 1..12),
            d in 2usize..8,
        ) {
            let mut rng = ChaCha20Rng::seed_from_u64(13);
            let ballot = elems(P13, &entries);
            let shares = additive_share(&ballot, d, &tag("v"), &mut rng).unwrap();
            prop_assert_eq!(additive_reconstruct(&shares, d).unwrap(), ballot);
        }

        #[test]
        fn shamir_round_trip_random(secret in 0u64..8191, d in 2usize..8, seed in any::<u64>()) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let t = (d - 1) / 2;
            let points = canonical_points(P13, d);
            let shares = shamir_share(P13.elem(secret), t, &points, &mut rng).unwrap();
            prop_assert_eq!(shamir_reconstruct(&shares).unwrap().value(), secret);
        }
    }
}
