//! Chi-square statistics for the secrecy and uniformity checks.
//!
//! Every check in this crate buckets observations into 16 cells, so the only
//! critical value needed is the 15-degrees-of-freedom quantile.

/// Upper 0.001 quantile of the chi-square distribution with 15 degrees of
/// freedom (16 buckets). A statistic above this rejects at alpha = 0.001.
pub const CHI2_CRIT_DF15_ALPHA_001: f64 = 37.6973;

/// Number of buckets all helpers in this module assume.
pub const BUCKETS: usize = 16;

/// Maps a value in `[0, p)` to one of 16 near-equal-width buckets.
pub fn bucket_of(value: u64, p: u64) -> usize {
    debug_assert!(value < p);
    (value as u128 * BUCKETS as u128 / p as u128) as usize
}

/// Goodness-of-fit statistic against the exact uniform distribution on
/// `[0, p)`. Bucket widths differ by at most one when `p` is not a multiple
/// of 16, so expected counts use the true bucket probabilities.
pub fn chi_square_uniform_exact(counts: &[u64; BUCKETS], p: u64) -> f64 {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    for (i, &observed) in counts.iter().enumerate() {
        let lo = (i as u128 * p as u128).div_ceil(BUCKETS as u128);
        let hi = ((i as u128 + 1) * p as u128).div_ceil(BUCKETS as u128);
        let expected = n as f64 * (hi - lo) as f64 / p as f64;
        let diff = observed as f64 - expected;
        stat += diff * diff / expected;
    }
    stat
}

/// Two-sample homogeneity statistic: do two sets of bucket counts come from
/// the same distribution? 16 buckets, 2 rows, 15 degrees of freedom.
pub fn chi_square_two_sample(a: &[u64; BUCKETS], b: &[u64; BUCKETS]) -> f64 {
    let row_a: u64 = a.iter().sum();
    let row_b: u64 = b.iter().sum();
    let total = (row_a + row_b) as f64;
    let mut stat = 0.0;
    for i in 0..BUCKETS {
        let col = (a[i] + b[i]) as f64;
        if col == 0.0 {
            continue;
        }
        for (row_sum, observed) in [(row_a, a[i]), (row_b, b[i])] {
            let expected = row_sum as f64 * col / total;
            let diff = observed as f64 - expected;
            stat += diff * diff / expected;
        }
    }
    stat
}
