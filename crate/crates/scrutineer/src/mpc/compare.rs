//! Constant-round secure comparison.
//!
//! `less_than(x, y)` returns shares of the bit `[x < y]` for values whose
//! integer difference stays below `p/2`. The reduction: the bit equals the
//! least significant bit of `2(x - y) mod p`, and that LSB is extracted with
//! one bitwise-shared random mask. Every interactive step is a single
//! unbounded fan-in layer, so a comparison takes exactly four rounds,
//! whatever the field size or the number of talliers:
//!
//!   1. reveal the masked input `a + r`
//!   2. one multiplication layer for the masked prefix products
//!   3. reveal the prefix-product masks
//!   4. one multiplication for the final bit reassembly
//!
//! Gate count per comparison is `k (k + 1) / 2` for a `k`-bit modulus,
//! dominated by the constant-round power computations that evaluate the
//! "any difference so far" prefix indicators.

use super::dealer::PrefixMaskShare;
use super::engine::{Shared, TallierEngine};
use super::{MaskKind, MpcError};
use crate::field::PrimeModulus;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Interactive rounds one comparison always takes.
pub const COMPARISON_ROUNDS: u64 = 4;

/// Multiplication gates one comparison consumes for a `k`-bit modulus.
pub fn comparison_gates(bits: u32) -> u64 {
    let k = bits as u64;
    k * (k + 1) / 2
}

/// Published cost model for the constant-depth comparison construction this
/// engine's reports are benchmarked against: `279 * ceil(log2 p) + 5` gates.
/// This engine uses a different constant-round construction, so reports
/// carry both numbers and flag the delta instead of asserting equality.
pub fn reference_comparison_gates(bits: u32) -> u64 {
    279 * bits as u64 + 5
}

impl TallierEngine {
    /// Shares of `[x < y]`, comparing the integer representatives. Callers
    /// must keep both plaintexts in `[0, B]` with `B < p/2`; the election
    /// config enforces that bound.
    pub fn less_than(&mut self, x: &Shared, y: &Shared) -> Result<Shared, MpcError> {
        Ok(self.less_than_batch(&[(*x, *y)])?[0])
    }

    /// Batched comparisons; the whole batch shares the four rounds.
    pub fn less_than_batch(&mut self, pairs: &[(Shared, Shared)]) -> Result<Vec<Shared>, MpcError> {
        if pairs.is_empty() {
            return Ok(Vec::new());
        }
        let two = self.modulus().elem(2);
        let diffs: Vec<Shared> = pairs
            .iter()
            .map(|(x, y)| {
                let diff = self.sub(x, y)?;
                self.scale_public(&diff, two)
            })
            .collect::<Result<_, _>>()?;
        self.lsb_batch(&diffs)
    }

    /// Shares of the least significant bit of each shared value.
    pub fn lsb_batch(&mut self, values: &[Shared]) -> Result<Vec<Shared>, MpcError> {
        if values.is_empty() {
            return Ok(Vec::new());
        }
        let modulus = self.modulus();
        let k = modulus.bits() as usize;
        let two = modulus.elem(2);
        let one = modulus.one();
        let tables = or_tables(modulus);

        // Bitwise-shared uniform masks, one per value; the combined share is
        // the local weighted sum of the bit shares.
        let bit_shares: Vec<Vec<Shared>> = values
            .iter()
            .map(|_| {
                self.dealer_mut()
                    .bit_random()
                    .bit_shares
                    .iter()
                    .map(|&s| self.wrap(s))
                    .collect()
            })
            .collect();
        let masked: Vec<Shared> = values
            .iter()
            .zip(&bit_shares)
            .map(|(v, bits)| {
                let mut combined = self.constant(0);
                let mut pow2 = one;
                for bit in bits {
                    let term = self.scale_public(bit, pow2)?;
                    combined = self.add(&combined, &term)?;
                    pow2 *= two;
                }
                self.add(v, &combined)
            })
            .collect::<Result<_, _>>()?;
        // round 1: c = a + r is uniform, independent of a
        let c_values = self.reveal_masked_batch(&masked, MaskKind::MaskedValue)?;

        // Difference bits d_j = c_j XOR r_j (local: c_j is public), then
        // prefix counts from the most significant bit down, shifted so the
        // indicator-polynomial argument A_j = 1 + sum_{i >= j} d_i is
        // never zero.
        let mut per_value_a: Vec<Vec<Shared>> = Vec::with_capacity(values.len());
        for (bits, c) in bit_shares.iter().zip(&c_values) {
            let c = c.value();
            let mut a = vec![self.constant(0); k];
            let mut acc = self.constant(1);
            for j in (0..k).rev() {
                let d_j = if (c >> j) & 1 == 0 {
                    bits[j]
                } else {
                    let negated = self.neg(&bits[j])?;
                    self.add_public(&negated, one)?
                };
                acc = self.add(&acc, &d_j)?;
                a[j] = acc;
            }
            per_value_a.push(a);
        }

        // Powers of each A_j via masked prefix products: one multiplication
        // layer (round 2) and one mask reveal (round 3) for the whole batch.
        let mut mask_sets: Vec<Vec<PrefixMaskShare>> = Vec::with_capacity(values.len());
        let mut mul_inputs: Vec<(Shared, Shared)> = Vec::new();
        for a in &per_value_a {
            let mut sets = Vec::with_capacity(k.saturating_sub(1));
            for (j, a_j) in a.iter().enumerate().take(k.saturating_sub(1)) {
                let chain = k - j;
                let mask = self.dealer_mut().prefix_mask(chain);
                for l in 0..chain {
                    mul_inputs.push((self.wrap(mask.t_shares[l]), *a_j));
                }
                sets.push(mask);
            }
            mask_sets.push(sets);
        }
        let masked_products = self.mul_batch(&mul_inputs)?;
        let m_publics = self.reveal_masked_batch(&masked_products, MaskKind::PrefixMask)?;

        // Reassembly, all local: powers A_j^e = (m_1 ... m_e) * q_e, prefix
        // indicators f_j from the interpolated polynomials, and w = the bit
        // of r at the most significant differing position.
        let mut xor_pairs: Vec<(Shared, Shared)> = Vec::with_capacity(values.len());
        let mut post: Vec<(u64,)> = Vec::with_capacity(values.len());
        let mut cursor = 0usize;
        for (idx, a) in per_value_a.iter().enumerate() {
            let c = c_values[idx].value();
            let mut f = vec![self.constant(0); k + 1];
            for (j, a_j) in a.iter().enumerate() {
                let chain = k - j;
                let coeffs = &tables[chain];
                let mut acc = self.scale_public(a_j, modulus.elem(coeffs[1]))?;
                acc = self.add_public(&acc, modulus.elem(coeffs[0]))?;
                if chain >= 2 {
                    let mask = &mask_sets[idx][j];
                    let mut m_running = m_publics[cursor];
                    for e in 2..=chain {
                        m_running *= m_publics[cursor + e - 1];
                        // coeff_e * A^e = (coeff_e * M_e) * [q_e]
                        let q = self.wrap(mask.q_shares[e - 1]);
                        let term = self.scale_public(&q, modulus.elem(coeffs[e]) * m_running)?;
                        acc = self.add(&acc, &term)?;
                    }
                    cursor += chain;
                }
                f[j] = acc;
            }
            // w = sum over zero bits of c of (f_j - f_{j+1})
            let mut w = self.constant(0);
            for j in 0..k {
                if (c >> j) & 1 == 0 {
                    let g = self.sub(&f[j], &f[j + 1])?;
                    w = self.add(&w, &g)?;
                }
            }
            xor_pairs.push((bit_shares[idx][0], w));
            post.push((c & 1,));
        }

        // round 4: lsb = c_0 XOR r_0 XOR w; the shared XOR costs one gate
        let products = self.mul_batch(&xor_pairs)?;
        xor_pairs
            .iter()
            .zip(products)
            .zip(post)
            .map(|(((r0, w), prod), (c0,))| {
                // r0 XOR w = r0 + w - 2 r0 w
                let sum = self.add(r0, w)?;
                let twice = self.scale_public(&prod, two)?;
                let u = self.sub(&sum, &twice)?;
                if c0 == 1 {
                    let negated = self.neg(&u)?;
                    self.add_public(&negated, one)
                } else {
                    Ok(u)
                }
            })
            .collect()
    }
}

/// Monomial coefficients (canonical u64 values) of the degree-`n`
/// polynomials g_n with g_n(1) = 0 and g_n(a) = 1 for a in 2..=n+1,
/// indexed by `n`; entry 0 is unused. Cached per modulus.
fn or_tables(modulus: PrimeModulus) -> Arc<Vec<Vec<u64>>> {
    type TableCache = Mutex<HashMap<u64, Arc<Vec<Vec<u64>>>>>;
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("table cache poisoned");
    guard
        .entry(modulus.value())
        .or_insert_with(|| Arc::new(build_or_tables(modulus)))
        .clone()
}

fn build_or_tables(modulus: PrimeModulus) -> Vec<Vec<u64>> {
    let k = modulus.bits() as usize;
    let mut tables = vec![Vec::new()];
    for n in 1..=k {
        tables.push(at_least_one_poly(modulus, n));
    }
    tables
}

/// Degree-`n` polynomial through (1, 0) and (a, 1) for a in 2..=n+1, as
/// monomial coefficients low-to-high.
fn at_least_one_poly(modulus: PrimeModulus, n: usize) -> Vec<u64> {
    let mut coeffs = vec![modulus.zero(); n + 1];
    for a in 2..=(n + 1) as u64 {
        // Lagrange basis for node `a` over nodes 1..=n+1
        let mut basis = vec![modulus.zero(); n + 1];
        basis[0] = modulus.one();
        let mut degree = 0usize;
        let mut denom = modulus.one();
        for b in 1..=(n + 1) as u64 {
            if b == a {
                continue;
            }
            let root = modulus.elem(b);
            // multiply the basis polynomial by (x - b)
            degree += 1;
            basis[degree] = basis[degree - 1];
            for i in (1..degree).rev() {
                basis[i] = basis[i - 1] - root * basis[i];
            }
            basis[0] = -(root * basis[0]);
            denom *= modulus.elem(a) - root;
        }
        let scale = denom.inverse().expect("distinct nodes");
        for (c, b) in coeffs.iter_mut().zip(&basis) {
            *c += *b * scale;
        }
    }
    coeffs.into_iter().map(|c| c.value()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P13: PrimeModulus = PrimeModulus::MERSENNE_13;

    #[test]
    fn indicator_polynomials_hit_their_nodes() {
        for n in 1..=P13.bits() as usize {
            let coeffs = at_least_one_poly(P13, n);
            assert_eq!(coeffs.len(), n + 1);
            for a in 1..=(n + 1) as u64 {
                let x = P13.elem(a);
                let mut value = P13.zero();
                let mut power = P13.one();
                for &c in &coeffs {
                    value += P13.elem(c) * power;
                    power *= x;
                }
                let expected = if a == 1 { 0 } else { 1 };
                assert_eq!(value.value(), expected, "n={n}, a={a}");
            }
        }
    }

    #[test]
    fn gate_model_matches_formula() {
        assert_eq!(comparison_gates(13), 91);
        assert_eq!(comparison_gates(31), 496);
    }
}
