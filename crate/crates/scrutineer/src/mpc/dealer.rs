//! Deterministic preprocessing streams.
//!
//! Every engine replays the same dealer stream from the session seed and
//! keeps only the evaluation at its own point, so all talliers hold
//! consistent correlated material without communicating. This stands in for
//! a preprocessing phase; it is simulation scaffolding, not a protocol
//! party, and a dealer-free generation can replace it behind this interface.

use crate::field::{FieldElement, PrimeModulus};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// One tallier's view of the dealer output.
pub struct DealerStream {
    rng: ChaCha20Rng,
    modulus: PrimeModulus,
    threshold: usize,
    my_point: FieldElement,
    pub triples_drawn: u64,
    pub bit_randoms_drawn: u64,
    pub masks_drawn: u64,
}

/// Bitwise-shared uniform value below `p`: shares of each bit, LSB first.
pub struct BitRandomShare {
    pub bit_shares: Vec<FieldElement>,
}

/// Masking material for one constant-round prefix product of length `n`:
/// shares of `t_l = s_(l-1) * s_l^(-1)` and `q_l = s_0^(-1) * s_l` for
/// `l = 1..=n`, where the `s_l` are fresh uniform nonzero values.
pub struct PrefixMaskShare {
    pub t_shares: Vec<FieldElement>,
    pub q_shares: Vec<FieldElement>,
}

impl DealerStream {
    pub fn new(seed: u64, modulus: PrimeModulus, threshold: usize, my_index: u16) -> Self {
        let digest = Sha256::new()
            .chain_update(b"dealer-stream")
            .chain_update(seed.to_be_bytes())
            .finalize();
        let mut rng_seed = [0u8; 32];
        rng_seed.copy_from_slice(&digest);
        DealerStream {
            rng: ChaCha20Rng::from_seed(rng_seed),
            modulus,
            threshold,
            my_point: modulus.elem(my_index as u64),
            triples_drawn: 0,
            bit_randoms_drawn: 0,
            masks_drawn: 0,
        }
    }

    /// My evaluation of a fresh degree-`t` polynomial with the given
    /// constant term. All engines draw identical coefficients; only the
    /// evaluation point differs.
    fn share_eval(&mut self, secret: FieldElement) -> FieldElement {
        let mut value = secret;
        let mut power = self.modulus.one();
        for _ in 0..self.threshold {
            let coeff = self.modulus.sample_uniform(&mut self.rng);
            power *= self.my_point;
            value += coeff * power;
        }
        value
    }

    /// My shares of a Beaver triple `(a, b, ab)`.
    pub fn triple(&mut self) -> (FieldElement, FieldElement, FieldElement) {
        self.triples_drawn += 1;
        let a = self.modulus.sample_uniform(&mut self.rng);
        let b = self.modulus.sample_uniform(&mut self.rng);
        let c = a * b;
        (self.share_eval(a), self.share_eval(b), self.share_eval(c))
    }

    /// Bitwise-shared uniform value in `[0, p)`; rejection keeps the
    /// bit pattern below the modulus.
    pub fn bit_random(&mut self) -> BitRandomShare {
        self.bit_randoms_drawn += 1;
        let k = self.modulus.bits();
        loop {
            let mut value = 0u64;
            let mut bits = Vec::with_capacity(k as usize);
            for j in 0..k {
                let bit = (self.rng.next_u32() & 1) as u64;
                value |= bit << j;
                bits.push(bit);
            }
            if value >= self.modulus.value() {
                continue;
            }
            let bit_shares = bits
                .into_iter()
                .map(|b| self.share_eval(self.modulus.elem(b)))
                .collect();
            return BitRandomShare { bit_shares };
        }
    }

    /// Prefix-product masks for a chain of length `n >= 1`.
    pub fn prefix_mask(&mut self, n: usize) -> PrefixMaskShare {
        self.masks_drawn += 1;
        let s: Vec<FieldElement> = (0..=n)
            .map(|_| self.modulus.sample_nonzero(&mut self.rng))
            .collect();
        let s0_inv = s[0].inverse().expect("nonzero");
        let mut t_shares = Vec::with_capacity(n);
        let mut q_shares = Vec::with_capacity(n);
        for l in 1..=n {
            let t = s[l - 1] * s[l].inverse().expect("nonzero");
            let q = s0_inv * s[l];
            t_shares.push(self.share_eval(t));
            q_shares.push(self.share_eval(q));
        }
        PrefixMaskShare { t_shares, q_shares }
    }
}
