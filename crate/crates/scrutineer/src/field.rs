//! Exact modular arithmetic over a configured prime field `Z_p`.
//!
//! The toolkit runs every share, score and circuit value through this module.
//! Moduli are runtime values (elections pick their own prime), so elements
//! carry their modulus and mixing moduli is a hard error. Multiplication has
//! a dedicated shift-and-add reduction for Mersenne primes `2^k - 1`, which
//! are the moduli used in practice.
//!
//! Arithmetic avoids value-dependent branching where practical (reductions
//! are conditional subtractions, inversion is fixed-exponent), but none of
//! it is certified constant-time; the threat model is semi-honest parties,
//! not timing adversaries.

use rand::Rng;
use thiserror::Error;

/// Errors raised by field construction and arithmetic.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus must be an odd prime at least 3, got {0}")]
    ModulusTooSmall(u64),
    #[error("cannot invert zero")]
    InversionOfZero,
}

/// A prime modulus `p < 2^63`, with its bit length and a flag for the
/// Mersenne fast path.
///
/// Construction runs a deterministic Miller-Rabin test, so a `PrimeModulus`
/// value is always a genuine prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeModulus {
    p: u64,
    bits: u32,
    is_mersenne: bool,
}

impl PrimeModulus {
    /// The Mersenne prime `2^13 - 1 = 8191`, for small elections.
    pub const MERSENNE_13: PrimeModulus = PrimeModulus {
        p: (1 << 13) - 1,
        bits: 13,
        is_mersenne: true,
    };

    /// The Mersenne prime `2^31 - 1`, large enough for any realistic election.
    pub const MERSENNE_31: PrimeModulus = PrimeModulus {
        p: (1 << 31) - 1,
        bits: 31,
        is_mersenne: true,
    };

    /// Validates primality and builds the modulus descriptor.
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if p < 3 || p.is_multiple_of(2) {
            return Err(FieldError::ModulusTooSmall(p));
        }
        if p >= 1 << 63 {
            // keeps add/sub in u64 without overflow checks on every call
            return Err(FieldError::NotPrime(p));
        }
        if !is_prime_u64(p) {
            return Err(FieldError::NotPrime(p));
        }
        let bits = 64 - p.leading_zeros();
        Ok(PrimeModulus {
            p,
            bits,
            is_mersenne: (p + 1).is_power_of_two(),
        })
    }

    pub fn value(&self) -> u64 {
        self.p
    }

    /// `ceil(log2 p)`: the number of bits needed to hold a field element.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn is_mersenne(&self) -> bool {
        self.is_mersenne
    }

    /// Bytes used per element in the wire encoding.
    pub fn byte_len(&self) -> usize {
        self.bits.div_ceil(8) as usize
    }

    /// The canonical element for `value mod p`.
    pub fn elem(&self, value: u64) -> FieldElement {
        FieldElement {
            value: value % self.p,
            modulus: *self,
        }
    }

    pub fn zero(&self) -> FieldElement {
        self.elem(0)
    }

    pub fn one(&self) -> FieldElement {
        self.elem(1)
    }

    /// Draws a uniform element via rejection sampling.
    ///
    /// Masking a 64-bit draw down to `bits` and rejecting values `>= p`
    /// keeps the distribution exactly uniform; reducing a wider draw mod p
    /// would bias low residues, which additive-share secrecy cannot afford.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        let mask = if self.bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        };
        loop {
            let candidate = rng.random::<u64>() & mask;
            if candidate < self.p {
                return self.elem(candidate);
            }
        }
    }

    /// Uniform over `Z_p \ {0}`.
    pub fn sample_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> FieldElement {
        loop {
            let candidate = self.sample_uniform(rng);
            if candidate.value != 0 {
                return candidate;
            }
        }
    }

    #[inline]
    fn reduce_wide(&self, x: u128) -> u64 {
        if self.is_mersenne {
            // x mod (2^k - 1): fold the high limbs onto the low k bits.
            // Each fold shrinks x below 2^(2k); two folds plus a conditional
            // subtract reach the canonical range without any division.
            let k = self.bits;
            let p = self.p as u128;
            let mut v = (x & p) + (x >> k);
            v = (v & p) + (v >> k);
            if v >= p {
                v -= p;
            }
            v as u64
        } else {
            (x % self.p as u128) as u64
        }
    }

    /// Reference reduction used to cross-check the Mersenne fast path.
    #[inline]
    pub fn reduce_wide_generic(&self, x: u128) -> u64 {
        (x % self.p as u128) as u64
    }
}

impl std::fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// An element of `Z_p` in canonical form (`0 <= value < p`).
///
/// Elements are plain `Copy` values; arithmetic between elements of
/// different moduli panics, since it is always a logic error upstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u64,
    modulus: PrimeModulus,
}

impl FieldElement {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn modulus(&self) -> PrimeModulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    /// Multiplicative inverse by Fermat exponentiation (`a^(p-2)`).
    pub fn inverse(&self) -> Result<FieldElement, FieldError> {
        if self.value == 0 {
            return Err(FieldError::InversionOfZero);
        }
        Ok(self.pow(self.modulus.p - 2))
    }

    /// `self^exp` by square-and-multiply.
    pub fn pow(&self, mut exp: u64) -> FieldElement {
        let mut base = *self;
        let mut acc = self.modulus.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            exp >>= 1;
        }
        acc
    }

    /// Square root for primes `p = 3 mod 4` (both supported Mersenne primes
    /// qualify). Returns the smaller of the two roots so every party picks
    /// the same one. `None` if the element is not a quadratic residue.
    pub fn sqrt(&self) -> Option<FieldElement> {
        let p = self.modulus.p;
        debug_assert_eq!(p % 4, 3);
        if self.value == 0 {
            return Some(*self);
        }
        let candidate = self.pow((p + 1) / 4);
        if candidate * candidate != *self {
            return None;
        }
        let other = -candidate;
        Some(if candidate.value <= other.value {
            candidate
        } else {
            other
        })
    }

    #[inline]
    fn check_same_modulus(&self, other: &FieldElement) {
        assert_eq!(
            self.modulus, other.modulus,
            "field arithmetic across different moduli is rejected"
        );
    }
}

impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn add(self, rhs: FieldElement) -> FieldElement {
        self.check_same_modulus(&rhs);
        let mut v = self.value + rhs.value;
        if v >= self.modulus.p {
            v -= self.modulus.p;
        }
        FieldElement {
            value: v,
            modulus: self.modulus,
        }
    }
}

impl std::ops::Sub for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn sub(self, rhs: FieldElement) -> FieldElement {
        self.check_same_modulus(&rhs);
        let v = if self.value >= rhs.value {
            self.value - rhs.value
        } else {
            self.value + self.modulus.p - rhs.value
        };
        FieldElement {
            value: v,
            modulus: self.modulus,
        }
    }
}

impl std::ops::Mul for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn mul(self, rhs: FieldElement) -> FieldElement {
        self.check_same_modulus(&rhs);
        let wide = self.value as u128 * rhs.value as u128;
        FieldElement {
            value: self.modulus.reduce_wide(wide),
            modulus: self.modulus,
        }
    }
}

impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    #[inline]
    fn neg(self) -> FieldElement {
        let v = if self.value == 0 {
            0
        } else {
            self.modulus.p - self.value
        };
        FieldElement {
            value: v,
            modulus: self.modulus,
        }
    }
}

impl std::ops::AddAssign for FieldElement {
    fn add_assign(&mut self, rhs: FieldElement) {
        *self = *self + rhs;
    }
}

impl std::ops::SubAssign for FieldElement {
    fn sub_assign(&mut self, rhs: FieldElement) {
        *self = *self - rhs;
    }
}

impl std::ops::MulAssign for FieldElement {
    fn mul_assign(&mut self, rhs: FieldElement) {
        *self = *self * rhs;
    }
}

impl std::fmt::Display for FieldElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Deterministic Miller-Rabin for `u64`.
///
/// The witness set {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37} is exact for
/// every integer below 3.3 * 10^24, which covers the full u64 range.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == small {
            return true;
        }
        if n.is_multiple_of(small) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}
