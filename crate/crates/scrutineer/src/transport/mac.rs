//! HMAC-SHA256 message authentication with pairwise symmetric keys.
//!
//! Keys are derived from a session secret provisioned out-of-band (in this
//! artifact: from the election seed). Swapping in certified public keys and
//! signatures changes only this module.

use sha2::{Digest, Sha256};

const BLOCK_LEN: usize = 64;

/// A 32-byte symmetric MAC key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacKey([u8; 32]);

impl MacKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        MacKey(bytes)
    }

    /// HMAC-SHA256 over the message.
    pub fn mac(&self, message: &[u8]) -> [u8; 32] {
        let mut ipad = [0x36u8; BLOCK_LEN];
        let mut opad = [0x5cu8; BLOCK_LEN];
        for (i, b) in self.0.iter().enumerate() {
            ipad[i] ^= b;
            opad[i] ^= b;
        }
        let inner = Sha256::new()
            .chain_update(ipad)
            .chain_update(message)
            .finalize();
        Sha256::new()
            .chain_update(opad)
            .chain_update(inner)
            .finalize()
            .into()
    }

    /// Constant-shape verification of a 32-byte tag.
    pub fn verify(&self, message: &[u8], tag: &[u8]) -> bool {
        if tag.len() != 32 {
            return false;
        }
        let expected = self.mac(message);
        let mut diff = 0u8;
        for (a, b) in expected.iter().zip(tag) {
            diff |= a ^ b;
        }
        diff == 0
    }
}

fn derive(session_secret: &[u8; 32], label: &[u8], context: &[u8]) -> MacKey {
    let digest = Sha256::new()
        .chain_update(session_secret)
        .chain_update([label.len() as u8])
        .chain_update(label)
        .chain_update(context)
        .finalize();
    MacKey(digest.into())
}

/// Key protecting tallier-to-tallier frames; symmetric in the pair.
pub fn derive_pair_key(session_secret: &[u8; 32], a: u16, b: u16) -> MacKey {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut ctx = [0u8; 4];
    ctx[..2].copy_from_slice(&lo.to_be_bytes());
    ctx[2..].copy_from_slice(&hi.to_be_bytes());
    derive(session_secret, b"tallier-pair", &ctx)
}

/// Key protecting one voter's frames to one tallier.
pub fn derive_voter_key(session_secret: &[u8; 32], voter_tag: &str, tallier: u16) -> MacKey {
    let mut ctx = Vec::with_capacity(voter_tag.len() + 2);
    ctx.extend_from_slice(voter_tag.as_bytes());
    ctx.extend_from_slice(&tallier.to_be_bytes());
    derive(session_secret, b"voter", &ctx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hmac_sha256_known_vector() {
        // RFC 4231 test case 2: key "Jefe", data "what do ya want for nothing?"
        let mut key = [0u8; 32];
        key[..4].copy_from_slice(b"Jefe");
        let mac = MacKey::from_bytes(key).mac(b"what do ya want for nothing?");
        let expected = "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843";
        let rendered: String = mac.iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(rendered, expected);
    }

    #[test]
    fn verify_rejects_wrong_tag() {
        let key = MacKey::from_bytes([1u8; 32]);
        let mut tag = key.mac(b"hello");
        assert!(key.verify(b"hello", &tag));
        tag[0] ^= 1;
        assert!(!key.verify(b"hello", &tag));
        assert!(!key.verify(b"hello", &tag[..31]));
    }

    #[test]
    fn derived_keys_separate_pairs_and_voters() {
        let secret = [3u8; 32];
        assert_eq!(
            derive_pair_key(&secret, 1, 2),
            derive_pair_key(&secret, 2, 1)
        );
        assert_ne!(
            derive_pair_key(&secret, 1, 2),
            derive_pair_key(&secret, 1, 3)
        );
        assert_ne!(
            derive_voter_key(&secret, "v1", 1),
            derive_voter_key(&secret, "v1", 2)
        );
        assert_ne!(
            derive_voter_key(&secret, "v1", 1),
            derive_voter_key(&secret, "v2", 1)
        );
    }
}
