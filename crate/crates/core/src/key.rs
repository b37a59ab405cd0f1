//! Shared secret key and the keyed hashes derived from it.

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Result, StegoError};

pub const MIN_KEY_BYTES: usize = 16;

const MASK_OFFSET_DOMAIN: &[u8] = b"autostego/mask-offset";
const HUFFMAN_SWAP_DOMAIN: &[u8] = b"autostego/huffman-swap";

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey(Vec<u8>);

impl SecretKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self> {
        let bytes = bytes.into();
        if bytes.len() < MIN_KEY_BYTES {
            return Err(StegoError::KeyTooShort {
                min: MIN_KEY_BYTES,
                got: bytes.len(),
            });
        }
        Ok(SecretKey(bytes))
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// First 8 bytes (big-endian) of SHA-256(domain ‖ 0x00 ‖ key ‖ parts...).
    fn keyed_u64(&self, domain: &[u8], parts: &[u64]) -> u64 {
        let mut h = Sha256::new();
        h.update(domain);
        h.update([0u8]);
        h.update(&self.0);
        for p in parts {
            h.update(p.to_be_bytes());
        }
        let digest = h.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        u64::from_be_bytes(head)
    }

    /// Stable keyed hash that selects the masking offset.
    pub fn mask_hash(&self) -> u64 {
        self.keyed_u64(MASK_OFFSET_DOMAIN, &[])
    }

    /// Child-label swap bit for an internal Huffman node.
    pub fn huffman_swap_bit(&self, position: usize, node: usize) -> bool {
        self.keyed_u64(HUFFMAN_SWAP_DOMAIN, &[position as u64, node as u64]) & 1 == 1
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SecretKey({} bytes)", self.0.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_keys_rejected() {
        assert!(matches!(
            SecretKey::new(vec![0u8; 15]),
            Err(StegoError::KeyTooShort { min: 16, got: 15 })
        ));
        assert!(SecretKey::new(vec![0u8; 16]).is_ok());
    }

    #[test]
    fn derived_values_depend_only_on_bytes() {
        let a = SecretKey::new(b"0123456789abcdef".to_vec()).unwrap();
        let b = SecretKey::new(b"0123456789abcdef".to_vec()).unwrap();
        let c = SecretKey::new(b"0123456789abcdeg".to_vec()).unwrap();
        assert_eq!(a.mask_hash(), b.mask_hash());
        assert_ne!(a.mask_hash(), c.mask_hash());
        assert_eq!(a.huffman_swap_bit(3, 1), b.huffman_swap_bit(3, 1));
    }

    #[test]
    fn debug_hides_key_material() {
        let k = SecretKey::new(b"super secret key material".to_vec()).unwrap();
        assert_eq!(format!("{k:?}"), "SecretKey(25 bytes)");
    }
}
