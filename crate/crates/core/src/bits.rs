//! Bit strings and message framing.
//!
//! A framed message is a 32-bit big-endian length `L`, then the `L` message
//! bits. During embedding the final codeword may run past the end of the
//! frame; the missing bits are read as zeros and discarded on extraction.

use std::fmt;
use std::str::FromStr;

use base64::Engine;

use crate::error::{Result, StegoError};

pub const HEADER_BITS: usize = 32;

/// An ordered list of bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Bits(Vec<bool>);

impl Bits {
    pub fn new() -> Self {
        Bits(Vec::new())
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Bits(bits)
    }

    /// MSB-first within each octet.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Bits(
            bytes
                .iter()
                .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
                .collect(),
        )
    }

    /// `None` unless the length is a whole number of octets.
    pub fn to_bytes(&self) -> Option<Vec<u8>> {
        if !self.0.len().is_multiple_of(8) {
            return None;
        }
        Some(
            self.0
                .chunks(8)
                .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
                .collect(),
        )
    }

    /// `width` low bits of `value`, most significant first.
    pub fn from_uint(value: u64, width: usize) -> Self {
        Bits((0..width).rev().map(|i| (value >> i) & 1 == 1).collect())
    }

    pub fn to_uint(bits: &[bool]) -> u64 {
        bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        let bytes = hex::decode(text.trim()).map_err(|e| StegoError::Encoding(e.to_string()))?;
        Ok(Self::from_bytes(&bytes))
    }

    pub fn from_base64(text: &str) -> Result<Self> {
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(text.trim())
            .map_err(|e| StegoError::Encoding(e.to_string()))?;
        Ok(Self::from_bytes(&bytes))
    }

    pub fn to_hex(&self) -> Option<String> {
        self.to_bytes().map(hex::encode)
    }

    pub fn to_base64(&self) -> Option<String> {
        self.to_bytes()
            .map(|b| base64::engine::general_purpose::STANDARD.encode(b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn extend_from_slice(&mut self, bits: &[bool]) {
        self.0.extend_from_slice(bits);
    }

    pub fn into_inner(self) -> Vec<bool> {
        self.0
    }

    /// True if `self` is a prefix of `stream` extended with zeros.
    pub fn is_prefix_of_padded(&self, stream: &[bool]) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, &b)| stream.get(i).copied().unwrap_or(false) == b)
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = StegoError;

    /// Parses a string of `0`/`1` characters.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(StegoError::Encoding(format!("not a bit: {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

impl From<Vec<bool>> for Bits {
    fn from(v: Vec<bool>) -> Self {
        Bits(v)
    }
}

/// Prefixes `message` with its 32-bit big-endian length.
pub fn frame_message(message: &Bits) -> Result<Bits> {
    let len = u32::try_from(message.len())
        .map_err(|_| StegoError::MessageTooLong { bits: message.len() })?;
    let mut framed = Bits::from_uint(len as u64, HEADER_BITS);
    framed.extend_from_slice(message.as_slice());
    Ok(framed)
}

/// Inverse of [`frame_message`]; bits after the declared length are ignored.
pub fn unframe_message(bits: &[bool]) -> Result<Bits> {
    let declared = declared_length(bits).ok_or(StegoError::TruncatedStream {
        needed: HEADER_BITS,
        available: bits.len(),
    })?;
    let needed = HEADER_BITS + declared;
    if bits.len() < needed {
        return Err(StegoError::TruncatedStream {
            needed,
            available: bits.len(),
        });
    }
    Ok(Bits(bits[HEADER_BITS..needed].to_vec()))
}

/// Message length announced by the header, once the header is complete.
pub fn declared_length(bits: &[bool]) -> Option<usize> {
    (bits.len() >= HEADER_BITS).then(|| Bits::to_uint(&bits[..HEADER_BITS]) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_message_frames_to_zero_header() {
        let framed = frame_message(&Bits::new()).unwrap();
        assert_eq!(framed.len(), 32);
        assert!(framed.as_slice().iter().all(|&b| !b));
        assert_eq!(unframe_message(framed.as_slice()).unwrap(), Bits::new());
    }

    #[test]
    fn single_bit_message() {
        let framed = frame_message(&"1".parse().unwrap()).unwrap();
        assert_eq!(framed.to_string(), format!("{}1{}", "0".repeat(31), "1"));
    }

    #[test]
    fn padding_is_discarded() {
        let mut framed = frame_message(&"101".parse().unwrap()).unwrap();
        framed.extend_from_slice(&[false; 5]);
        assert_eq!(unframe_message(framed.as_slice()).unwrap().to_string(), "101");
    }

    #[test]
    fn short_header_is_truncated() {
        assert!(matches!(
            unframe_message(&[false; 31]),
            Err(StegoError::TruncatedStream { needed: 32, available: 31 })
        ));
    }

    #[test]
    fn missing_body_is_truncated() {
        let framed = frame_message(&"1011".parse().unwrap()).unwrap();
        assert!(matches!(
            unframe_message(&framed.as_slice()[..34]),
            Err(StegoError::TruncatedStream { needed: 36, available: 34 })
        ));
    }

    #[test]
    fn byte_codecs_are_msb_first() {
        let bits = Bits::from_bytes(&[0x80, 0x01]);
        assert_eq!(bits.to_string(), "1000000000000001");
        assert_eq!(Bits::from_hex("8001").unwrap(), bits);
        assert_eq!(bits.to_base64().unwrap(), "gAE=");
        assert_eq!(Bits::from_base64("gAE=").unwrap(), bits);
        assert!(Bits::from_str("101").unwrap().to_bytes().is_none());
    }

    #[test]
    fn zero_extension_prefix() {
        let code: Bits = "100".parse().unwrap();
        assert!(code.is_prefix_of_padded(&[true]));
        assert!(!code.is_prefix_of_padded(&[true, true]));
    }

    proptest! {
        #[test]
        fn frame_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..1200)) {
            let b = Bits::from_bools(bits);
            let framed = frame_message(&b).unwrap();
            prop_assert_eq!(framed.len(), b.len() + 32);
            prop_assert_eq!(unframe_message(framed.as_slice()).unwrap(), b);
        }

        #[test]
        fn byte_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let b = Bits::from_bytes(&bytes);
            prop_assert_eq!(b.to_bytes().unwrap(), bytes);
        }
    }
}
