//! Deterministic reference LM used for offline runs and tests.
//!
//! The distribution is a pure function of (seed, full temporary text,
//! position, vocabulary order):
//!
//! ```text
//! h     = fnv1a64(seed_le8 ‖ tok_0 ‖ 0x1F ‖ tok_1 ‖ ... ‖ tok_{n-1} ‖ 0x1E ‖ decimal(position))
//! u_i   = (splitmix64(h + i) >> 11) as f64 + 0.5) / 2^53        in (0, 1)
//! raw_i = u_i^8
//! p_i   = raw_i / Σ_j raw_j
//! ```
//!
//! Masked slots contribute the bytes of `[MASK]`; positions are 0-based.

use std::collections::HashSet;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{LmError, MaskedLm, PredictionDistribution};
use crate::text::{is_maskable, Token, TokenSequence};

const FNV_OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

const TOKEN_SEPARATOR: u8 = 0x1f;
const POSITION_SEPARATOR: u8 = 0x1e;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET_BASIS, |h, &b| {
        (h ^ b as u64).wrapping_mul(FNV_PRIME)
    })
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Maps 64 random bits onto the open interval (0, 1).
fn unit_open(x: u64) -> f64 {
    ((x >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

#[derive(Debug, Clone)]
pub struct ReferenceLm {
    vocab: Vec<Token>,
    seed: u64,
}

impl ReferenceLm {
    /// Vocabulary order is significant: index `i` feeds the hash.
    pub fn new(vocab: Vec<Token>, seed: u64) -> Result<Self, LmError> {
        if vocab.is_empty() {
            return Err(LmError::Vocab("empty vocabulary".into()));
        }
        let mut seen = HashSet::new();
        for t in &vocab {
            if !is_maskable(t) {
                return Err(LmError::Vocab(format!("{t:?} is not maskable")));
            }
            if !seen.insert(t.as_str()) {
                return Err(LmError::Vocab(format!("duplicate token {t:?}")));
            }
        }
        Ok(ReferenceLm { vocab, seed })
    }

    pub fn from_words<S: AsRef<str>>(words: &[S], seed: u64) -> Result<Self, LmError> {
        let vocab = words
            .iter()
            .map(|w| Token::new(w.as_ref()).ok_or_else(|| LmError::Vocab("empty token".into())))
            .collect::<Result<_, _>>()?;
        Self::new(vocab, seed)
    }

    /// One token per line; blank lines are skipped.
    pub fn from_vocab_file(path: &Path, seed: u64) -> Result<Self, LmError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LmError::Vocab(format!("{}: {e}", path.display())))?;
        let words: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        Self::from_words(&words, seed)
    }

    pub fn vocab(&self) -> &[Token] {
        &self.vocab
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn context_hash(&self, temporary: &TokenSequence, position: usize) -> u64 {
        let mut buf = Vec::with_capacity(8 + temporary.len() * 8);
        buf.extend_from_slice(&self.seed.to_le_bytes());
        for (k, slot) in temporary.iter().enumerate() {
            if k > 0 {
                buf.push(TOKEN_SEPARATOR);
            }
            buf.extend_from_slice(slot.surface().as_bytes());
        }
        buf.push(POSITION_SEPARATOR);
        buf.extend_from_slice(position.to_string().as_bytes());
        fnv1a64(&buf)
    }

    /// Probabilities over the full vocabulary, in vocabulary order.
    pub fn full_distribution(
        &self,
        temporary: &TokenSequence,
        position: usize,
    ) -> Result<Vec<f64>, LmError> {
        match temporary.get(position) {
            Some(slot) if slot.is_mask() => {}
            _ => return Err(LmError::NotMasked { position }),
        }
        let h = self.context_hash(temporary, position);
        let raw: Vec<f64> = (0..self.vocab.len() as u64)
            .map(|i| {
                let u = unit_open(splitmix64(h.wrapping_add(i)));
                let u2 = u * u;
                let u4 = u2 * u2;
                u4 * u4
            })
            .collect();
        let total: f64 = raw.iter().sum();
        Ok(raw.into_iter().map(|r| r / total).collect())
    }
}

impl MaskedLm for ReferenceLm {
    fn tokenize(&self, text: &str) -> Result<TokenSequence, LmError> {
        Ok(TokenSequence::split_whitespace(text))
    }

    fn predict(
        &self,
        temporary: &TokenSequence,
        position: usize,
        min_prob: f64,
    ) -> Result<PredictionDistribution, LmError> {
        let probs = self.full_distribution(temporary, position)?;
        let total_mass = probs.iter().sum();
        let entries = self
            .vocab
            .iter()
            .zip(probs)
            .filter(|(_, p)| *p >= min_prob)
            .map(|(t, p)| (t.clone(), p))
            .collect();
        PredictionDistribution::new(entries, total_mass)
    }

    fn model_digest(&self) -> Result<String, LmError> {
        let mut h = Sha256::new();
        h.update(b"autostego/reference-lm/v1");
        h.update(self.seed.to_le_bytes());
        for t in &self.vocab {
            h.update([TOKEN_SEPARATOR]);
            h.update(t.as_str().as_bytes());
        }
        Ok(hex::encode(h.finalize()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::apply_masks;

    #[test]
    fn fnv_and_splitmix_known_values() {
        // Published FNV-1a 64 test vectors.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a64(b"foobar"), 0x85944171f73967e8);
        // First outputs of the reference SplitMix64 generator seeded with 0.
        assert_eq!(splitmix64(0), 0xe220a8397b1dcdaf);
        assert_eq!(splitmix64(0x9e3779b97f4a7c15), 0x6e789e6aa1b965f4);
    }

    #[test]
    fn single_token_vocab_is_certain() {
        let lm = ReferenceLm::from_words(&["city"], 9).unwrap();
        let text = apply_masks(&TokenSequence::split_whitespace("a big city ."), &[2]).unwrap();
        let d = lm.predict(&text, 2, 0.0).unwrap();
        assert_eq!(d.entries().len(), 1);
        assert_eq!(d.entries()[0].1, 1.0);
    }

    #[test]
    fn unmasked_position_is_a_contract_error() {
        let lm = ReferenceLm::from_words(&["city", "town"], 1).unwrap();
        let text = TokenSequence::split_whitespace("a big city .");
        assert!(matches!(lm.predict(&text, 2, 0.0), Err(LmError::NotMasked { position: 2 })));
        assert!(matches!(lm.predict(&text, 10, 0.0), Err(LmError::NotMasked { position: 10 })));
    }

    #[test]
    fn repeated_calls_are_identical() {
        let lm = ReferenceLm::from_words(&["city", "town", "village", "place"], 42).unwrap();
        let text = apply_masks(&TokenSequence::split_whitespace("a nice little city ."), &[1, 3]).unwrap();
        assert_eq!(lm.predict(&text, 1, 0.0).unwrap(), lm.predict(&text, 1, 0.0).unwrap());
        let full: f64 = lm.full_distribution(&text, 1).unwrap().iter().sum();
        assert!((full - 1.0).abs() < 1e-9);
    }

    #[test]
    fn truncation_respects_min_prob() {
        let words: Vec<String> = (0..40).map(|i| format!("w{i}x")).collect();
        let lm = ReferenceLm::from_words(&words, 3).unwrap();
        let text = apply_masks(&TokenSequence::split_whitespace("one two three"), &[1]).unwrap();
        let d = lm.predict(&text, 1, 0.03).unwrap();
        assert!(d.entries().iter().all(|(_, p)| *p >= 0.03));
        assert!(d.len() < 40);
        assert!((d.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vocab_validation() {
        assert!(ReferenceLm::from_words::<&str>(&[], 0).is_err());
        assert!(ReferenceLm::from_words(&["a", "."], 0).is_err());
        assert!(ReferenceLm::from_words(&["a", "a"], 0).is_err());
    }
}
