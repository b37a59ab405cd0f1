//! Masked language model interface.
//!
//! An LM receives a temporary text plus one masked target position and
//! returns the probability of every candidate token at that position. Both
//! parties must see bit-identical outputs for identical inputs.

use std::cmp::Ordering;
use std::collections::HashSet;

use thiserror::Error;

use crate::text::{Token, TokenSequence};

pub mod reference;
pub mod remote;

pub use reference::ReferenceLm;
pub use remote::RemoteLm;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("transport error: {0}")]
    Transport(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("nondeterministic service: {0}")]
    Determinism(String),

    #[error("position {position} is not masked in the temporary text")]
    NotMasked { position: usize },

    #[error("invalid vocabulary: {0}")]
    Vocab(String),
}

impl LmError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, LmError::Transport(_))
    }
}

/// Token probabilities at one masked position, in canonical order:
/// probability descending, ties broken by token bytes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionDistribution {
    entries: Vec<(Token, f64)>,
    total_mass: f64,
}

/// Canonical entry order. Total over distinct tokens.
pub fn canonical_cmp(a: &(Token, f64), b: &(Token, f64)) -> Ordering {
    b.1.total_cmp(&a.1)
        .then_with(|| a.0.as_str().as_bytes().cmp(b.0.as_str().as_bytes()))
}

impl PredictionDistribution {
    /// Sorts `entries` canonically. `total_mass` is the probability mass of
    /// the full (untruncated) distribution.
    pub fn new(mut entries: Vec<(Token, f64)>, total_mass: f64) -> Result<Self, LmError> {
        let mut seen = HashSet::with_capacity(entries.len());
        for (token, p) in &entries {
            if !seen.insert(token.as_str()) {
                return Err(LmError::Protocol(format!("duplicate token {token:?}")));
            }
            if !p.is_finite() || !(0.0..=1.0).contains(p) {
                return Err(LmError::Protocol(format!("probability {p} for {token:?}")));
            }
        }
        entries.sort_by(canonical_cmp);
        Ok(PredictionDistribution {
            entries,
            total_mass,
        })
    }

    pub fn entries(&self) -> &[(Token, f64)] {
        &self.entries
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn prob_of(&self, token: &Token) -> Option<f64> {
        self.entries.iter().find(|(t, _)| t == token).map(|(_, p)| *p)
    }
}

/// A deterministic masked language model.
pub trait MaskedLm {
    fn tokenize(&self, text: &str) -> Result<TokenSequence, LmError>;

    /// Distribution at `position` of `temporary`, truncated to entries with
    /// probability `>= min_prob`.
    fn predict(
        &self,
        temporary: &TokenSequence,
        position: usize,
        min_prob: f64,
    ) -> Result<PredictionDistribution, LmError>;

    /// Identifies model weights and runtime; parties must agree on it.
    fn model_digest(&self) -> Result<String, LmError>;
}

impl<T: MaskedLm + ?Sized> MaskedLm for &T {
    fn tokenize(&self, text: &str) -> Result<TokenSequence, LmError> {
        (**self).tokenize(text)
    }

    fn predict(
        &self,
        temporary: &TokenSequence,
        position: usize,
        min_prob: f64,
    ) -> Result<PredictionDistribution, LmError> {
        (**self).predict(temporary, position, min_prob)
    }

    fn model_digest(&self) -> Result<String, LmError> {
        (**self).model_digest()
    }
}

impl<T: MaskedLm + ?Sized> MaskedLm for Box<T> {
    fn tokenize(&self, text: &str) -> Result<TokenSequence, LmError> {
        (**self).tokenize(text)
    }

    fn predict(
        &self,
        temporary: &TokenSequence,
        position: usize,
        min_prob: f64,
    ) -> Result<PredictionDistribution, LmError> {
        (**self).predict(temporary, position, min_prob)
    }

    fn model_digest(&self) -> Result<String, LmError> {
        (**self).model_digest()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(s: &str) -> Token {
        Token::new(s).unwrap()
    }

    #[test]
    fn canonical_order_breaks_ties_by_bytes() {
        let d = PredictionDistribution::new(
            vec![(tok("b"), 0.25), (tok("a"), 0.25), (tok("c"), 0.5)],
            1.0,
        )
        .unwrap();
        let names: Vec<&str> = d.entries().iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(names, ["c", "a", "b"]);
    }

    #[test]
    fn duplicates_rejected() {
        assert!(PredictionDistribution::new(vec![(tok("a"), 0.5), (tok("a"), 0.5)], 1.0).is_err());
    }
}
