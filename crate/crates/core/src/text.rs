//! Tokens, token sequences and mask substitution.
//!
//! Positions are 0-based throughout the crate.

use std::fmt;

use crate::error::{Result, StegoError};

/// Surface form used for the mask sentinel when a sequence is rendered or
/// sent over the wire.
pub const MASK_SURFACE: &str = "[MASK]";

/// Special tokens that never carry data.
pub const SPECIAL_TOKENS: [&str; 5] = ["[CLS]", "[SEP]", "[MASK]", "[PAD]", "[UNK]"];

/// A non-empty text unit produced by the active tokenizer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Option<Self> {
        let surface = surface.into();
        if surface.is_empty() {
            None
        } else {
            Some(Token(surface))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<&str> for Token {
    type Error = StegoError;

    fn try_from(s: &str) -> Result<Self> {
        Token::new(s).ok_or(StegoError::EmptySequence)
    }
}

/// One position of a sequence: either a real token or the mask sentinel.
///
/// The sentinel is a separate variant so it never compares equal to a
/// vocabulary token, even one whose surface happens to read `[MASK]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slot {
    Word(Token),
    Mask,
}

impl Slot {
    pub fn surface(&self) -> &str {
        match self {
            Slot::Word(t) => t.as_str(),
            Slot::Mask => MASK_SURFACE,
        }
    }

    pub fn is_mask(&self) -> bool {
        matches!(self, Slot::Mask)
    }

    pub fn token(&self) -> Option<&Token> {
        match self {
            Slot::Word(t) => Some(t),
            Slot::Mask => None,
        }
    }
}

/// Ordered tokens of a cover, stego or temporary text.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct TokenSequence {
    slots: Vec<Slot>,
}

impl TokenSequence {
    pub fn new(slots: Vec<Slot>) -> Self {
        TokenSequence { slots }
    }

    pub fn from_tokens(tokens: impl IntoIterator<Item = Token>) -> Self {
        TokenSequence {
            slots: tokens.into_iter().map(Slot::Word).collect(),
        }
    }

    /// Builds a sequence from surface strings, skipping empty ones.
    pub fn from_words<S: AsRef<str>>(words: impl IntoIterator<Item = S>) -> Self {
        Self::from_tokens(words.into_iter().filter_map(|w| Token::new(w.as_ref())))
    }

    /// Whitespace tokenization.
    pub fn split_whitespace(text: &str) -> Self {
        Self::from_words(text.split_whitespace())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn get(&self, index: usize) -> Option<&Slot> {
        self.slots.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Slot> {
        self.slots.iter()
    }

    pub fn surfaces(&self) -> Vec<String> {
        self.slots.iter().map(|s| s.surface().to_owned()).collect()
    }

    pub fn mask_count(&self) -> usize {
        self.slots.iter().filter(|s| s.is_mask()).count()
    }

    pub(crate) fn set(&mut self, index: usize, slot: Slot) -> Result<()> {
        let len = self.slots.len();
        let target = self
            .slots
            .get_mut(index)
            .ok_or(StegoError::OutOfBounds { index, len })?;
        *target = slot;
        Ok(())
    }

    /// Tokens joined with single spaces.
    pub fn join(&self) -> String {
        self.surfaces().join(" ")
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.join())
    }
}

impl FromIterator<Token> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        Self::from_tokens(iter)
    }
}

/// Replaces every position in `subset` with the mask sentinel.
pub fn apply_masks(text: &TokenSequence, subset: &[usize]) -> Result<TokenSequence> {
    let mut out = text.clone();
    for &index in subset {
        out.set(index, Slot::Mask)?;
    }
    Ok(out)
}

/// True iff the token can carry data: it has at least one alphabetic
/// character, is not a special token and is not a `##` subword continuation.
pub fn is_maskable(token: &Token) -> bool {
    let s = token.as_str();
    s.chars().any(char::is_alphabetic) && !SPECIAL_TOKENS.contains(&s) && !s.starts_with("##")
}

pub(crate) fn slot_is_maskable(slot: &Slot) -> bool {
    slot.token().is_some_and(is_maskable)
}

/// Words counted for payload accounting: at least one alphanumeric character.
pub fn is_countable(token: &Token) -> bool {
    token.as_str().chars().any(char::is_alphanumeric)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> TokenSequence {
        TokenSequence::split_whitespace(s)
    }

    #[test]
    fn empty_subset_is_identity() {
        let x = seq("Midshire is a wonderful little city .");
        assert_eq!(apply_masks(&x, &[]).unwrap(), x);
    }

    #[test]
    fn figure_one_masks() {
        let x = seq("Midshire is a wonderful little city .");
        let masked = apply_masks(&x, &[3, 5]).unwrap();
        assert_eq!(masked.join(), "Midshire is a [MASK] little [MASK] .");
        assert_eq!(masked.mask_count(), 2);
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let x = seq("a b c");
        assert!(matches!(
            apply_masks(&x, &[3]),
            Err(StegoError::OutOfBounds { index: 3, len: 3 })
        ));
    }

    #[test]
    fn mask_sentinel_differs_from_literal_mask_word() {
        let literal = Slot::Word(Token::new("[MASK]").unwrap());
        assert_ne!(literal, Slot::Mask);
        assert!(!is_maskable(literal.token().unwrap()));
    }

    #[test]
    fn maskable_predicate() {
        let t = |s: &str| Token::new(s).unwrap();
        assert!(!is_maskable(&t(".")));
        assert!(!is_maskable(&t("[MASK]")));
        assert!(!is_maskable(&t("[CLS]")));
        assert!(!is_maskable(&t("##ing")));
        assert!(!is_maskable(&t("[186]")));
        assert!(is_maskable(&t("city")));
        assert!(is_maskable(&t("BILSTEIN’s")));
        assert!(is_countable(&t("186")));
        assert!(!is_countable(&t(",")));
    }

    #[test]
    fn empty_token_rejected() {
        assert!(Token::new("").is_none());
        assert_eq!(seq("  a   b ").len(), 2);
    }
}
