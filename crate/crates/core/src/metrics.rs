//! Payload accounting and a text-quality indicator.

use serde::{Deserialize, Serialize};

use crate::error::{Result, StegoError};
use crate::lm::MaskedLm;
use crate::text::{apply_masks, is_countable, is_maskable, Slot, TokenSequence};

/// Probability assigned to a token the LM did not return.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayloadStats {
    pub bits: usize,
    pub countable_words: usize,
    pub bpw: f64,
}

/// Bits per word, counting only tokens with an alphanumeric character.
pub fn payload_bpw(text: &TokenSequence, bits: usize) -> Result<PayloadStats> {
    let countable_words = text
        .iter()
        .filter(|s| s.token().is_some_and(is_countable))
        .count();
    if countable_words == 0 {
        return Err(StegoError::UndefinedPayload);
    }
    Ok(PayloadStats {
        bits,
        countable_words,
        bpw: bits as f64 / countable_words as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perplexity {
    pub value: f64,
    pub evaluated: usize,
    /// Positions whose token was absent from the LM output and floored.
    pub missing: usize,
}

/// `exp(-mean ln p(x_i | x with only i masked))` over maskable positions.
pub fn pseudo_perplexity<L: MaskedLm + ?Sized>(lm: &L, text: &TokenSequence) -> Result<Perplexity> {
    let mut log_sum = 0.0;
    let mut evaluated = 0usize;
    let mut missing = 0usize;
    for (i, slot) in text.iter().enumerate() {
        let Slot::Word(token) = slot else { continue };
        if !is_maskable(token) {
            continue;
        }
        let temp = apply_masks(text, &[i])?;
        let dist = lm.predict(&temp, i, 0.0)?;
        let p = match dist.prob_of(token) {
            Some(p) if p > 0.0 => p,
            _ => {
                missing += 1;
                PROB_FLOOR
            }
        };
        log_sum += p.ln();
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(StegoError::NoMaskableTokens);
    }
    Ok(Perplexity {
        value: (-log_sum / evaluated as f64).exp(),
        evaluated,
        missing,
    })
}

/// A word annotated as `word(a,b)`: `a` candidates, code `b` (`-` for none).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub word: String,
    /// `None` for `-`, i.e. the LM was not consulted.
    pub candidates: Option<usize>,
    pub code: Option<String>,
}

fn parse_suffix(s: &str) -> Option<(Option<usize>, Option<String>)> {
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let (a, b) = inner.split_once(',')?;
    let candidates = match a.trim() {
        "-" => None,
        n => Some(n.parse().ok()?),
    };
    let b = b.trim();
    let code = if b == "-" {
        None
    } else if !b.is_empty() && b.chars().all(|c| c == '0' || c == '1') {
        Some(b.to_owned())
    } else {
        return None;
    };
    Some((candidates, code))
}

/// Splits an annotated stego text (`... ways (2,1) to ...` or
/// `... ways(2,1) to ...`) into the plain text and its annotations.
pub fn parse_annotated(text: &str) -> (TokenSequence, Vec<Annotation>) {
    let mut words: Vec<String> = Vec::new();
    let mut notes = Vec::new();
    for piece in text.split_whitespace() {
        if let Some((candidates, code)) = parse_suffix(piece) {
            if let Some(word) = words.last() {
                notes.push(Annotation {
                    word: word.clone(),
                    candidates,
                    code,
                });
                continue;
            }
        }
        if let Some(open) = piece.find('(').filter(|&k| k > 0) {
            if let Some((candidates, code)) = parse_suffix(&piece[open..]) {
                let word = piece[..open].to_owned();
                notes.push(Annotation {
                    word: word.clone(),
                    candidates,
                    code,
                });
                words.push(word);
                continue;
            }
        }
        words.push(piece.to_owned());
    }
    (TokenSequence::from_words(&words), notes)
}
