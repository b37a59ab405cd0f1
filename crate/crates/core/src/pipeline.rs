//! Embedding and extraction.
//!
//! Masked positions are processed left to right. At each one the LM sees the
//! temporary text (earlier positions already filled, later ones masked),
//! the candidates above the threshold are coded, and the token whose code
//! prefixes the remaining stream fills the position. The extractor replays
//! the same steps on the stego text and reads the codes back.
//!
//! Per position:
//!
//! | stream state     | candidates `w` | filled with          | bits |
//! |------------------|----------------|----------------------|------|
//! | bits remaining   | `w >= 2`       | coded candidate      | code |
//! | bits remaining   | `w == 1`       | the sole candidate   | 0    |
//! | bits remaining   | `w == 0`       | original cover token | 0    |
//! | stream exhausted | (not queried)  | original cover token | 0    |

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{declared_length, frame_message, unframe_message, Bits, HEADER_BITS};
use crate::coding::{build_codebook, decode_step, encode_step, select_candidates, CandidateSet, CodeBook};
use crate::config::{PredictionMode, StegoConfig};
use crate::error::{Result, StegoError};
use crate::lm::MaskedLm;
use crate::masking::{plan_masks, temporary_text, MaskPlan};
use crate::metrics::payload_bpw;
use crate::text::{apply_masks, Slot, Token, TokenSequence};

/// What happened at one masked position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositionRecord {
    pub index: usize,
    /// Candidate count; `None` when the stream was already exhausted and
    /// the LM was not queried.
    pub candidates: Option<usize>,
    pub token: String,
    /// Code carried by the token, `None` for zero-bit fills.
    pub code: Option<String>,
}

impl PositionRecord {
    /// `token(a,b)`: `a` candidates, code `b` (`-` when no bits are carried).
    pub fn annotation(&self) -> String {
        let a = self
            .candidates
            .map_or_else(|| "-".to_owned(), |w| w.to_string());
        let b = self.code.as_deref().unwrap_or("-");
        format!("{}({a},{b})", self.token)
    }

    pub fn bits(&self) -> usize {
        self.code.as_ref().map_or(0, String::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbedReport {
    pub records: Vec<PositionRecord>,
    /// Framed-stream bits carried by this text (padding excluded).
    pub bits_embedded: usize,
    /// Zero bits appended to complete the final codeword.
    pub padding_bits: usize,
    pub countable_words: usize,
    pub bpw: f64,
}

impl EmbedReport {
    /// The stego text with each masked position annotated as `token(a,b)`.
    pub fn annotated(&self, stego: &TokenSequence) -> String {
        let mut out: Vec<String> = stego.surfaces();
        for r in &self.records {
            if let Some(slot) = out.get_mut(r.index) {
                *slot = r.annotation();
            }
        }
        out.join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub stego: TokenSequence,
    pub report: EmbedReport,
}

/// Result of running the embedding loop over one text without enforcing
/// that the whole stream fits.
#[derive(Debug, Clone)]
pub struct StreamEmbedding {
    pub stego: TokenSequence,
    pub records: Vec<PositionRecord>,
    /// Bits of the stream consumed, including zero-extension past its end.
    pub consumed: usize,
}

impl StreamEmbedding {
    fn into_embedding(self, stream_len: usize) -> Result<Embedding> {
        let bits_embedded = self.consumed.min(stream_len);
        let padding_bits = self.consumed - bits_embedded;
        let stats = payload_bpw(&self.stego, bits_embedded);
        let (countable_words, bpw) = match stats {
            Ok(s) => (s.countable_words, s.bpw),
            Err(_) => (0, 0.0),
        };
        Ok(Embedding {
            stego: self.stego,
            report: EmbedReport {
                records: self.records,
                bits_embedded,
                padding_bits,
                countable_words,
                bpw,
            },
        })
    }
}

fn predict_candidates<L: MaskedLm + ?Sized>(
    work: &TokenSequence,
    base: &TokenSequence,
    plan: &MaskPlan,
    step: usize,
    cfg: &StegoConfig,
    lm: &L,
) -> Result<CandidateSet> {
    let position = plan.indices()[step];
    let temp = match cfg.mode {
        PredictionMode::Autoregressive => temporary_text(work, plan, step)?,
        PredictionMode::Parallel => base.clone(),
    };
    let dist = lm.predict(&temp, position, cfg.threshold)?;
    Ok(select_candidates(&dist, cfg.threshold))
}

fn word_at(seq: &TokenSequence, index: usize) -> Result<Token> {
    seq.get(index)
        .and_then(Slot::token)
        .cloned()
        .ok_or(StegoError::OutOfBounds {
            index,
            len: seq.len(),
        })
}

/// Runs the embedding loop over `cover` at the planned positions, consuming
/// bits from `stream` while any remain.
pub fn embed_stream<L: MaskedLm + ?Sized>(
    cover: &TokenSequence,
    plan: &MaskPlan,
    stream: &[bool],
    cfg: &StegoConfig,
    lm: &L,
) -> Result<StreamEmbedding> {
    let mut work = apply_masks(cover, plan.indices())?;
    let base = work.clone();
    let mut consumed = 0usize;
    let mut records = Vec::with_capacity(plan.len());

    for (step, &index) in plan.indices().iter().enumerate() {
        let original = word_at(cover, index)?;
        let (token, candidates, code) = if consumed >= stream.len() {
            (original, None, None)
        } else {
            let cands = predict_candidates(&work, &base, plan, step, cfg, lm)?;
            match cands.len() {
                0 => (original, Some(0), None),
                1 => (cands.entries()[0].0.clone(), Some(1), None),
                w => {
                    let book = build_codebook(cfg.coder, &cands, &cfg.key, index)?;
                    let (token, used) = encode_step(&book, &stream[consumed..])?;
                    let code = book.code_of(token).map(Bits::to_string);
                    consumed += used;
                    (token.clone(), Some(w), code)
                }
            }
        };
        records.push(PositionRecord {
            index,
            candidates,
            token: token.as_str().to_owned(),
            code,
        });
        work.set(index, Slot::Word(token))?;
    }

    Ok(StreamEmbedding {
        stego: work,
        records,
        consumed,
    })
}

/// Replays the embedding loop over `stego`, appending decoded bits to
/// `collected` while `wants_more(collected)` holds.
pub fn extract_stream<L, F>(
    stego: &TokenSequence,
    plan: &MaskPlan,
    cfg: &StegoConfig,
    lm: &L,
    collected: &mut Vec<bool>,
    wants_more: F,
) -> Result<()>
where
    L: MaskedLm + ?Sized,
    F: Fn(&[bool]) -> bool,
{
    let mut work = apply_masks(stego, plan.indices())?;
    let base = work.clone();

    for (step, &index) in plan.indices().iter().enumerate() {
        let observed = word_at(stego, index)?;
        if wants_more(collected) {
            let cands = predict_candidates(&work, &base, plan, step, cfg, lm)?;
            match cands.len() {
                0 => {}
                1 => {
                    if cands.entries()[0].0 != observed {
                        return Err(StegoError::Desync {
                            position: index,
                            token: observed.into_string(),
                        });
                    }
                }
                _ => {
                    let book = build_codebook(cfg.coder, &cands, &cfg.key, index)?;
                    collected.extend_from_slice(decode_step(&book, &observed)?.as_slice());
                }
            }
        }
        work.set(index, Slot::Word(observed))?;
    }
    Ok(())
}

/// True while the framed stream in `bits` is incomplete.
pub fn framed_wants_more(bits: &[bool]) -> bool {
    match declared_length(bits) {
        None => true,
        Some(len) => bits.len() < HEADER_BITS + len,
    }
}

fn require_nonempty(cover: &TokenSequence) -> Result<()> {
    if cover.is_empty() {
        Err(StegoError::EmptySequence)
    } else {
        Ok(())
    }
}

/// Hides `message` in `cover`.
///
/// Fails with [`StegoError::InsufficientCapacity`] (carrying the number of
/// framed bits that did fit) if the cover cannot hold the framed message.
pub fn embed<L: MaskedLm + ?Sized>(
    cover: &TokenSequence,
    message: &Bits,
    cfg: &StegoConfig,
    lm: &L,
) -> Result<Embedding> {
    cfg.validate()?;
    require_nonempty(cover)?;
    let plan = plan_masks(cover, cfg.interval, &cfg.key)?;
    let framed = frame_message(message)?;
    let run = embed_stream(cover, &plan, framed.as_slice(), cfg, lm)?;
    if run.consumed < framed.len() {
        return Err(StegoError::InsufficientCapacity {
            consumed: run.consumed,
            required: framed.len(),
        });
    }
    run.into_embedding(framed.len())
}

/// Recovers the message hidden by [`embed`].
pub fn extract<L: MaskedLm + ?Sized>(stego: &TokenSequence, cfg: &StegoConfig, lm: &L) -> Result<Bits> {
    extract_many(std::slice::from_ref(stego), cfg, lm)
}

/// Spreads one framed message over several covers, in order. Each cover
/// takes the next part of the stream; covers after the end of the stream
/// keep their original words.
pub fn embed_many<L: MaskedLm + ?Sized>(
    covers: &[TokenSequence],
    message: &Bits,
    cfg: &StegoConfig,
    lm: &L,
) -> Result<Vec<Embedding>> {
    cfg.validate()?;
    let framed = frame_message(message)?;
    let mut cursor = 0usize;
    let mut out = Vec::with_capacity(covers.len());
    for cover in covers {
        require_nonempty(cover)?;
        let plan = plan_masks(cover, cfg.interval, &cfg.key)?;
        let rest = &framed.as_slice()[cursor.min(framed.len())..];
        let run = embed_stream(cover, &plan, rest, cfg, lm)?;
        cursor += run.consumed;
        out.push(run.into_embedding(rest.len())?);
    }
    if cursor < framed.len() {
        return Err(StegoError::InsufficientCapacity {
            consumed: cursor,
            required: framed.len(),
        });
    }
    Ok(out)
}

pub fn extract_many<L: MaskedLm + ?Sized>(
    stegos: &[TokenSequence],
    cfg: &StegoConfig,
    lm: &L,
) -> Result<Bits> {
    cfg.validate()?;
    let mut collected = Vec::new();
    for stego in stegos {
        require_nonempty(stego)?;
        let plan = plan_masks(stego, cfg.interval, &cfg.key)?;
        extract_stream(stego, &plan, cfg, lm, &mut collected, framed_wants_more)?;
    }
    unframe_message(&collected)
}

/// Unframed embedding at caller-chosen positions; the receiver must know
/// `bits.len()` and the plan.
pub fn embed_bits<L: MaskedLm + ?Sized>(
    cover: &TokenSequence,
    plan: &MaskPlan,
    bits: &Bits,
    cfg: &StegoConfig,
    lm: &L,
) -> Result<Embedding> {
    let run = embed_stream(cover, plan, bits.as_slice(), cfg, lm)?;
    run.into_embedding(bits.len())
}

/// Reads back up to `len` bits (plus any trailing padding of the last
/// codeword) from a text produced by [`embed_bits`].
pub fn extract_bits<L: MaskedLm + ?Sized>(
    stego: &TokenSequence,
    plan: &MaskPlan,
    len: usize,
    cfg: &StegoConfig,
    lm: &L,
) -> Result<Bits> {
    let mut collected = Vec::new();
    extract_stream(stego, plan, cfg, lm, &mut collected, |b| b.len() < len)?;
    Ok(Bits::from_bools(collected))
}

/// The coding state at one masked position as the extractor sees it.
#[derive(Debug, Clone)]
pub struct PositionView {
    pub index: usize,
    pub token: Token,
    pub candidates: CandidateSet,
    pub codebook: Option<CodeBook>,
}

impl fmt::Display for PositionView {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} w={}", self.index, self.token, self.candidates.len())?;
        for (k, (t, q)) in self.candidates.entries().iter().enumerate() {
            let code = self
                .codebook
                .as_ref()
                .and_then(|b| b.code_of(t))
                .map_or_else(|| "-".to_owned(), Bits::to_string);
            let sep = if k == 0 { " " } else { ", " };
            write!(f, "{sep}{t}:{q:.4}:{code}")?;
        }
        Ok(())
    }
}

/// Plan, candidates and codebooks for every masked position of `text`,
/// replayed as during extraction.
pub fn inspect<L: MaskedLm + ?Sized>(
    text: &TokenSequence,
    cfg: &StegoConfig,
    lm: &L,
) -> Result<Vec<PositionView>> {
    cfg.validate()?;
    let plan = plan_masks(text, cfg.interval, &cfg.key)?;
    let mut work = apply_masks(text, plan.indices())?;
    let base = work.clone();
    let mut views = Vec::with_capacity(plan.len());
    for (step, &index) in plan.indices().iter().enumerate() {
        let token = word_at(text, index)?;
        let candidates = predict_candidates(&work, &base, &plan, step, cfg, lm)?;
        let codebook = (candidates.len() >= 2)
            .then(|| build_codebook(cfg.coder, &candidates, &cfg.key, index))
            .transpose()?;
        views.push(PositionView {
            index,
            token: token.clone(),
            candidates,
            codebook,
        });
        work.set(index, Slot::Word(token))?;
    }
    Ok(views)
}
