//! Linguistic steganography with a masked language model.
//!
//! A secret bit stream is hidden in a cover text by masking keyed positions,
//! asking a masked LM for candidate words at each position in turn, and
//! choosing the candidate whose prefix-free code matches the next message
//! bits. The receiver repeats the same steps on the stego text to read the
//! codes back.
//!
//! ```
//! use autostego::{embed, extract, Bits, ReferenceLm, SecretKey, StegoConfig, TokenSequence};
//!
//! let words: Vec<String> = (0..32).map(|i| format!("word{i}")).collect();
//! let lm = ReferenceLm::from_words(&words, 7).unwrap();
//! let key = SecretKey::new(b"an example key, 16+ bytes".to_vec()).unwrap();
//! let cfg = StegoConfig::new(1, 0.01, key).unwrap();
//!
//! let cover = TokenSequence::split_whitespace(&"the quick brown fox jumps over the lazy dog . ".repeat(8));
//! let message = Bits::from_bytes(b"hi");
//! let stego = embed(&cover, &message, &cfg, &lm).unwrap().stego;
//! assert_eq!(extract(&stego, &cfg, &lm).unwrap(), message);
//! ```

pub mod bits;
pub mod coding;
pub mod config;
pub mod error;
pub mod key;
pub mod lm;
pub mod masking;
pub mod metrics;
pub mod pipeline;
pub mod text;

pub use bits::{frame_message, unframe_message, Bits};
pub use coding::{
    build_block_codebook, build_codebook, build_consistency_codebook, decode_step, encode_step,
    select_candidates, CandidateSet, CodeBook, CodeKind,
};
pub use config::{Coder, PredictionMode, StegoConfig};
pub use error::{Result, StegoError};
pub use key::SecretKey;
pub use lm::{LmError, MaskedLm, PredictionDistribution, ReferenceLm, RemoteLm};
pub use masking::{is_maskable, plan_masks, temporary_text, MaskPlan};
pub use metrics::{payload_bpw, pseudo_perplexity, PayloadStats, Perplexity};
pub use pipeline::{
    embed, embed_bits, embed_many, extract, extract_bits, extract_many, inspect, EmbedReport,
    Embedding, PositionRecord,
};
pub use text::{apply_masks, Slot, Token, TokenSequence};
