#![allow(dead_code)]

use std::path::PathBuf;

use autostego::{ReferenceLm, SecretKey, TokenSequence};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn vocab64_lm(seed: u64) -> ReferenceLm {
    ReferenceLm::from_vocab_file(&data_dir().join("vocab64.txt"), seed).unwrap()
}

pub fn corpus_text(i: usize) -> TokenSequence {
    let path = data_dir().join("corpus").join(format!("text_{i:03}.txt"));
    TokenSequence::split_whitespace(&std::fs::read_to_string(path).unwrap())
}

pub fn corpus() -> Vec<TokenSequence> {
    (0..100).map(corpus_text).collect()
}

pub fn key(bytes: &[u8]) -> SecretKey {
    SecretKey::new(bytes.to_vec()).unwrap()
}
