//! Candidate selection and the word/bit-string mappings.
//!
//! Two coders are provided:
//!
//! * **consistency** – a Huffman code over the renormalized candidate
//!   probabilities, so that under uniformly random message bits a candidate
//!   with code length `len` is chosen with probability `2^-len`. Higher
//!   probability words get codes no longer than lower probability ones.
//!   The tree shape is canonical; the secret key only decides which child of
//!   each internal node is labelled `0`.
//! * **block** – the baseline: the top `2^l` candidates, `l = ⌊log2 w⌋`, each
//!   carry exactly `l` bits, so every one is chosen with probability `2^-l`.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::bits::Bits;
use crate::config::Coder;
use crate::error::{Result, StegoError};
use crate::key::SecretKey;
use crate::lm::PredictionDistribution;
use crate::text::{is_maskable, Token};

/// Candidates above the threshold with probabilities renormalized to sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    entries: Vec<(Token, f64)>,
    source: Vec<f64>,
}

impl CandidateSet {
    /// Builds a set from already-normalized `(token, q)` pairs in canonical order.
    pub fn from_normalized(entries: Vec<(Token, f64)>) -> Self {
        let source = entries.iter().map(|(_, q)| *q).collect();
        CandidateSet { entries, source }
    }

    pub fn entries(&self) -> &[(Token, f64)] {
        &self.entries
    }

    /// Probabilities as reported by the LM, before renormalization.
    pub fn source_probs(&self) -> &[f64] {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.entries.iter().map(|(t, _)| t)
    }
}

/// Maskable tokens with probability strictly above `threshold`, renormalized.
pub fn select_candidates(dist: &PredictionDistribution, threshold: f64) -> CandidateSet {
    let kept: Vec<(Token, f64)> = dist
        .entries()
        .iter()
        .filter(|(t, p)| *p > threshold && is_maskable(t))
        .cloned()
        .collect();
    let total: f64 = kept.iter().map(|(_, p)| p).sum();
    let source = kept.iter().map(|(_, p)| *p).collect();
    let entries = kept.into_iter().map(|(t, p)| (t, p / total)).collect();
    CandidateSet { entries, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodeKind {
    Consistency,
    Block,
}

/// Prefix-free mapping from candidate tokens to bit strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBook {
    kind: CodeKind,
    position: usize,
    entries: Vec<(Token, Bits)>,
}

impl CodeBook {
    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn position(&self) -> usize {
        self.position
    }

    /// `(token, code)` pairs in candidate order.
    pub fn entries(&self) -> &[(Token, Bits)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn code_of(&self, token: &Token) -> Option<&Bits> {
        self.entries.iter().find(|(t, _)| t == token).map(|(_, c)| c)
    }

    pub fn code_lengths(&self) -> Vec<usize> {
        self.entries.iter().map(|(_, c)| c.len()).collect()
    }

    pub fn min_code_len(&self) -> usize {
        self.code_lengths().into_iter().min().unwrap_or(0)
    }

    pub fn max_code_len(&self) -> usize {
        self.code_lengths().into_iter().max().unwrap_or(0)
    }
}

#[derive(Debug)]
enum NodeKind {
    Leaf(usize),
    Internal([usize; 2]),
}

#[derive(Debug)]
struct Node {
    weight: f64,
    first: usize,
    kind: NodeKind,
}

/// Heap key: lowest weight first, ties by earliest canonical constituent.
#[derive(Debug, PartialEq)]
struct Pending {
    weight: f64,
    first: usize,
    node: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.first.cmp(&other.first))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Keyed Huffman code over the candidate set.
///
/// The two lowest-weight nodes are merged repeatedly (ties go to the node
/// holding the earliest candidate); the first one popped becomes the left
/// child. Internal nodes are then numbered in pre-order over this unlabelled
/// tree, and node `k` has its children's `0`/`1` labels swapped iff
/// `key.huffman_swap_bit(position, k)` is set.
pub fn build_consistency_codebook(
    cands: &CandidateSet,
    key: &SecretKey,
    position: usize,
) -> Result<CodeBook> {
    let w = cands.len();
    if w < 2 {
        return Err(StegoError::DegenerateCandidates(w));
    }
    let mut nodes: Vec<Node> = Vec::with_capacity(2 * w - 1);
    let mut heap = BinaryHeap::with_capacity(w);
    for (i, (_, q)) in cands.entries().iter().enumerate() {
        nodes.push(Node {
            weight: *q,
            first: i,
            kind: NodeKind::Leaf(i),
        });
        heap.push(Reverse(Pending {
            weight: *q,
            first: i,
            node: i,
        }));
    }
    while heap.len() > 1 {
        let Reverse(a) = heap.pop().unwrap();
        let Reverse(b) = heap.pop().unwrap();
        let node = Node {
            weight: a.weight + b.weight,
            first: a.first.min(b.first),
            kind: NodeKind::Internal([a.node, b.node]),
        };
        let pending = Pending {
            weight: node.weight,
            first: node.first,
            node: nodes.len(),
        };
        nodes.push(node);
        heap.push(Reverse(pending));
    }
    let root = heap.pop().unwrap().0.node;

    let mut codes: Vec<Bits> = vec![Bits::new(); w];
    let mut internal_counter = 0usize;
    // Explicit stack: (node, path so far). Left child is pushed last so it is
    // visited first, giving pre-order numbering.
    let mut stack = vec![(root, Vec::<bool>::new())];
    while let Some((id, path)) = stack.pop() {
        match nodes[id].kind {
            NodeKind::Leaf(i) => codes[i] = Bits::from_bools(path),
            NodeKind::Internal([left, right]) => {
                let swap = key.huffman_swap_bit(position, internal_counter);
                internal_counter += 1;
                let mut left_path = path.clone();
                left_path.push(swap);
                let mut right_path = path;
                right_path.push(!swap);
                stack.push((right, right_path));
                stack.push((left, left_path));
            }
        }
    }

    Ok(CodeBook {
        kind: CodeKind::Consistency,
        position,
        entries: cands.tokens().cloned().zip(codes).collect(),
    })
}

/// Fixed-length code: `l = ⌊log2 w⌋`, the `i`-th of the top `2^l` candidates
/// gets the `l`-bit big-endian binary of `i`.
pub fn build_block_codebook(cands: &CandidateSet, position: usize) -> Result<CodeBook> {
    let w = cands.len();
    if w < 2 {
        return Err(StegoError::DegenerateCandidates(w));
    }
    let l = w.ilog2() as usize;
    let entries = cands
        .tokens()
        .take(1 << l)
        .enumerate()
        .map(|(i, t)| (t.clone(), Bits::from_uint(i as u64, l)))
        .collect();
    Ok(CodeBook {
        kind: CodeKind::Block,
        position,
        entries,
    })
}

pub fn build_codebook(
    coder: Coder,
    cands: &CandidateSet,
    key: &SecretKey,
    position: usize,
) -> Result<CodeBook> {
    match coder {
        Coder::Consistency => build_consistency_codebook(cands, key, position),
        Coder::Block => build_block_codebook(cands, position),
    }
}

/// Picks the token whose code prefixes `remaining` (read as zero-extended
/// past its end) and returns it with the code length.
pub fn encode_step<'a>(book: &'a CodeBook, remaining: &[bool]) -> Result<(&'a Token, usize)> {
    book.entries
        .iter()
        .find(|(_, code)| code.is_prefix_of_padded(remaining))
        .map(|(t, code)| (t, code.len()))
        .ok_or_else(|| {
            StegoError::Internal(format!(
                "codebook at position {} has no code matching the stream",
                book.position
            ))
        })
}

/// Code of the observed token; a token outside the book means the parties
/// disagree on key, configuration or model.
pub fn decode_step<'a>(book: &'a CodeBook, observed: &Token) -> Result<&'a Bits> {
    book.code_of(observed).ok_or_else(|| StegoError::Desync {
        position: book.position,
        token: observed.as_str().to_owned(),
    })
}
