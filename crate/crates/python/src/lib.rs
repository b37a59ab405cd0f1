//! Python bindings: `import autostego_py`.

use std::path::PathBuf;

use autostego::{
    build_block_codebook, build_consistency_codebook, frame_message, unframe_message, Bits,
    CandidateSet, CodeBook, Coder, EmbedReport, Embedding, LmError, MaskedLm, PredictionMode, Slot,
    StegoConfig, Token, TokenSequence,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

create_exception!(autostego_py, StegoError, PyException);
create_exception!(autostego_py, CapacityError, StegoError);
create_exception!(autostego_py, DesyncError, StegoError);
create_exception!(autostego_py, LanguageModelError, StegoError);

fn to_py(e: autostego::StegoError) -> PyErr {
    use autostego::StegoError as E;
    let msg = e.to_string();
    match e {
        E::InsufficientCapacity { .. } | E::MessageTooLong { .. } => CapacityError::new_err(msg),
        E::Desync { .. } | E::TruncatedStream { .. } => DesyncError::new_err(msg),
        E::Lm(_) => LanguageModelError::new_err(msg),
        E::Config(_) | E::KeyTooShort { .. } | E::Encoding(_) => PyValueError::new_err(msg),
        _ => StegoError::new_err(msg),
    }
}

fn lm_err(e: LmError) -> PyErr {
    to_py(autostego::StegoError::Lm(e))
}

fn token(s: &str) -> PyResult<Token> {
    Token::new(s).ok_or_else(|| PyValueError::new_err("empty token"))
}

/// `None` entries become mask slots.
fn temporary(tokens: Vec<Option<String>>) -> PyResult<TokenSequence> {
    let slots = tokens
        .into_iter()
        .map(|t| t.map_or(Ok(Slot::Mask), |s| token(&s).map(Slot::Word)))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(TokenSequence::new(slots))
}

fn bits_from_str(s: &str) -> PyResult<Bits> {
    s.parse::<Bits>().map_err(to_py)
}

/// Deterministic reference LM over a fixed vocabulary.
#[pyclass(name = "ReferenceLm", frozen)]
struct PyReferenceLm(autostego::ReferenceLm);

#[pymethods]
impl PyReferenceLm {
    #[new]
    #[pyo3(signature = (vocab, seed = 0))]
    fn new(vocab: Vec<String>, seed: u64) -> PyResult<Self> {
        Ok(PyReferenceLm(autostego::ReferenceLm::from_words(&vocab, seed).map_err(lm_err)?))
    }

    #[staticmethod]
    #[pyo3(signature = (path, seed = 0))]
    fn from_file(path: PathBuf, seed: u64) -> PyResult<Self> {
        Ok(PyReferenceLm(autostego::ReferenceLm::from_vocab_file(&path, seed).map_err(lm_err)?))
    }

    #[getter]
    fn vocab(&self) -> Vec<String> {
        self.0.vocab().iter().map(|t| t.as_str().to_owned()).collect()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed()
    }

    fn tokenize(&self, text: &str) -> PyResult<Vec<String>> {
        Ok(self.0.tokenize(text).map_err(lm_err)?.surfaces())
    }

    /// `tokens` uses `None` for masked slots. Returns `(token, prob)` pairs in
    /// canonical order.
    #[pyo3(signature = (tokens, position, min_prob = 0.0))]
    fn predict(&self, tokens: Vec<Option<String>>, position: usize, min_prob: f64) -> PyResult<Vec<(String, f64)>> {
        predict(&self.0, tokens, position, min_prob)
    }

    fn model_digest(&self) -> PyResult<String> {
        self.0.model_digest().map_err(lm_err)
    }
}

/// Client for a masked-LM inference service.
#[pyclass(name = "RemoteLm", frozen)]
struct PyRemoteLm(autostego::RemoteLm);

#[pymethods]
impl PyRemoteLm {
    #[new]
    #[pyo3(signature = (endpoint, retries = 3, expect_digest = None))]
    fn new(endpoint: String, retries: usize, expect_digest: Option<String>) -> Self {
        let mut lm = autostego::RemoteLm::new(endpoint).with_retries(retries);
        if let Some(d) = expect_digest {
            lm = lm.expect_digest(d);
        }
        PyRemoteLm(lm)
    }

    fn tokenize(&self, py: Python<'_>, text: &str) -> PyResult<Vec<String>> {
        Ok(py.detach(|| self.0.tokenize(text)).map_err(lm_err)?.surfaces())
    }

    #[pyo3(signature = (tokens, position, min_prob = 0.0))]
    fn predict(&self, tokens: Vec<Option<String>>, position: usize, min_prob: f64) -> PyResult<Vec<(String, f64)>> {
        predict(&self.0, tokens, position, min_prob)
    }

    fn probe(&self, tokens: Vec<Option<String>>, position: usize) -> PyResult<String> {
        self.0.probe(&temporary(tokens)?, position).map_err(lm_err)
    }

    fn health(&self) -> PyResult<String> {
        self.0.health().map_err(lm_err)
    }

    fn model_digest(&self) -> PyResult<String> {
        self.0.model_digest().map_err(lm_err)
    }
}

fn predict(lm: &dyn MaskedLm, tokens: Vec<Option<String>>, position: usize, min_prob: f64) -> PyResult<Vec<(String, f64)>> {
    let dist = lm.predict(&temporary(tokens)?, position, min_prob).map_err(lm_err)?;
    Ok(dist.entries().iter().map(|(t, p)| (t.as_str().to_owned(), *p)).collect())
}

#[derive(FromPyObject)]
enum AnyLm<'py> {
    Reference(PyRef<'py, PyReferenceLm>),
    Remote(PyRef<'py, PyRemoteLm>),
}

impl AnyLm<'_> {
    fn get(&self) -> &dyn MaskedLm {
        match self {
            AnyLm::Reference(r) => &r.0,
            AnyLm::Remote(r) => &r.0,
        }
    }
}

/// Shared side information: interval `f`, threshold `tp`, key, coder, mode.
#[pyclass(name = "Config", frozen)]
struct PyConfig(StegoConfig);

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (f, tp, key, coder = "consistency", mode = "auto"))]
    fn new(f: usize, tp: f64, key: &[u8], coder: &str, mode: &str) -> PyResult<Self> {
        let key = autostego::SecretKey::new(key.to_vec()).map_err(to_py)?;
        let coder: Coder = coder.parse().map_err(to_py)?;
        let mode: PredictionMode = mode.parse().map_err(to_py)?;
        Ok(PyConfig(StegoConfig::new(f, tp, key).map_err(to_py)?.with_coder(coder).with_mode(mode)))
    }

    #[getter]
    fn f(&self) -> usize {
        self.0.interval
    }

    #[getter]
    fn tp(&self) -> f64 {
        self.0.threshold
    }

    #[getter]
    fn coder(&self) -> String {
        self.0.coder.to_string()
    }

    #[getter]
    fn mode(&self) -> String {
        self.0.mode.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(f={}, tp={}, coder='{}', mode='{}')",
            self.0.interval, self.0.threshold, self.0.coder, self.0.mode
        )
    }
}

/// Stego text plus the per-position report.
#[pyclass(name = "Embedding", frozen)]
struct PyEmbedding {
    #[pyo3(get)]
    stego: String,
    #[pyo3(get)]
    annotated: String,
    #[pyo3(get)]
    bits_embedded: usize,
    #[pyo3(get)]
    padding_bits: usize,
    #[pyo3(get)]
    countable_words: usize,
    #[pyo3(get)]
    bpw: f64,
    report: EmbedReport,
}

impl From<Embedding> for PyEmbedding {
    fn from(e: Embedding) -> Self {
        PyEmbedding {
            stego: e.stego.join(),
            annotated: e.report.annotated(&e.stego),
            bits_embedded: e.report.bits_embedded,
            padding_bits: e.report.padding_bits,
            countable_words: e.report.countable_words,
            bpw: e.report.bpw,
            report: e.report,
        }
    }
}

#[pymethods]
impl PyEmbedding {
    /// One dict per masked position: index, candidates, token, code.
    #[getter]
    fn records<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.report
            .records
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("index", r.index)?;
                d.set_item("candidates", r.candidates)?;
                d.set_item("token", &r.token)?;
                d.set_item("code", &r.code)?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Embedding(bits_embedded={}, bpw={:.4})", self.bits_embedded, self.bpw)
    }
}

fn tokenize_all(lm: &dyn MaskedLm, texts: &[String]) -> PyResult<Vec<TokenSequence>> {
    texts.iter().map(|t| lm.tokenize(t).map_err(lm_err)).collect()
}

fn split_all(texts: &[String]) -> Vec<TokenSequence> {
    texts.iter().map(|t| TokenSequence::split_whitespace(t)).collect()
}

/// Hides `message` in `cover` (tokenized by `lm`).
#[pyfunction]
fn embed(cover: String, message: &[u8], config: &PyConfig, lm: AnyLm<'_>) -> PyResult<PyEmbedding> {
    let lm = lm.get();
    let cover = lm.tokenize(&cover).map_err(lm_err)?;
    let out = autostego::embed(&cover, &Bits::from_bytes(message), &config.0, lm).map_err(to_py)?;
    Ok(out.into())
}

/// Recovers the message from a space-separated stego text.
#[pyfunction]
fn extract<'py>(py: Python<'py>, stego: String, config: &PyConfig, lm: AnyLm<'_>) -> PyResult<Bound<'py, PyBytes>> {
    extract_many(py, vec![stego], config, lm)
}

#[pyfunction]
fn embed_many(covers: Vec<String>, message: &[u8], config: &PyConfig, lm: AnyLm<'_>) -> PyResult<Vec<PyEmbedding>> {
    let lm = lm.get();
    let covers = tokenize_all(lm, &covers)?;
    let out = autostego::embed_many(&covers, &Bits::from_bytes(message), &config.0, lm).map_err(to_py)?;
    Ok(out.into_iter().map(Into::into).collect())
}

#[pyfunction]
fn extract_many<'py>(py: Python<'py>, stegos: Vec<String>, config: &PyConfig, lm: AnyLm<'_>) -> PyResult<Bound<'py, PyBytes>> {
    let bits = autostego::extract_many(&split_all(&stegos), &config.0, lm.get()).map_err(to_py)?;
    let bytes = bits
        .to_bytes()
        .ok_or_else(|| StegoError::new_err(format!("{} bits is not whole bytes", bits.len())))?;
    Ok(PyBytes::new(py, &bytes))
}

/// Masked positions (0-based) for a whitespace-tokenized text.
#[pyfunction]
fn plan_masks(text: &str, f: usize, key: &[u8]) -> PyResult<Vec<usize>> {
    let key = autostego::SecretKey::new(key.to_vec()).map_err(to_py)?;
    let plan = autostego::plan_masks(&TokenSequence::split_whitespace(text), f, &key).map_err(to_py)?;
    Ok(plan.indices().to_vec())
}

#[pyfunction]
fn is_maskable(token: &str) -> bool {
    Token::new(token).is_some_and(|t| autostego::is_maskable(&t))
}

#[pyfunction]
fn payload_bpw(text: &str, bits: usize) -> PyResult<f64> {
    Ok(autostego::payload_bpw(&TokenSequence::split_whitespace(text), bits).map_err(to_py)?.bpw)
}

#[pyfunction]
fn pseudo_perplexity(text: &str, lm: AnyLm<'_>) -> PyResult<f64> {
    let ppl = autostego::pseudo_perplexity(lm.get(), &TokenSequence::split_whitespace(text)).map_err(to_py)?;
    Ok(ppl.value)
}

/// Bits are passed as strings of `0`/`1`.
#[pyfunction]
fn frame(bits: &str) -> PyResult<String> {
    Ok(frame_message(&bits_from_str(bits)?).map_err(to_py)?.to_string())
}

#[pyfunction]
fn unframe(bits: &str) -> PyResult<String> {
    Ok(unframe_message(bits_from_str(bits)?.as_slice()).map_err(to_py)?.to_string())
}

fn candidate_set(candidates: Vec<(String, f64)>) -> PyResult<CandidateSet> {
    let total: f64 = candidates.iter().map(|(_, p)| p).sum();
    let mut entries = candidates
        .into_iter()
        .map(|(t, p)| Ok((token(&t)?, p / total)))
        .collect::<PyResult<Vec<_>>>()?;
    entries.sort_by(autostego::lm::canonical_cmp);
    Ok(CandidateSet::from_normalized(entries))
}

fn codebook_pairs(book: CodeBook) -> Vec<(String, String)> {
    book.entries().iter().map(|(t, c)| (t.as_str().to_owned(), c.to_string())).collect()
}

/// Keyed Huffman code for `(token, weight)` pairs; weights are renormalized.
#[pyfunction]
fn consistency_codebook(candidates: Vec<(String, f64)>, key: &[u8], position: usize) -> PyResult<Vec<(String, String)>> {
    let key = autostego::SecretKey::new(key.to_vec()).map_err(to_py)?;
    let book = build_consistency_codebook(&candidate_set(candidates)?, &key, position).map_err(to_py)?;
    Ok(codebook_pairs(book))
}

#[pyfunction]
fn block_codebook(candidates: Vec<(String, f64)>) -> PyResult<Vec<(String, String)>> {
    let book = build_block_codebook(&candidate_set(candidates)?, 0).map_err(to_py)?;
    Ok(codebook_pairs(book))
}

#[pymodule]
fn autostego_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("StegoError", py.get_type::<StegoError>())?;
    m.add("CapacityError", py.get_type::<CapacityError>())?;
    m.add("DesyncError", py.get_type::<DesyncError>())?;
    m.add("LanguageModelError", py.get_type::<LanguageModelError>())?;
    m.add_class::<PyReferenceLm>()?;
    m.add_class::<PyRemoteLm>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyEmbedding>()?;
    m.add_function(wrap_pyfunction!(embed, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(embed_many, m)?)?;
    m.add_function(wrap_pyfunction!(extract_many, m)?)?;
    m.add_function(wrap_pyfunction!(plan_masks, m)?)?;
    m.add_function(wrap_pyfunction!(is_maskable, m)?)?;
    m.add_function(wrap_pyfunction!(payload_bpw, m)?)?;
    m.add_function(wrap_pyfunction!(pseudo_perplexity, m)?)?;
    m.add_function(wrap_pyfunction!(frame, m)?)?;
    m.add_function(wrap_pyfunction!(unframe, m)?)?;
    m.add_function(wrap_pyfunction!(consistency_codebook, m)?)?;
    m.add_function(wrap_pyfunction!(block_codebook, m)?)?;
    Ok(())
}
