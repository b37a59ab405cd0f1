use std::io::Write;
use std::path::{Path, PathBuf};

use autostego::{
    embed_bits, embed_many, extract_many, inspect, plan_masks, pseudo_perplexity, Bits, Coder,
    EmbedReport, MaskedLm, PredictionMode, StegoError, TokenSequence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;
use crate::settings::{PayloadEncoding, Settings};

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn decode_payload(text: &str, enc: PayloadEncoding) -> Result<Bits, CliError> {
    let text: String = text.split_whitespace().collect();
    Ok(match enc {
        PayloadEncoding::Hex => Bits::from_hex(&text)?,
        PayloadEncoding::Base64 => Bits::from_base64(&text)?,
    })
}

fn encode_payload(bits: &Bits, enc: PayloadEncoding) -> Result<String, CliError> {
    let out = match enc {
        PayloadEncoding::Hex => bits.to_hex(),
        PayloadEncoding::Base64 => bits.to_base64(),
    };
    out.ok_or_else(|| CliError::Input(format!("payload of {} bits is not a whole number of bytes", bits.len())))
}

/// Stego files hold one text per non-empty line, tokens separated by spaces.
fn read_stego_texts(path: &Path) -> Result<Vec<TokenSequence>, CliError> {
    let texts: Vec<TokenSequence> = read_text(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(TokenSequence::split_whitespace)
        .collect();
    if texts.is_empty() {
        return Err(CliError::Input(format!("{}: no text", path.display())));
    }
    Ok(texts)
}

#[derive(Serialize)]
struct ConfigEcho {
    f: usize,
    tp: f64,
    coder: String,
    mode: String,
    lm: String,
    model_digest: String,
}

#[derive(Serialize)]
struct TextReport<'a> {
    #[serde(flatten)]
    report: &'a EmbedReport,
    annotated: String,
}

#[derive(Serialize)]
struct EmbedSummary<'a> {
    status: &'static str,
    config: ConfigEcho,
    message_bits: usize,
    framed_bits: usize,
    consumed_bits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    bpw: Option<f64>,
    texts: Vec<TextReport<'a>>,
}

fn config_echo(settings: &Settings, lm: &dyn MaskedLm) -> Result<ConfigEcho, CliError> {
    let lm_name = settings
        .describe()
        .into_iter()
        .find(|(k, _)| k == "lm")
        .map(|(_, v)| v)
        .unwrap_or_default();
    Ok(ConfigEcho {
        f: settings.interval,
        tp: settings.threshold,
        coder: settings.coder.to_string(),
        mode: settings.mode.to_string(),
        lm: lm_name,
        model_digest: lm.model_digest()?,
    })
}

fn write_report(path: Option<&Path>, json: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(json).map_err(|e| CliError::Input(e.to_string()))? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => Ok(()),
    }
}

pub struct EmbedArgs<'a> {
    pub covers: &'a [PathBuf],
    pub payload: &'a Path,
    pub out: Option<&'a Path>,
    pub report: Option<&'a Path>,
}

pub fn embed(settings: &Settings, args: EmbedArgs<'_>) -> Result<(), CliError> {
    settings.echo();
    let cfg = settings.stego_config()?;
    let lm = settings.build_lm()?;
    let message = decode_payload(&read_text(args.payload)?, settings.payload_enc)?;
    let covers = args
        .covers
        .iter()
        .map(|p| Ok(lm.tokenize(&read_text(p)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    let echo = config_echo(settings, lm.as_ref())?;
    if settings.verbose {
        eprintln!("model_digest = {}", echo.model_digest);
    }
    let framed_bits = message.len() + autostego::bits::HEADER_BITS;

    let embedded = match embed_many(&covers, &message, &cfg, lm.as_ref()) {
        Ok(e) => e,
        Err(StegoError::InsufficientCapacity { consumed, required }) => {
            let summary = EmbedSummary {
                status: "insufficient-capacity",
                config: echo,
                message_bits: message.len(),
                framed_bits: required,
                consumed_bits: consumed,
                bpw: None,
                texts: Vec::new(),
            };
            write_report(args.report, &summary)?;
            return Err(StegoError::InsufficientCapacity { consumed, required }.into());
        }
        Err(e) => return Err(e.into()),
    };

    let stego: String = embedded.iter().map(|e| e.stego.join() + "\n").collect();
    let words: usize = embedded.iter().map(|e| e.report.countable_words).sum();
    let consumed_bits: usize = embedded.iter().map(|e| e.report.bits_embedded).sum();
    let summary = EmbedSummary {
        status: "ok",
        config: echo,
        message_bits: message.len(),
        framed_bits,
        consumed_bits,
        bpw: (words > 0).then(|| consumed_bits as f64 / words as f64),
        texts: embedded
            .iter()
            .map(|e| TextReport {
                report: &e.report,
                annotated: e.report.annotated(&e.stego),
            })
            .collect(),
    };
    write_output(args.out, &stego)?;
    write_report(args.report, &summary)?;
    if settings.verbose {
        eprintln!("embedded {} framed bits in {} text(s)", framed_bits, embedded.len());
    }
    Ok(())
}

pub fn extract(settings: &Settings, stego: &Path, out: Option<&Path>) -> Result<(), CliError> {
    settings.echo();
    let cfg = settings.stego_config()?;
    let lm = settings.build_lm()?;
    let texts = read_stego_texts(stego)?;
    let bits = extract_many(&texts, &cfg, lm.as_ref())?;
    write_output(out, &(encode_payload(&bits, settings.payload_enc)? + "\n"))
}

pub fn inspect_cmd(settings: &Settings, text: &Path) -> Result<(), CliError> {
    settings.echo();
    let cfg = settings.stego_config()?;
    let lm = settings.build_lm()?;
    let mut out = String::new();
    for (k, t) in read_stego_texts(text)?.iter().enumerate() {
        out.push_str(&format!("# text {k}\n"));
        for view in inspect(t, &cfg, lm.as_ref())? {
            out.push_str(&format!("{view}\n"));
        }
    }
    write_output(None, &out)
}

pub struct BenchGrid {
    pub intervals: Vec<usize>,
    pub thresholds: Vec<f64>,
    pub coders: Vec<Coder>,
    pub modes: Vec<PredictionMode>,
    pub stream_bits: usize,
    pub stream_seed: u64,
    pub min_words: usize,
}

#[derive(Debug, Serialize)]
pub struct BenchRow {
    pub f: usize,
    pub tp: f64,
    pub coder: String,
    pub mode: String,
    pub texts: usize,
    pub mean_bpw: f64,
    pub mean_pseudo_ppl: f64,
}

fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    Ok(files)
}

/// Fills every masked position of each text from a long random stream and
/// averages bpw and pseudo-perplexity per grid cell.
pub fn bench(settings: &Settings, corpus: &Path, grid: &BenchGrid) -> Result<Vec<BenchRow>, CliError> {
    settings.echo();
    let key = settings.load_key()?;
    let lm = settings.build_lm()?;
    let mut texts = Vec::new();
    for path in corpus_files(corpus)? {
        let text = lm.tokenize(&read_text(&path)?)?;
        let words = text.iter().filter(|s| s.token().is_some_and(autostego::text::is_countable)).count();
        if words < grid.min_words {
            eprintln!("warning: skipping {} ({words} countable words < {})", path.display(), grid.min_words);
            continue;
        }
        texts.push(text);
    }
    if texts.is_empty() {
        return Err(CliError::Input(format!("{}: no usable texts", corpus.display())));
    }
    let streams: Vec<Bits> = (0..texts.len() as u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(grid.stream_seed.wrapping_add(i));
            Bits::from_bools((0..grid.stream_bits).map(|_| rng.random::<bool>()).collect())
        })
        .collect();

    let mut rows = Vec::new();
    for &tp in &grid.thresholds {
        for &f in &grid.intervals {
            for &coder in &grid.coders {
                for &mode in &grid.modes {
                    let cfg = autostego::StegoConfig::new(f, tp, key.clone())?
                        .with_coder(coder)
                        .with_mode(mode);
                    let (mut bpw, mut ppl) = (0.0, 0.0);
                    for (text, stream) in texts.iter().zip(&streams) {
                        let plan = plan_masks(text, f, &cfg.key)?;
                        let out = embed_bits(text, &plan, stream, &cfg, lm.as_ref())?;
                        bpw += out.report.bpw;
                        ppl += pseudo_perplexity(lm.as_ref(), &out.stego)?.value;
                    }
                    let n = texts.len() as f64;
                    rows.push(BenchRow {
                        f,
                        tp,
                        coder: coder.to_string(),
                        mode: mode.to_string(),
                        texts: texts.len(),
                        mean_bpw: bpw / n,
                        mean_pseudo_ppl: ppl / n,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn print_bench(rows: &[BenchRow], json: bool) -> Result<(), CliError> {
    let text = if json {
        serde_json::to_string_pretty(rows).map_err(|e| CliError::Input(e.to_string()))? + "\n"
    } else {
        let mut s = format!(
            "{:>3} {:>6} {:<12} {:<9} {:>5} {:>9} {:>14}\n",
            "f", "tp", "coder", "mode", "texts", "bpw", "pseudo_ppl"
        );
        for r in rows {
            s.push_str(&format!(
                "{:>3} {:>6} {:<12} {:<9} {:>5} {:>9.4} {:>14.4e}\n",
                r.f, r.tp, r.coder, r.mode, r.texts, r.mean_bpw, r.mean_pseudo_ppl
            ));
        }
        s
    };
    write_output(None, &text)
}
