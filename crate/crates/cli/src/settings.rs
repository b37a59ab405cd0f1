//! Effective configuration: defaults, then the config file, then flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use autostego::{Coder, MaskedLm, PredictionMode, ReferenceLm, RemoteLm, SecretKey, StegoConfig};
use clap::Args;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadEncoding {
    Hex,
    Base64,
}

impl PayloadEncoding {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "hex" => Ok(PayloadEncoding::Hex),
            "base64" => Ok(PayloadEncoding::Base64),
            other => Err(CliError::Config(format!("unknown payload encoding {other:?}"))),
        }
    }
}

impl fmt::Display for PayloadEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayloadEncoding::Hex => "hex",
            PayloadEncoding::Base64 => "base64",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LmSpec {
    Reference { vocab: PathBuf, seed: u64 },
    Remote { endpoint: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeySource {
    File(PathBuf),
    Env(String),
}

impl fmt::Display for KeySource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeySource::File(p) => write!(f, "file {}", p.display()),
            KeySource::Env(v) => write!(f, "env ${v}"),
        }
    }
}

/// Flags shared by every subcommand. All optional so that the config file
/// can supply them.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat key=value file; flags override its values.
    #[arg(long, value_name = "PATH", global = true)]
    pub config: Option<PathBuf>,
    /// Masking interval.
    #[arg(long, global = true)]
    pub f: Option<usize>,
    /// Candidate threshold.
    #[arg(long, global = true)]
    pub tp: Option<f64>,
    /// consistency | block
    #[arg(long, global = true)]
    pub coder: Option<String>,
    /// auto | parallel
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// reference | remote
    #[arg(long, global = true)]
    pub lm: Option<String>,
    #[arg(long, value_name = "URL", global = true)]
    pub endpoint: Option<String>,
    /// Vocabulary file for the reference LM, one token per line.
    #[arg(long, value_name = "PATH", global = true)]
    pub vocab: Option<PathBuf>,
    /// Seed of the reference LM.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// File holding the secret key bytes.
    #[arg(long, value_name = "PATH", global = true)]
    pub key_file: Option<PathBuf>,
    /// Name of an environment variable holding the secret key.
    #[arg(long, value_name = "VAR", global = true)]
    pub key_env: Option<String>,
    /// hex | base64
    #[arg(long, global = true)]
    pub payload_enc: Option<String>,
    /// Echo the effective configuration to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub interval: usize,
    pub threshold: f64,
    pub coder: Coder,
    pub mode: PredictionMode,
    pub lm: LmSpec,
    pub key: Option<KeySource>,
    pub payload_enc: PayloadEncoding,
    pub verbose: bool,
}

const KNOWN_KEYS: &[&str] = &[
    "f", "tp", "coder", "mode", "lm", "endpoint", "vocab", "seed", "key_file", "key_env", "payload_enc",
];

/// Parses `key = value` lines; `#` starts a comment. Dashes in keys are
/// read as underscores.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value", n + 1)))?;
        let k = k.trim().replace('-', "_");
        if !KNOWN_KEYS.contains(&k.as_str()) {
            return Err(CliError::Config(format!("config line {}: unknown key {k:?}", n + 1)));
        }
        out.insert(k, v.trim().to_owned());
    }
    Ok(out)
}

fn parsed<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Config(format!("config {key}: cannot parse {v:?}")))
        })
        .transpose()
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (parse_config_file(&text)?, base)
            }
            None => (BTreeMap::new(), PathBuf::new()),
        };
        let file_path = |key: &str| file.get(key).map(|v| base.join(v));

        let interval = args.f.or(parsed(&file, "f")?).unwrap_or(3);
        let threshold = args.tp.or(parsed(&file, "tp")?).unwrap_or(0.02);
        let coder = args
            .coder
            .clone()
            .or_else(|| file.get("coder").cloned())
            .map(|s| s.parse::<Coder>())
            .transpose()?
            .unwrap_or(Coder::Consistency);
        let mode = args
            .mode
            .clone()
            .or_else(|| file.get("mode").cloned())
            .map(|s| s.parse::<PredictionMode>())
            .transpose()?
            .unwrap_or(PredictionMode::Autoregressive);
        let payload_enc = args
            .payload_enc
            .clone()
            .or_else(|| file.get("payload_enc").cloned())
            .map(|s| PayloadEncoding::parse(&s))
            .transpose()?
            .unwrap_or(PayloadEncoding::Hex);

        let backend = args.lm.clone().or_else(|| file.get("lm").cloned());
        let lm = match backend.as_deref().unwrap_or("reference") {
            "reference" => {
                let vocab = args.vocab.clone().or_else(|| file_path("vocab")).ok_or_else(|| {
                    CliError::Config("the reference LM needs --vocab".into())
                })?;
                let seed = args.seed.or(parsed(&file, "seed")?).unwrap_or(0);
                LmSpec::Reference { vocab, seed }
            }
            "remote" => {
                let endpoint = args
                    .endpoint
                    .clone()
                    .or_else(|| file.get("endpoint").cloned())
                    .ok_or_else(|| CliError::Config("the remote LM needs --endpoint".into()))?;
                LmSpec::Remote { endpoint }
            }
            other => return Err(CliError::Config(format!("unknown LM backend {other:?}"))),
        };

        // A flag of either kind replaces whatever the file said about the key.
        let key = match (&args.key_file, &args.key_env) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("give only one of --key-file and --key-env".into()))
            }
            (Some(p), None) => Some(KeySource::File(p.clone())),
            (None, Some(v)) => Some(KeySource::Env(v.clone())),
            (None, None) => match (file_path("key_file"), file.get("key_env")) {
                (Some(_), Some(_)) => {
                    return Err(CliError::Config("config gives both key_file and key_env".into()))
                }
                (Some(p), None) => Some(KeySource::File(p)),
                (None, Some(v)) => Some(KeySource::Env(v.clone())),
                (None, None) => None,
            },
        };

        Ok(Settings {
            interval,
            threshold,
            coder,
            mode,
            lm,
            key,
            payload_enc,
            verbose: args.verbose,
        })
    }

    /// Reads the key. A single trailing newline in a key file is dropped.
    pub fn load_key(&self) -> Result<SecretKey, CliError> {
        let bytes = match &self.key {
            None => return Err(CliError::Config("no key: use --key-file or --key-env".into())),
            Some(KeySource::File(path)) => {
                let mut b = std::fs::read(path).map_err(|e| CliError::Config(format!("key file {}: {e}", path.display())))?;
                if b.last() == Some(&b'\n') {
                    b.pop();
                    if b.last() == Some(&b'\r') {
                        b.pop();
                    }
                }
                b
            }
            Some(KeySource::Env(var)) => std::env::var_os(var)
                .ok_or_else(|| CliError::Config(format!("environment variable {var} is not set")))?
                .into_encoded_bytes(),
        };
        Ok(SecretKey::new(bytes)?)
    }

    pub fn stego_config(&self) -> Result<StegoConfig, CliError> {
        Ok(StegoConfig::new(self.interval, self.threshold, self.load_key()?)?
            .with_coder(self.coder)
            .with_mode(self.mode))
    }

    pub fn build_lm(&self) -> Result<Box<dyn MaskedLm>, CliError> {
        Ok(match &self.lm {
            LmSpec::Reference { vocab, seed } => Box::new(ReferenceLm::from_vocab_file(vocab, *seed)?),
            LmSpec::Remote { endpoint } => Box::new(RemoteLm::new(endpoint.clone())),
        })
    }

    /// Key=value lines describing everything but the key bytes.
    pub fn describe(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("f".to_owned(), self.interval.to_string()),
            ("tp".to_owned(), self.threshold.to_string()),
            ("coder".to_owned(), self.coder.to_string()),
            ("mode".to_owned(), self.mode.to_string()),
        ];
        match &self.lm {
            LmSpec::Reference { vocab, seed } => {
                out.push(("lm".into(), "reference".into()));
                out.push(("vocab".into(), vocab.display().to_string()));
                out.push(("seed".into(), seed.to_string()));
            }
            LmSpec::Remote { endpoint } => {
                out.push(("lm".into(), "remote".into()));
                out.push(("endpoint".into(), endpoint.clone()));
            }
        }
        let key = self.key.as_ref().map_or_else(|| "none".to_owned(), ToString::to_string);
        out.push(("key".into(), key));
        out.push(("payload_enc".into(), self.payload_enc.to_string()));
        out
    }

    pub fn echo(&self) {
        if self.verbose {
            for (k, v) in self.describe() {
                eprintln!("{k} = {v}");
            }
        }
    }
}
