//! `autostego`: hide and recover bits in text with a masked language model.
//!
//! Exit codes: 0 ok, 1 I/O or input, 2 configuration, 3 insufficient
//! capacity, 4 desync or truncated stream, 5 language-model service.

mod commands;
mod error;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use autostego::{Coder, PredictionMode};
use clap::{Parser, Subcommand};

use commands::{BenchGrid, EmbedArgs};
use error::CliError;
use settings::{CommonArgs, Settings};

#[derive(Parser)]
#[command(name = "autostego", version, about = "Masked-LM linguistic steganography")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide a payload in one or more cover texts.
    Embed {
        /// Cover text files, filled in order.
        #[arg(required = true)]
        covers: Vec<PathBuf>,
        /// Payload file (hex or base64 text, see --payload-enc).
        #[arg(long, short)]
        payload: PathBuf,
        /// Stego output, one text per line. Defaults to stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// JSON report with per-position records.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Recover the payload from a stego file.
    Extract {
        stego: PathBuf,
        /// Payload output. Defaults to stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Show the candidates and codebook at every masked position.
    Inspect { text: PathBuf },
    /// Mean bpw and pseudo-perplexity over a corpus for a parameter grid.
    Bench {
        corpus: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        fs: Vec<usize>,
        /// Thresholds; defaults to --tp.
        #[arg(long, value_delimiter = ',')]
        tps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "consistency,block")]
        coders: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "auto,parallel")]
        modes: Vec<String>,
        /// Length of the random bit stream offered to each text.
        #[arg(long, default_value_t = 4096)]
        stream_bits: usize,
        #[arg(long, default_value_t = 0)]
        stream_seed: u64,
        /// Texts with fewer countable words are skipped.
        #[arg(long, default_value_t = 20)]
        min_words: usize,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let settings = Settings::resolve(&cli.common)?;
    match cli.command {
        Command::Embed {
            covers,
            payload,
            out,
            report,
        } => commands::embed(
            &settings,
            EmbedArgs {
                covers: &covers,
                payload: &payload,
                out: out.as_deref(),
                report: report.as_deref(),
            },
        ),
        Command::Extract { stego, out } => commands::extract(&settings, &stego, out.as_deref()),
        Command::Inspect { text } => commands::inspect_cmd(&settings, &text),
        Command::Bench {
            corpus,
            fs,
            tps,
            coders,
            modes,
            stream_bits,
            stream_seed,
            min_words,
            json,
        } => {
            let grid = BenchGrid {
                intervals: fs,
                thresholds: if tps.is_empty() { vec![settings.threshold] } else { tps },
                coders: coders.iter().map(|c| c.parse::<Coder>()).collect::<Result<_, _>>()?,
                modes: modes.iter().map(|m| m.parse::<PredictionMode>()).collect::<Result<_, _>>()?,
                stream_bits,
                stream_seed,
                min_words,
            };
            let rows = commands::bench(&settings, &corpus, &grid)?;
            commands::print_bench(&rows, json)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
