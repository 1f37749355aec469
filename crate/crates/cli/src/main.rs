mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::EvalPaths;
use crate::config::RunConfig;
use crate::error::CliError;

/// Knowledge-aided reader: enrich SQuAD-style data with lexical connections,
/// train, evaluate and inspect.
#[derive(Debug, Parser)]
#[command(name = "kar", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by all subcommands. Each maps to a config key and takes
/// precedence over `KAR_<KEY>` variables and the config file.
#[derive(Debug, Args)]
struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    kappa: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Hidden size of the reader.
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true, value_name = "FILE")]
    lexicon: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    word_vectors: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    train_data: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    dev_data: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    train_enriched: Option<String>,
    #[arg(long, global = true, value_name = "FILE")]
    dev_enriched: Option<String>,
    #[arg(long, global = true, value_name = "DIR")]
    checkpoint_dir: Option<String>,
    /// Any other config key, e.g. `--set epochs=30`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Overrides {
    fn pairs(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut pairs = Vec::new();
        for item in &self.set {
            let Some((k, v)) = item.split_once('=') else {
                return Err(CliError::Config(format!("--set expects KEY=VALUE, got `{item}`")));
            };
            pairs.push((k.trim().to_owned(), v.trim().to_owned()));
        }
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                pairs.push((key.to_owned(), v));
            }
        };
        push("kappa", self.kappa.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("threads", self.threads.map(|v| v.to_string()));
        push("dim", self.dim.map(|v| v.to_string()));
        push("lexicon", self.lexicon.clone());
        push("word_vectors", self.word_vectors.clone());
        push("train_data", self.train_data.clone());
        push("dev_data", self.dev_data.clone());
        push("train_enriched", self.train_enriched.clone());
        push("dev_enriched", self.dev_enriched.clone());
        push("checkpoint_dir", self.checkpoint_dir.clone());
        Ok(pairs)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract connection tables for a dataset and print connection statistics.
    Enrich {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, value_name = "FILE")]
        output: PathBuf,
    },
    /// Train on enriched data, logging dev EM/F1 per epoch.
    Train,
    /// Score a checkpoint on an enriched dataset.
    Eval {
        /// Defaults to the best checkpoint in `checkpoint_dir`.
        #[arg(long, value_name = "FILE")]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        data: PathBuf,
        #[arg(long, value_name = "FILE")]
        enriched: PathBuf,
        /// One JSON line per example: id, text, a_s, a_e, confidence.
        #[arg(long, value_name = "FILE")]
        predictions: PathBuf,
        /// Full report with per-example scores.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// List the passage positions a word connects to, with one shortest chain each.
    Connections {
        #[arg(long)]
        word: String,
        #[arg(long)]
        passage: String,
    },
    /// Connections per word for every hop count up to `--max-kappa`.
    Stats {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        max_kappa: u32,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = RunConfig::resolve(cli.overrides.config.as_deref(), std::env::vars(), &cli.overrides.pairs()?)?;
    log::info!("resolved configuration:\n{}", config.echo().trim_end());
    match cli.command {
        Command::Enrich { input, output } => commands::enrich(&config, &input, &output),
        Command::Train => commands::train(&config),
        Command::Eval {
            checkpoint,
            data,
            enriched,
            predictions,
            report,
        } => commands::eval(
            &config,
            &EvalPaths {
                checkpoint,
                data,
                enriched,
                predictions,
                report,
            },
        ),
        Command::Connections { word, passage } => commands::connections(&config, &word, &passage),
        Command::Stats { input, max_kappa } => commands::stats(&config, &input, max_kappa),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
