use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use selftweet_cli::{run, Command, Overrides, PipelineConfig};

/// Link scholarly authors to social-media accounts that share their papers.
#[derive(Parser, Debug)]
#[command(name = "selftweet", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Flat `key = value` configuration file.
    #[arg(long, global = true, env = "SELFTWEET_CONFIG")]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "SELFTWEET_OUT")]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, env = "SELFTWEET_WORKERS")]
    workers: Option<usize>,

    /// Skip a matching step (1-9). Repeatable.
    #[arg(
        long = "disable-step",
        global = true,
        env = "SELFTWEET_DISABLE_STEP",
        value_delimiter = ','
    )]
    disable_step: Vec<u8>,

    /// Countries listed before the rest are pooled.
    #[arg(long, global = true, env = "SELFTWEET_TOP_COUNTRIES")]
    top_countries: Option<usize>,

    /// Seed for the synthetic generator.
    #[arg(long, global = true, env = "SELFTWEET_SEED")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Load and validate the input files.
    Ingest,
    /// Ingest, generate candidates and run the matching hierarchy.
    Match,
    /// Match, then score against the golden set.
    Evaluate,
    /// Every table and summary.
    Report,
    /// Write a synthetic corpus with planted pairs.
    Synth,
    /// Compare the pipeline with the brute-force matcher on a synthetic corpus.
    OracleCheck,
    /// ingest, match, evaluate and report.
    All,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Ingest => Command::Ingest,
            Cmd::Match => Command::Match,
            Cmd::Evaluate => Command::Evaluate,
            Cmd::Report => Command::Report,
            Cmd::Synth => Command::Synth,
            Cmd::OracleCheck => Command::OracleCheck,
            Cmd::All => Command::All,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        out: cli.out,
        workers: cli.workers,
        disable_steps: cli.disable_step,
        top_countries: cli.top_countries,
        seed: cli.seed,
    };
    let result = PipelineConfig::resolve(cli.config.as_deref(), &overrides)
        .and_then(|config| run(cli.command.into(), &config, &mut std::io::stdout()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("selftweet: {} error: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
