mod backend;
mod commands;
mod config;
mod failure;
mod output;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ConfigFile, Resolver};
use crate::failure::{exit_code, EXIT_CONFIG};
use crate::output::Output;

/// Green-list watermarking for token sequences, with optional entropy gating.
#[derive(Debug, Parser)]
#[command(name = "sweetmark", version, propagate_version = true)]
struct Cli {
    /// `key = value` file supplying defaults for any option.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here, with a `.meta.json` sidecar, instead of stdout.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Coloured token view on the terminal (generate, detect).
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit an n-gram model and vocabulary to a corpus.
    Train(commands::TrainArgs),
    /// Sample a continuation, watermarked unless `--no-watermark`.
    Generate(commands::GenerateArgs),
    /// Score a text for the watermark.
    Detect(commands::DetectArgs),
    /// Pick the entropy threshold from unwatermarked text.
    Calibrate(commands::CalibrateArgs),
    /// Green-probability and z-score bounds for a token sequence.
    Theory(commands::TheoryArgs),
    /// Detection and quality over a parameter grid.
    Sweep(commands::SweepArgs),
    /// Detection under identifier renaming.
    Attack(commands::AttackArgs),
    /// AUROC and TPR at a FPR cap from labelled scores.
    Roc(commands::RocArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Train(_) => "train",
            Command::Generate(_) => "generate",
            Command::Detect(_) => "detect",
            Command::Calibrate(_) => "calibrate",
            Command::Theory(_) => "theory",
            Command::Sweep(_) => "sweep",
            Command::Attack(_) => "attack",
            Command::Roc(_) => "roc",
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut r = Resolver::new(file);
    let out = Output::new(cli.out.clone(), cli.command.name());
    match &cli.command {
        Command::Train(a) => commands::train(a, &mut r, &out),
        Command::Generate(a) => commands::generate(a, &mut r, &out, cli.pretty),
        Command::Detect(a) => commands::detect_cmd(a, &mut r, &out, cli.pretty),
        Command::Calibrate(a) => commands::calibrate_cmd(a, &mut r, &out),
        Command::Theory(a) => commands::theory_cmd(a, &mut r, &out),
        Command::Sweep(a) => commands::sweep_cmd(a, &mut r, &out),
        Command::Attack(a) => commands::attack_cmd(a, &mut r, &out),
        Command::Roc(a) => commands::roc_cmd(a, &mut r, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
