//! `suction`: generate, annotate, train, predict and evaluate.

mod commands;
mod config;
mod dataset;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{annotate, eval, gen, predict, train};

#[derive(Parser)]
#[command(
    name = "suction",
    about = "Suction-grasp dataset and diffusion scorer",
    disable_version_flag = true
)]
struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON file with per-command sections; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the program and file-format versions.
    #[arg(long, short = 'V')]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate cluttered scenes with rendered point clouds.
    Gen(gen::Args),
    /// Score sampled points of every scene.
    Annotate(annotate::Args),
    /// Fit the denoiser on an annotated dataset.
    Train(train::Args),
    /// Sample per-point scores with a trained model.
    Predict(predict::Args),
    /// Average precision of a model and/or the normal-deviation baseline.
    Eval(eval::Args),
}

fn print_version() {
    println!("suction {}", env!("CARGO_PKG_VERSION"));
    for (file, schema) in suction_core::formats::schema_versions() {
        println!("{file:<12} {schema}");
    }
    for (file, schema) in commands::MANIFEST_SCHEMAS {
        println!("{file:<12} {schema}");
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if cli.version {
        print_version();
        return Ok(());
    }
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    let file = config::load(cli.config.as_deref())?;
    match cli.command {
        Some(Command::Gen(a)) => gen::run(a, &file),
        Some(Command::Annotate(a)) => annotate::run(a, &file),
        Some(Command::Train(a)) => train::run(a, &file),
        Some(Command::Predict(a)) => predict::run(a, &file),
        Some(Command::Eval(a)) => eval::run(a, &file),
        None => anyhow::bail!("no command given; see --help"),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::exit_code(&e))
        }
    }
}
