use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use storyscope::config::ExperimentConfig;
use storyscope::pipeline::{self, Stage};
use storyscope::Error;

/// Corpus analytics for contrasting collections of personal narratives.
#[derive(Parser)]
#[command(name = "storyscope", version, about)]
struct Cli {
    /// Experiment configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<i64>,

    /// Override the configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest and sample the corpora; write them back as JSONL plus an
    /// ingestion report.
    Ingest,
    /// Document-length statistics per label.
    Stats,
    /// Cross-validated genre classification and indicative features.
    Classify,
    /// Fit the topic model; dump topics, annotations, and model state.
    Topics,
    /// Significance-tested topic contrast between the two labels.
    Contrast,
    /// Discourse-connective frequency profiles.
    Markers,
    /// Entity-grid coherence discrimination test.
    Egrid,
    /// Run several stages in dependency order (default: all).
    RunAll {
        /// Comma-separated subset of stats,classify,topics,contrast,markers,egrid.
        #[arg(long)]
        stages: Option<String>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let config_path = cli
        .config
        .ok_or_else(|| Error::Config(vec!["--config is required".into()]))?;
    let mut config = ExperimentConfig::load(&config_path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.out {
        config.out_dir = out;
    }

    let stages: Vec<Stage> = match &cli.command {
        Command::Ingest => {
            let summary = pipeline::run_ingest(&config)?;
            for path in summary.reports {
                println!("{}", path.display());
            }
            return Ok(());
        }
        Command::Stats => vec![Stage::Stats],
        Command::Classify => vec![Stage::Classify],
        Command::Topics => vec![Stage::Topics],
        Command::Contrast => vec![Stage::Contrast],
        Command::Markers => vec![Stage::Markers],
        Command::Egrid => vec![Stage::Egrid],
        Command::RunAll { stages } => match stages {
            None => Stage::ALL.to_vec(),
            Some(list) => {
                let mut parsed = Vec::new();
                for name in list.split(',').filter(|s| !s.trim().is_empty()) {
                    match Stage::parse(name) {
                        Some(stage) => parsed.push(stage),
                        None => {
                            return Err(Error::Config(vec![format!(
                                "unknown stage {name:?}; expected one of \
                                 stats,classify,topics,contrast,markers,egrid"
                            )]));
                        }
                    }
                }
                if parsed.is_empty() {
                    return Err(Error::Config(vec!["--stages selected nothing".into()]));
                }
                parsed
            }
        },
    };

    let summary = pipeline::run(&config, &stages)?;
    for path in summary.reports {
        println!("{}", path.display());
    }
    Ok(())
}
