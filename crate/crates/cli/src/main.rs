use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sciq_cli::{pipeline, service, PipelineConfig, StageSelection};

#[derive(Parser)]
#[command(name = "sciq", version, about = "Quality indicators for science news")]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "sciq.toml")]
    config: PathBuf,
    /// Overrides the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one pipeline stage, or all of them.
    Run {
        #[arg(long, default_value = "all")]
        stage: StageSelection,
    },
    /// Serve the review API (and the UI bundle, if configured).
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = PipelineConfig::load(&cli.config)
        .map_err(anyhow::Error::from)
        .and_then(|mut cfg| {
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            match cli.command {
                Command::Run { stage } => pipeline::run(stage, &cfg),
                Command::Serve { port } => tokio::runtime::Runtime::new()?.block_on(service::serve(&cfg, port)),
            }
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
