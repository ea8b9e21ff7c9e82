use std::path::PathBuf;

use clap::{Parser, Subcommand};
use coachd::commands;
use coachd::server::serve;
use coachd::ServiceConfig;

#[derive(Parser)]
#[command(name = "coachd", version, about = "Peer-coaching backend: API server, log replay and analysis tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve {
        /// TOML config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `listen` from the config.
        #[arg(long)]
        listen: Option<String>,
        /// Overrides `log_path` from the config.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Replay an event log and print its state hash.
    Replay { log: PathBuf },
    /// Run a voting simulation from a JSON config.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the field-experiment replica from a JSON config.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Analyze experiment CSV data (MANOVA, ANOVA, Tukey, retention).
    Analyze {
        data: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        json: bool,
    },
    /// Print the deployment table for an event log.
    Stats {
        log: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let output = match cli.command {
        Command::Serve { config, listen, log } => {
            tracing_subscriber::fmt().with_writer(std::io::stderr).init();
            let mut cfg = match config {
                Some(path) => ServiceConfig::load(path)?,
                None => ServiceConfig::default(),
            };
            if let Some(listen) = listen {
                cfg.listen = listen;
            }
            if let Some(log) = log {
                cfg.log_path = log;
            }
            let runtime = tokio::runtime::Runtime::new()?;
            return runtime.block_on(serve(cfg));
        }
        Command::Replay { log } => commands::replay(&log)?,
        Command::Simulate { config, json } => commands::simulate(&config, json)?,
        Command::Experiment { config, json } => commands::experiment(&config, json)?,
        Command::Analyze { data, alpha, json } => commands::analyze(&data, alpha, json)?,
        Command::Stats { log, json } => commands::stats(&log, json)?,
    };
    println!("{}", output.trim_end());
    Ok(())
}
