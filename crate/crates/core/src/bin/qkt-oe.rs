use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qkt_oe::ensemble::worker_pool;
use qkt_oe::experiments::config::parse_assignment;
use qkt_oe::experiments::{run, Experiment, RunConfig};
use qkt_oe::Error;

/// Observational entropy and OTOC experiments on the quantum kicked top.
#[derive(Parser)]
#[command(name = "qkt-oe", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its tables to a directory.
    Run {
        experiment: String,
        /// Flat `key = value` config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a config value; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the available experiments.
    List,
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<22} {}", e.name(), e.description());
            }
            Ok(())
        }
        Command::Run { experiment, config, set, out } => {
            let experiment: Experiment = experiment.parse()?;
            let text = match &config {
                Some(path) => std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?,
                None => String::new(),
            };
            let overrides = set.iter().map(|s| parse_assignment(s)).collect::<Result<Vec<_>, _>>()?;
            let cfg = RunConfig::parse(experiment, &text, &overrides)?;
            let output = worker_pool()?.install(|| run(&cfg))?;
            for path in output.write(&out, cfg.format)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qkt-oe: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
