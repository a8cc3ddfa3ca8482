use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qos_offload::cli::config::{load_config, parse_override, Entry, RunConfig};
use qos_offload::cli::run;
use qos_offload::Error;

/// Simulate QoS-aware proactive task offloading in edge node ecosystems.
#[derive(Debug, Parser)]
#[command(name = "qos-offload", version)]
struct Args {
    /// Configuration file with `key = value` lines.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Setting that overrides the configuration file, e.g. `--set n_nodes=50`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory for results.
    #[arg(long, short, default_value = "out", global = true)]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one campaign of the configured policy.
    Simulate,
    /// Train the DoE network on the rule dataset and save it.
    TrainDoe {
        /// Model file; defaults to `<out>/doe_model.txt`.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run the model against every baseline and ceiling over the node grid.
    Compare,
    /// Rewrite the CSV files of an earlier run.
    Export {
        /// Directory holding `results.json`; defaults to the output directory.
        #[arg(long)]
        from: Option<PathBuf>,
    },
}

fn config(args: &Args) -> Result<RunConfig, Error> {
    let overrides = args
        .overrides
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<Entry>, _>>()?;
    let cfg = load_config(args.config.as_deref(), &overrides)?;
    for w in cfg.warnings() {
        log::warn!("{w}");
    }
    Ok(cfg)
}

fn execute(args: &Args) -> Result<(), Error> {
    match &args.command {
        Command::Simulate | Command::Compare => {
            let cfg = config(args)?;
            let doc = if matches!(args.command, Command::Simulate) {
                run::simulate(&cfg)?
            } else {
                run::compare(&cfg)?
            };
            for path in doc.write(&args.out)? {
                println!("wrote {}", path.display());
            }
        }
        Command::TrainDoe { model } => {
            let cfg = config(args)?;
            let path = model.clone().unwrap_or_else(|| args.out.join("doe_model.txt"));
            let report = run::train_doe(&cfg, &path)?;
            println!(
                "train MSE {:.6}, hold-out MSE {:.6}; wrote {}",
                report.train_mse,
                report.holdout_mse,
                path.display()
            );
        }
        Command::Export { from } => {
            let from = from.clone().unwrap_or_else(|| args.out.clone());
            let doc = run::export(&from, &args.out)?;
            println!("exported {} rows to {}", doc.rows.len(), args.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
