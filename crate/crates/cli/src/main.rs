//! `swssb`: run Brownian SYK ensembles, evaluate the large-N saddle, and
//! compare the two.

// Range guards are written `!(x >= 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod compare;
mod config;
mod error;
mod manifest;
mod plot;
mod saddle;
mod simulate;
mod steady;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{Overrides, RunConfig, REQUIRED_RUN_KEYS};
use crate::error::CliResult;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "swssb", version, about = "Strong-to-weak symmetry breaking in a Brownian SYK cluster")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a trajectory ensemble and write observable series.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the `seed` key.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the `threads` key.
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate the large-N saddle over a parameter grid.
    Saddle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Overlay a simulation on saddle predictions and write a report.
    Compare {
        /// Output directory of `simulate`.
        #[arg(long)]
        sim: PathBuf,
        /// Output directory of `saddle`.
        #[arg(long)]
        saddle: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Disorder-averaged steady state of a configuration.
    Steady {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            seed,
            threads,
            format,
        } => {
            let cfg = RunConfig::load(&config, REQUIRED_RUN_KEYS, Overrides { seed, threads })?;
            simulate::run(&cfg, &out, format)?;
        }
        Command::Saddle { config, out } => {
            let spec = saddle::GridSpec::load(&config)?;
            saddle::run(&spec, &out)?;
        }
        Command::Compare { sim, saddle, out } => {
            let report = compare::run(&sim, &saddle, &out)?;
            for c in &report.checks {
                println!("{}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
            }
        }
        Command::Steady { config, out } => {
            let cfg = RunConfig::load(&config, steady::REQUIRED_KEYS, Overrides::default())?;
            let r = steady::run(&cfg, &out)?;
            println!("S2 = {:.10} (exact {:.10}), residual {:.1e}", r.renyi2, r.renyi2_exact, r.residual);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
