//! Command-line front end for the `hssm` library: configuration, data
//! ingestion, experiment orchestration and CSV/JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use config::{Overrides, RunConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hssm", version, about = "Hierarchical species sampling models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Overrides `sampler.seed` and `simulate.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: `output` key, else `out`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides `sampler.chains`.
    #[arg(long, global = true)]
    pub chains: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Exact pmfs, means and variances of the cluster counts over a size grid.
    PriorDist,
    /// Means and variances only.
    PriorMoments,
    /// Exact against asymptotic expected cluster counts.
    Asymptotic,
    /// Forward simulation of the restaurant franchise.
    SimulateCrf,
    /// Run the Gibbs sampler and write traces.
    Fit,
    /// Posterior predictive densities from saved traces.
    Predict,
    /// Clustering diagnostics for a trace, or over repeated synthetic runs.
    Diagnose,
}

pub fn run(cli: &Cli) -> CliResult<()> {
    let path = cli
        .common
        .config
        .as_ref()
        .ok_or_else(|| CliError::config("--config PATH is required"))?;
    let o = Overrides {
        seed: cli.common.seed,
        out: cli.common.out.clone(),
        chains: cli.common.chains,
    };
    let cfg = RunConfig::load(path, &o)?;
    commands::dispatch(cli.command, &cfg)
}
