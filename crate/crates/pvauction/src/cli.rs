//! Command-line interface.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, Context};
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "pvauction", version, about = "PV auction clearing, register linkage and analysis")]
pub struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for `synth`, overriding the configured one
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Developer size threshold for the small-developer flag
    #[arg(long, global = true)]
    pub small_threshold_kw: Option<u64>,
    /// CSV of postal prefixes to states, for unit rows without a state
    #[arg(long, global = true)]
    pub state_map: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clear the auctions of a bid file
    Simulate {
        #[arg(long)]
        bids: PathBuf,
    },
    /// Generate a synthetic register directory with ground truth
    Synth,
    /// Identify projects, attach payments and reconstruct bid values
    Link {
        /// Register directory
        #[arg(long)]
        input: PathBuf,
        /// Directory with ground_truth.csv; writes oracle_diff.csv
        #[arg(long)]
        ground_truth: Option<PathBuf>,
    },
    /// Metrics, aggregates, hypothesis tests and regression
    Analyze {
        /// Register directory (auction results and cost index)
        #[arg(long)]
        registers: PathBuf,
        /// Output directory of `link`
        #[arg(long)]
        linkage: PathBuf,
    },
    /// Compare reconstructed with published weighted-average bids
    Validate {
        #[arg(long)]
        linkage: PathBuf,
        /// CSV with auction_index,weighted_avg_bid
        #[arg(long)]
        published: PathBuf,
        /// Flag gaps above this many ct/kWh
        #[arg(long)]
        bound: Option<f64>,
    },
    /// Collect tabular outputs into summary.json
    Report {
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
    },
}

pub fn run(cli: Cli) -> anyhow::Result<RunManifest> {
    let ctx = Context::new(cli.config, cli.out, cli.seed, cli.small_threshold_kw.map(|kw| kw as f64), cli.state_map)?;
    match cli.command {
        Command::Simulate { bids } => commands::simulate(&ctx, &bids),
        Command::Synth => commands::synth(&ctx),
        Command::Link { input, ground_truth } => commands::link(&ctx, &input, ground_truth.as_deref()),
        Command::Analyze { registers, linkage } => commands::analyze(&ctx, &registers, &linkage),
        Command::Validate { linkage, published, bound } => commands::validate(&ctx, &linkage, &published, bound),
        Command::Report { input } => commands::report(&ctx, &input),
    }
}
