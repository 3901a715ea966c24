//! `npsp`: experiment harness for the deceptive-maze plasticity laboratory.

mod commands;
mod config;
mod output;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{CommonArgs, Settings};

#[derive(Parser)]
#[command(name = "npsp", about = "Deceptive-maze neuroevolution experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trial matrix per algorithm and tabulate medians
    Compare(CommonArgs),
    /// Evolve plasticity rules and export the trend
    Evolve(CommonArgs),
    /// Per-cell median sweeps over the first room with an evolved rule
    Heatmap(CommonArgs),
    /// Run a single trial and log every episode
    Trial(CommonArgs),
    /// Export a map's goal-distance field as CSV and graymap
    Distfield(CommonArgs),
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (args, run): (&CommonArgs, fn(&Settings) -> Result<()>) = match &cli.command {
        Command::Compare(a) => (a, commands::compare),
        Command::Evolve(a) => (a, commands::evolve),
        Command::Heatmap(a) => (a, commands::heatmap),
        Command::Trial(a) => (a, commands::trial),
        Command::Distfield(a) => (a, commands::distfield),
    };
    let settings = Settings::resolve(args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()?;
    pool.install(|| run(&settings))
}
