//! `pano` — command-line front end for the panorama-synthesis library.
//!
//! One binary, subcommand style. Every operation parameter lives in a JSON
//! job config (all fields defaulted, unknown keys rejected); command-line
//! flags override the file. All randomness sits behind a single `--seed`,
//! so a job is reproducible from its config alone.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::JobConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pano",
    version,
    about = "Synthesize and evaluate panoramic segmentation datasets",
    after_help = "Exit codes: 0 success, 2 configuration, 3 I/O, 4 processing."
)]
struct Cli {
    /// Job config JSON file (every field optional; flags override it)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Seed for every random draw (overrides the config)
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Worker threads for batch commands (overrides the config)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Print the resolved plan without writing anything
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Warp a planar image (or a directory of them) onto the cylinder
    Project(commands::project::ProjectArgs),
    /// Measure the inter-view distance between two adjacent planar views
    Match(commands::matching::MatchArgs),
    /// Stitch one frame's four planar views into a 360° panorama
    Stitch(commands::stitch::StitchArgs),
    /// Generate a panoramic dataset from a tree of sequences
    Dataset(commands::dataset::DatasetArgs),
    /// Re-render planar views at several focal lengths (distortion series)
    Distort(commands::distort::DistortArgs),
    /// Score predicted label maps against ground truth, by filename
    Eval(commands::eval::EvalArgs),
    /// Compute median-frequency class weights over a directory of labels
    Weights(commands::weights::WeightsArgs),
}

/// Everything a command needs besides its own arguments.
pub struct Ctx {
    pub config: JobConfig,
    pub dry_run: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = match &cli.config {
        Some(path) => JobConfig::load(path)?,
        None => JobConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = Some(jobs);
    }
    if let Some(jobs) = config.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::config(format!("worker pool: {e}")))?;
    }

    let ctx = Ctx {
        config,
        dry_run: cli.dry_run,
    };
    match &cli.command {
        Command::Project(args) => commands::project::run(args, &ctx),
        Command::Match(args) => commands::matching::run(args, &ctx),
        Command::Stitch(args) => commands::stitch::run(args, &ctx),
        Command::Dataset(args) => commands::dataset::run(args, &ctx),
        Command::Distort(args) => commands::distort::run(args, &ctx),
        Command::Eval(args) => commands::eval::run(args, &ctx),
        Command::Weights(args) => commands::weights::run(args, &ctx),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_parse_after_the_subcommand() {
        let cli = Cli::parse_from(["pano", "weights", "some/dir", "--seed", "7", "--dry-run"]);
        assert_eq!(cli.seed, Some(7));
        assert!(cli.dry_run);
    }
}
