//! Command-line driver: mesh tools, BDF angle table, experiment runs and
//! resolvent probes. Exit status is 0 when every verdict passes, 1 when a
//! verdict fails or a computation breaks, 2 for usage and config errors.

pub mod commands;
pub mod config;
pub mod probe;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "maxreg", version, about = "Finite element / BDF laboratory for discrete maximal regularity")]
pub struct Cli {
    /// Worker threads for parallel sections (default: available parallelism).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DomainArg {
    Square,
    Lshape,
}

#[derive(Debug, Subcommand)]
pub enum MeshCommand {
    /// Generate a uniform mesh.
    Gen {
        #[arg(long, value_enum, default_value = "square")]
        domain: DomainArg,
        /// Cells per unit length.
        #[arg(long, default_value_t = 8)]
        n: usize,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Refine a mesh uniformly; each level quadruples the triangle count.
    Refine {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        levels: usize,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a mesh file and print its size and shape statistics.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mesh generation, refinement and validation.
    #[command(subcommand)]
    Mesh(MeshCommand),
    /// Print BDF-1..6 coefficients and A(alpha) angles.
    BdfAngles {
        /// Unit-circle samples before refinement.
        #[arg(long, default_value_t = maxreg_core::bdf::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Run the experiment described by a config file and write CSV + JSON reports.
    #[command(after_long_help = config::keys_help())]
    Run {
        config: PathBuf,
        /// Print the cell grid without solving.
        #[arg(long)]
        dry_run: bool,
        /// Override the config's out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run resolvent sector sweeps and R-bound samples described by a config file.
    #[command(after_long_help = config::keys_help())]
    Probe {
        config: PathBuf,
        /// Override the config's out_dir.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}
