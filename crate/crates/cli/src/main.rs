//! `solenoid` — command-line front end for the attractor numerics.
//!
//! Exit codes: 0 success (including honest Undetermined verdicts),
//! 1 malformed input, 2 numeric failure (unconverged or not solvable where
//! success was demanded).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;

#[derive(Debug, Parser)]
#[command(name = "solenoid", version, about = "Attractors of affine skew products on the cylinder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the subcommands that build an affine system.
#[derive(Debug, Args, Clone)]
struct SystemArgs {
    /// Base-map degree ℓ
    #[arg(long, default_value_t = 2)]
    ell: u32,
    /// Fiber contraction λ in (0, 1)
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Fiber function: path to a JSON spec or inline JSON
    #[arg(long)]
    tau: Option<String>,
    /// Sample grid size
    #[arg(long)]
    grid: Option<usize>,
    /// Sup-norm tolerance
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// RNG seed for sampling
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (defaults to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the upper and lower boundaries; writes CSV theta,rho_minus,rho_plus
    Boundaries(SystemArgs),
    /// Classify the attractor topology; writes a JSON verdict
    Classify(SystemArgs),
    /// Scan (0,1] for parameters where the attractor is a Jordan curve
    ScanJordan {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 0.02)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda_max: f64,
        #[arg(long, default_value_t = 197)]
        lambda_steps: usize,
    },
    /// Solve the cohomological equation mu∘m_ell − lambda·mu = tau
    SolveCohomology {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 64)]
        k_max: u32,
    },
    /// Canonical decomposition tau = L_{l1}∘…∘L_{lm} mu
    Decompose(SystemArgs),
    /// Periodic orbits, Birkhoff sums and coboundary witnesses
    Birkhoff {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, default_value_t = 8)]
        max_period: u32,
    },
    /// Render the attractor band or a sampled point cloud as binary PGM
    Render {
        #[command(flatten)]
        system: SystemArgs,
        /// Built-in example instead of --tau: "fat-hole"
        #[arg(long)]
        example: Option<String>,
        #[arg(long, default_value_t = 1024)]
        width: usize,
        #[arg(long, default_value_t = 512)]
        height: usize,
        /// Also scatter sampled attractor points
        #[arg(long, default_value_t = 20000)]
        points: usize,
        #[arg(long, default_value_t = 96)]
        depth: usize,
    },
    /// Example builders: fat-hole construction, log-quadratic scan
    #[command(subcommand)]
    Example(ExampleCommand),
    /// Boundaries and annulus margin for a perturbed cylinder map
    Perturbed {
        /// Map spec: path to JSON or inline JSON
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 2048)]
        grid: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the boundaries as CSV here
        #[arg(long)]
        boundaries_out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum ExampleCommand {
    /// Build the fat-hole function and verify its properties
    FatHole {
        #[arg(long, default_value_t = 0.6)]
        lambda: f64,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Skip the boundary solve and emit only the spec + parameters
        #[arg(long, default_value_t = false)]
        build_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Annulus margins for the log-quadratic family over (|c|, alpha)
    LogQuadratic {
        #[arg(long, default_value_t = 0.95)]
        lambda: f64,
        /// Moduli |c| to scan, comma-separated
        #[arg(long, default_value = "0.0,0.001,0.01", value_delimiter = ',')]
        c_mod: Vec<f64>,
        /// Argument of c in turns (single value; overrides --alpha-samples)
        #[arg(long)]
        c_arg: Option<f64>,
        #[arg(long, default_value_t = 4)]
        alpha_samples: usize,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    solenoid_core::init_threads_from_env();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            // help/version requests are not errors
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
