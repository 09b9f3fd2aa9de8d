use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gaussian_sectors::experiment::{run, Experiment, ExperimentConfig, Format};
use gaussian_sectors::realquad::Solver;
use gaussian_sectors::sectors::ExpectedMode;
use gaussian_sectors::smoothed::Variant;
use gaussian_sectors::Error;

/// Prime ideals of Z[i] in narrow sectors: counts, variances and Weyl sums.
///
/// Set RAYON_NUM_THREADS to control parallelism; results do not depend on it.
#[derive(Parser)]
#[command(name = "gsectors", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output path without extension.
    #[arg(long, global = true, default_value = "gsectors_out")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Empirical,
    Pit,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Powers,
    Primes,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    BruteForce,
    Fast,
}

#[derive(Subcommand)]
enum Command {
    /// List the prime ideals with norm in (norm-min, norm-max].
    Sieve {
        #[arg(long, default_value_t = 0)]
        norm_min: u64,
        #[arg(long)]
        norm_max: u64,
    },
    /// Count ideals with norm in (X, 2X] over a grid of sectors of width X^-rho.
    Sectors {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Threshold for the exceptional fraction; repeatable.
        #[arg(long = "delta", default_values_t = [0.5])]
        deltas: Vec<f64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Empirical)]
        mode: ModeArg,
        /// Count ramified and inert ideals as well as split ones.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        include_nonsplit: bool,
    },
    /// Number variance of the smoothed sector count over an X by tau grid.
    Variance {
        #[arg(long = "x-list", value_delimiter = ',', required = true)]
        xs: Vec<f64>,
        #[arg(long = "tau", value_delimiter = ',', required = true)]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 4)]
        grid_factor: usize,
        #[arg(long, value_enum, default_value_t = VariantArg::Powers)]
        variant: VariantArg,
    },
    /// Weyl sums of the angle characters over norms in (X, 2X].
    Weyl {
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 10)]
        kmax: u32,
    },
    /// Prime ideals of Z[sqrt 2] and their Weyl sums.
    Realquad {
        #[arg(long)]
        limit: u64,
        #[arg(long, default_value_t = 10)]
        kmax: u32,
        #[arg(long, value_enum, default_value_t = SolverArg::BruteForce)]
        solver: SolverArg,
    },
    /// Smallest nonzero angle up to norm-max against the bound 1/(2 sqrt(norm-max)).
    Forbidden {
        #[arg(long)]
        norm_max: u64,
    },
}

fn experiment(cmd: Command) -> Experiment {
    match cmd {
        Command::Sieve { norm_min, norm_max } => Experiment::Sieve { norm_min, norm_max },
        Command::Sectors { x, rho, grid, deltas, mode, include_nonsplit } => Experiment::Sectors {
            x,
            rho,
            grid_size: grid,
            deltas,
            mode: match mode {
                ModeArg::Empirical => ExpectedMode::Empirical,
                ModeArg::Pit => ExpectedMode::Pit,
            },
            include_nonsplit,
        },
        Command::Variance { xs, taus, eps, grid_factor, variant } => Experiment::Variance {
            xs,
            taus,
            eps,
            grid_factor,
            variant: match variant {
                VariantArg::Powers => Variant::Powers,
                VariantArg::Primes => Variant::Primes,
            },
        },
        Command::Weyl { x, kmax } => Experiment::Weyl { x, k_max: kmax },
        Command::Realquad { limit, kmax, solver } => Experiment::Realquad {
            limit,
            k_max: kmax,
            solver: match solver {
                SolverArg::BruteForce => Solver::BruteForce,
                SolverArg::Fast => Solver::Fast,
            },
        },
        Command::Forbidden { norm_max } => Experiment::Forbidden { norm_max },
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = ExperimentConfig {
        experiment: experiment(cli.command),
        output: cli.out,
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
    };
    match run(&config) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("gsectors: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
