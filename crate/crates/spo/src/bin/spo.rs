use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spo::cli::{self, exit_code};
use spo::config::{resolve, CliOverrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "spo",
    version,
    about = "Spectral optimization toolkit for Schrödinger potentials"
)]
struct Args {
    /// Path to the TOML run configuration.
    #[arg(long, global = true, default_value = "spo.toml")]
    config: PathBuf,

    /// Output directory (overrides [output].dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed override for optimizer and verify sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for parallel sub-runs.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Run the optimizer even when the hypothesis check fails.
    #[arg(long, global = true)]
    force: bool,

    /// Treat ratio findings above the configured constants as failures.
    #[arg(long, global = true)]
    strict: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the negative spectrum of the configured potential.
    Solve,
    /// Run the configured optimization campaign.
    Optimize,
    /// Randomized inequality-ratio sweep and hypothesis checks.
    Verify,
    /// Grid-refinement, box-growth and weak-convergence studies.
    Converge,
}

fn run(args: &Args) -> spo::Result<i32> {
    if let Some(threads) = args.threads {
        // ignore failure when a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let config = RunConfig::from_path(&args.config)?;
    let overrides = CliOverrides {
        out_dir: args.out.clone(),
        seed: args.seed,
        threads: args.threads,
        force: args.force,
        strict: args.strict,
    };
    let resolved = resolve(config, &overrides)?;

    match args.command {
        Command::Solve => {
            let summary = cli::cmd_solve(&resolved)?;
            println!(
                "solve: {} negative eigenvalue(s){}; artifacts in {}",
                summary.negative_count,
                summary
                    .lambda_min
                    .map(|l| format!(", ground state {l:.9}"))
                    .unwrap_or_default(),
                summary.out_dir.display()
            );
            Ok(0)
        }
        Command::Optimize => {
            let summary = cli::cmd_optimize(&resolved)?;
            if summary.hypothesis_waived {
                println!(
                    "note: coercivity check waived, the admissible set bounds the L^p mass itself"
                );
            }
            println!(
                "optimize[{:?}]: best objective {:.9} (spectral part {:.9}), status {:?}, {} trace rows{}; record in {}",
                summary.method,
                summary.best_objective,
                summary.best_spectral,
                summary.status,
                summary.iterations,
                if summary.ties > 1 {
                    format!(", {} tied optima", summary.ties)
                } else {
                    String::new()
                },
                summary.out_dir.display()
            );
            Ok(0)
        }
        Command::Verify => {
            let summary = cli::cmd_verify(&resolved)?;
            println!(
                "verify: {} cases, {} findings, {} above configured constants; findings.json in {}",
                summary.cases,
                summary.findings,
                summary.exceeded,
                summary.out_dir.display()
            );
            if resolved.strict && summary.exceeded > 0 {
                return Ok(1);
            }
            Ok(0)
        }
        Command::Converge => {
            let summary = cli::cmd_converge(&resolved)?;
            println!(
                "converge: {} grid levels, {} box levels, {} probe frequencies; convergence.csv in {}",
                summary.grid_levels,
                summary.box_levels,
                summary.probe_frequencies,
                summary.out_dir.display()
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
