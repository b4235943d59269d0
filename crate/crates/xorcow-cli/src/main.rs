//! Command-line front end for the xorcow analysis library.
//!
//! One binary, seven subcommands: point evaluation, minimum-SNR search,
//! network-size sweeps, phase-split and hop-count optimization, Monte Carlo
//! simulation, and a self-validation suite. Exit codes: 0 on success, 1
//! when a computation fails (most commonly a search bracket that does not
//! straddle the target), 2 for usage and configuration errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xorcow::Scheme;

use config::OverrideArgs;

#[derive(Parser)]
#[command(
    name = "xorcow",
    version,
    about = "Outage analysis for the XOR-CoW cooperative low-latency protocol",
    long_about = "Computes, searches and simulates the cycle failure probability of the \
                  XOR-CoW protocol and its baselines (two-hop Occupy CoW relaying and \
                  frequency-hopped repetition) on an n-client star network.\n\n\
                  Scenario flags may appear before or after the subcommand. A JSON file \
                  passed via --config supplies defaults; explicit flags beat the file, \
                  and the file beats the XORCOW_SEED environment variable."
)]
struct Cli {
    /// JSON file with the same keys as the scenario flags.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: OverrideArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cycle failure probability of the configured scheme at one SNR.
    Eval {
        /// Sub-channel count for the freqhop scheme (ignored otherwise).
        #[arg(long, default_value_t = 1)]
        hops: usize,
    },
    /// Minimum SNR (dB) meeting the target failure probability.
    MinSnr,
    /// Minimum-SNR table across network sizes and schemes (CSV/JSON/SVG).
    Sweep {
        /// Network sizes to evaluate.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1,2,3,5,7,10,15,20,30,45,60"
        )]
        n_values: Vec<usize>,
        /// Schemes to evaluate at every size.
        #[arg(
            long,
            value_delimiter = ',',
            value_parser = config::parse_scheme,
            default_value = "xorcow-fixed,xorcow-flexible,occupycow2,freqhop"
        )]
        schemes: Vec<Scheme>,
        /// Payload sizes; the whole grid is repeated for each, yielding one
        /// chart series per scheme and payload.
        #[arg(long, value_delimiter = ',', value_name = "BITS,...")]
        m_bits_list: Option<Vec<u64>>,
    },
    /// Search phase-duration splits for the lowest required SNR.
    OptimizePhases,
    /// Scan hop counts for the frequency-hopping baseline.
    Freqhop {
        /// Largest sub-channel count to consider.
        #[arg(long, default_value_t = 64)]
        k_max: usize,
    },
    /// Monte Carlo estimate of the cycle failure probability.
    Simulate,
    /// Cross-check the closed form against enumeration and simulation;
    /// exits nonzero if any check fails.
    Validate {
        /// Largest network size for the exhaustive-enumeration check.
        #[arg(long, default_value_t = 3)]
        max_n: usize,
        /// Realizations per SNR level for the per-realization checks.
        #[arg(long, default_value_t = 100_000)]
        check_trials: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match config::resolve(cli.config.as_deref(), &cli.overrides) {
        Ok(cfg) => cfg,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.command {
        Command::Eval { hops } => commands::eval(&cfg, *hops),
        Command::MinSnr => commands::min_snr_cmd(&cfg),
        Command::Sweep { n_values, schemes, m_bits_list } => {
            commands::sweep(&cfg, n_values, schemes, m_bits_list.as_deref())
        }
        Command::OptimizePhases => commands::optimize_phases(&cfg),
        Command::Freqhop { k_max } => commands::freqhop(&cfg, *k_max),
        Command::Simulate => commands::simulate(&cfg),
        Command::Validate { max_n, check_trials } => {
            commands::validate(&cfg, *max_n, *check_trials)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        // A reader that hung up mid-table (`xorcow sweep | head`) is not an
        // error worth reporting.
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        cause
            .downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
    })
}
