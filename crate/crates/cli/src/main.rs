//! `hetassoc`: batch front end for the association-policy solver.

mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "hetassoc", version, about = "Association policies and equilibria in heterogeneous wireless networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// JSON instance description.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Offered traffic range in Erlangs, A:B:STEP (sweep).
    #[arg(long, global = true)]
    pub traffic: Option<String>,
    /// Comma-separated subset of nash,optimal,baselines,control (sweep).
    #[arg(long, global = true)]
    pub analyses: Option<String>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed for best-response restarts and for the simulator.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Turn away arrivals whose chosen system is full instead of redirecting them.
    #[arg(long = "strict-eq2", global = true)]
    pub strict: bool,
    /// Override the configured sharing scope.
    #[arg(long, global = true, value_enum)]
    pub sharing: Option<Sharing>,
    /// Rescale arrival rates to this offered load before running.
    #[arg(long, global = true)]
    pub erlangs: Option<f64>,
    /// Also write SVG charts next to the CSV files.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Sharing {
    Network,
    System,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ModeArg {
    Auto,
    Exhaustive,
    BestResponse,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SelectionArg {
    HighestUtility,
    WorstBlocking,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq)]
pub enum BaselineArg {
    PeakRate,
    InstantaneousRate,
}

#[derive(Args, Debug, Clone)]
pub struct RuleArgs {
    /// Policy as one-based system choices, labels separated by ',' and
    /// classes by ';' (for example 1,2,2;2,2,2 ...).
    #[arg(long, conflicts_with = "baseline")]
    pub policy: Option<String>,
    /// Baseline rule used when no policy is given.
    #[arg(long, value_enum)]
    pub baseline: Option<BaselineArg>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, value_enum, default_value = "auto")]
    pub mode: ModeArg,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, value_enum, default_value = "highest-utility")]
    pub selection: SelectionArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a configuration and summarize the instance.
    Validate,
    /// List the feasible states with their loads and labels.
    Enumerate,
    /// Stationary distribution and blocking under a rule.
    Steady(RuleArgs),
    /// Per-user volumes and individual utilities under a rule.
    Utility(RuleArgs),
    /// Pure Nash equilibria of the broadcast policy game.
    Nash(SearchArgs),
    /// Policy maximizing the global utility.
    Optimal {
        /// Largest policy space searched exhaustively.
        #[arg(long)]
        cap: Option<u64>,
        /// Fail instead of falling back to coordinate ascent above the cap.
        #[arg(long)]
        no_fallback: bool,
    },
    /// Peak-rate and instantaneous-rate reference rules.
    Baseline {
        #[arg(long, value_enum)]
        which: Option<BaselineArg>,
    },
    /// Thresholds minimizing equilibrium blocking.
    Control {
        #[command(flatten)]
        search: SearchArgs,
        /// Search the full threshold lattice with this step instead of the
        /// default comparison set.
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Repeat the analyses over a range of offered traffic.
    Sweep {
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        grid_step: Option<f64>,
    },
    /// Discrete-event simulation checked against the analytic solution.
    Simulate {
        #[command(flatten)]
        rule: RuleArgs,
        /// Arrival and departure events to record.
        #[arg(long, default_value_t = 1_000_000)]
        events: u64,
        #[arg(long, default_value_t = 30)]
        batches: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli.command, &cli.common) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
