//! `unison`: run, verify, sweep and simulate.
//!
//! Exit codes: 0 ok, 1 invariant violation, 2 bound violation, 3 bad input.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "unison", version, about = "Self-stabilizing asynchronous unison: simulator and trace verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one execution and write its trace.
    Run(RunArgs),
    /// Replay a trace and check every invariant and bound.
    Verify(VerifyArgs),
    /// Run and verify a campaign of executions.
    Sweep(SweepArgs),
    /// Run a synchronous algorithm on top of the unison clocks.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ExecArgs {
    /// `file:PATH` or `gen:KIND:PARAMS` (path:N, ring:N, star:N, complete:N, grid:RxC, random:N:M).
    #[arg(long)]
    pub graph: String,
    /// Clock period, or `auto` for max(4, 2D + 2).
    #[arg(long = "B", default_value = "auto")]
    pub period: String,
    /// `random`, `clean-uniform:C`, `all-error-floor` or `file:PATH`.
    #[arg(long, default_value = "random")]
    pub init: String,
    /// `sync`, `central-random`, `dist-random:P` or `scripted:0,1|2|...`.
    #[arg(long, default_value = "dist-random:0.5")]
    pub daemon: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `terminal`, `clean` or `never`.
    #[arg(long = "stop-on", default_value = "terminal")]
    pub stop_on: String,
    #[arg(long = "max-steps", default_value_t = 10_000)]
    pub max_steps: usize,
    /// Extra steps after the stop condition first holds.
    #[arg(long, default_value_t = 0)]
    pub linger: usize,
    /// Trace output path.
    #[arg(long, default_value = "trace.jsonl")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub exec: ExecArgs,
    /// `P_aux`: `true` (greedy) or `false`.
    #[arg(long, default_value = "true")]
    pub paux: String,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub trace: PathBuf,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Comma-separated graph families (path, ring, star, complete, random).
    #[arg(long, default_value = "path,ring,star,random")]
    pub families: String,
    #[arg(long = "n-min", default_value_t = 4)]
    pub n_min: usize,
    #[arg(long = "n-max", default_value_t = 8)]
    pub n_max: usize,
    /// Semicolon-separated daemon descriptors.
    #[arg(long, default_value = "sync;central-random;dist-random:0.5")]
    pub daemons: String,
    /// Seeds per (family, n, daemon) cell.
    #[arg(long, default_value_t = 500)]
    pub seeds: usize,
    #[arg(long = "base-seed", default_value_t = 0)]
    pub base_seed: u64,
    #[arg(long = "B", default_value = "auto")]
    pub period: String,
    /// Explore every configuration and daemon choice on graphs with at most
    /// `--exhaustive-n` nodes.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long = "exhaustive-n", default_value_t = 3)]
    pub exhaustive_n: usize,
    /// Depth of the path enumeration on graphs with at most two nodes.
    #[arg(long, default_value_t = 20)]
    pub depth: usize,
    /// Corrupt every trace before verifying it (negative control).
    #[arg(long = "inject-fault")]
    pub inject_fault: bool,
    /// Observational CSV of (n, B, D, moves, rounds to clean).
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Run cells one after another.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub exec: ExecArgs,
    /// `min-prop` or `min-id-bfs`.
    #[arg(long)]
    pub alg: String,
    /// `greedy` or `lazy`.
    #[arg(long, default_value = "lazy")]
    pub mode: String,
    /// Initial min-prop values, comma-separated (old = curr). Random when absent.
    #[arg(long)]
    pub values: Option<String>,
    /// min-id-bfs identifiers, comma-separated (old = curr = own leader).
    /// Identifiers p + 1 with random leader and distance when absent.
    #[arg(long)]
    pub ids: Option<String>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Usage errors are input errors (3), not clap's default 2.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 3 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(a) => commands::run(a),
        Command::Verify(a) => commands::verify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}
