//! Command-line front end: power flow, fault simulation, atomic analysis and
//! SM→VSG sweeps with JSON/CSV output.

mod commands;
mod failure;
mod output;
mod render;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use atomgrid::dynamics::{DEFAULT_CLEAR_T, DEFAULT_DT, DEFAULT_DURATION, DEFAULT_FAULT_T};

pub use failure::CliError;

macro_rules! env_help {
    () => {
        "Environment:\n  ATOMGRID_NO_COLOR  disable ANSI colors in table output\n\n\
         Exit codes: 0 ok (possibly with warnings), 2 input error, 3 numerical failure, 4 internal error.\n\
         Errors are printed to stderr as JSON: {\"error\": {...}}."
    };
}

#[derive(Debug, Parser)]
#[command(name = "atomgrid", version, about = "Transient simulation and atomic analysis of mixed SM/VSG grids", after_help = env_help!())]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the AC power flow of a case.
    Powerflow(PowerflowArgs),
    /// Simulate a fault scenario and write the trajectory.
    Simulate(SimulateArgs),
    /// Simulate a scenario and build the atomic report (masses, COM, orbits).
    Analyze(AnalyzeArgs),
    /// Convert SMs to VSGs one at a time and track the center of mass.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Reference {
    /// Mean settled voltage of all SMs
    Mean,
    /// Settled voltage of the electrically nearest SM
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RadiusNet {
    Prefault,
    Postfault,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Built-in case name (ieee9, ieee39) or path to a case JSON file
    #[arg(long)]
    pub case: String,
    /// Built-in overlay name (e.g. ieee9-case2) or path to an overlay JSON file
    #[arg(long)]
    pub overlay: Option<String>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory for output files; created if missing
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Format of what is printed to stdout
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
#[command(after_help = concat!("Output: stdout gets the solution as json (default), csv or table; --out DIR also writes DIR/powerflow.json.\n\n", env_help!()))]
pub struct PowerflowArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    /// Convergence threshold on the largest mismatch, p.u.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Newton iteration limit
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
    /// Enforce generator reactive-power limits
    #[arg(long)]
    pub q_limits: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario JSON file (case, overlay, events, duration_s, dt_s); replaces the scenario flags
    #[arg(long, value_name = "FILE", conflicts_with_all = ["case", "overlay", "fault_bus", "fault_t", "clear_t", "duration", "dt"])]
    pub scenario: Option<PathBuf>,
    /// Built-in case name (ieee9, ieee39) or path to a case JSON file
    #[arg(long, required_unless_present = "scenario")]
    pub case: Option<String>,
    /// Built-in overlay name (e.g. ieee9-case2) or path to an overlay JSON file
    #[arg(long)]
    pub overlay: Option<String>,
    /// Bus for a bolted fault; omit for a run without events
    #[arg(long)]
    pub fault_bus: Option<u32>,
    /// Fault application time, s
    #[arg(long, default_value_t = DEFAULT_FAULT_T)]
    pub fault_t: f64,
    /// Fault clearing time, s
    #[arg(long, default_value_t = DEFAULT_CLEAR_T)]
    pub clear_t: f64,
    /// Simulated time, s
    #[arg(long, default_value_t = DEFAULT_DURATION)]
    pub duration: f64,
    /// Output sample interval, s
    #[arg(long, default_value_t = DEFAULT_DT)]
    pub dt: f64,
}

#[derive(Debug, Args)]
#[command(after_help = concat!("Output: without --out, stdout gets the trajectory as csv (default) or a run summary as json or table. With --out DIR, DIR/trajectory.csv, DIR/scenario.json and DIR/summary.json are written and stdout gets the summary.\n\n", env_help!()))]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(after_help = concat!("Output: stdout gets the report as json (default) or table; --out DIR also writes DIR/report.json, DIR/report.txt and DIR/scenario.json.\n\n", env_help!()))]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Size of one voltage quantum, p.u.
    #[arg(long, default_value_t = atomgrid::anatomy::DEFAULT_Q_UNIT)]
    pub q_unit: f64,
    /// Dimension of the electrical-distance embedding
    #[arg(long, default_value_t = 2)]
    pub embed_dim: usize,
    /// Length of the settling window ending at the last sample, s
    #[arg(long, default_value_t = 1.0)]
    pub settle_window: f64,
    /// Voltage the VSG gaps are measured against
    #[arg(long, value_enum, default_value_t = Reference::Mean)]
    pub reference: Reference,
    /// Network on which orbital radii are measured
    #[arg(long, value_enum, default_value_t = RadiusNet::Prefault)]
    pub radius_network: RadiusNet,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
#[command(after_help = concat!("Output: stdout gets the series as json (default), csv or table; --out DIR also writes DIR/sweep.json.\n\n", env_help!()))]
pub struct SweepArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    /// SM buses to convert to VSGs, in order (comma separated)
    #[arg(long, value_delimiter = ',', value_name = "BUS,...")]
    pub replace: Vec<u32>,
    /// Dimension of the electrical-distance embedding
    #[arg(long, default_value_t = 2)]
    pub embed_dim: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parse `args` (including the program name), run the command and return the
/// process exit code. Errors are reported on stderr as JSON.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            return report(&CliError::Usage(e.render().to_string()));
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = commands::dispatch(&cli.command, &mut out).and_then(|()| out.flush().map_err(CliError::Stdout));
    match result {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

/// Print `err` as JSON on stderr and return its exit code.
pub fn report(err: &CliError) -> i32 {
    let code = err.exit_code();
    eprintln!("{}", err.to_json());
    code
}
