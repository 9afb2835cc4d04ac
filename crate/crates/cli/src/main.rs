//! `freeburgers`: evolve measures along log-gas flows, verify the transform
//! identities, and cross-check against particle simulations.

mod commands;
mod initial;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use freeburgers::series::DEFAULT_ORDER;
use freeburgers::transforms::DEFAULT_EPS_SCHEDULE;

use manifest::{CommandKind, FamilyName, RunManifest, SdeParams, FORMAT_VERSION};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] freeburgers::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0} check(s) exceeded their tolerance")]
    ChecksFailed(usize),
}

impl CliError {
    /// 2 for numerical failures, 3 for bad input, 1 for I/O.
    fn exit_code(&self) -> u8 {
        use freeburgers::Error as E;
        match self {
            CliError::Core(
                E::SolverFailed { .. }
                | E::DomainEscape(_)
                | E::InversionFailed(_)
                | E::EvolutionFailed { .. }
                | E::StepFailed(_),
            )
            | CliError::ChecksFailed(_) => 2,
            CliError::Core(_) | CliError::Json(_) | CliError::Usage(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "freeburgers", version, about = "Hydrodynamic limits of log-gases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve an initial measure and recover the density at time t
    Evolve(RunArgs),
    /// Check the R- and S-transform identities along a flow
    Verify(RunArgs),
    /// Simulate the particle system and compare it with the limit
    Simulate(RunArgs),
    /// Re-run a saved manifest.json
    Run {
        manifest: PathBuf,
        /// Write somewhere other than the manifest's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "dyson")]
    family: FamilyName,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// dirac:b=, bernoulli:a=, semicircle:t=, mp:lambda=,t=, sym-mp:lambda=,t= or a JSON file
    #[arg(long, default_value = "dirac:b=0")]
    initial: String,
    /// Series truncation order K
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    /// Number of real grid nodes
    #[arg(long, default_value_t = 2001)]
    grid: usize,
    /// Comma-separated, strictly decreasing heights
    #[arg(long, value_delimiter = ',')]
    eps_schedule: Option<Vec<f64>>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    replicas: usize,
    #[arg(long, default_value_t = 256)]
    particles: usize,
    #[arg(long, default_value_t = 1e-4)]
    dt: f64,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Rectangularity ν of the Wishart or chiral system, overriding (λ-1)N
    #[arg(long)]
    nu: Option<f64>,
    /// Dump particle positions every this many steps
    #[arg(long)]
    trajectory: Option<usize>,
}

impl RunArgs {
    fn into_manifest(self, command: CommandKind) -> RunManifest {
        RunManifest {
            format_version: FORMAT_VERSION,
            command,
            initial: self.initial,
            out: self.out,
            family: self.family,
            lambda: self.lambda,
            t: self.t,
            order: self.order,
            grid: self.grid,
            eps_schedule: self.eps_schedule.unwrap_or_else(|| DEFAULT_EPS_SCHEDULE.to_vec()),
            sde: SdeParams {
                seed: self.seed,
                replicas: self.replicas,
                particles: self.particles,
                dt: self.dt,
                beta: self.beta,
                nu: self.nu,
                trajectory_every: self.trajectory,
            },
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FREEBURGERS_THREADS") else { return Ok(()) };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Usage(format!("FREEBURGERS_THREADS={v}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn load_manifest(path: &PathBuf, out: Option<PathBuf>) -> Result<RunManifest, CliError> {
    let mut m: RunManifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if m.format_version != FORMAT_VERSION {
        return Err(CliError::Usage(format!("manifest format {} (expected {FORMAT_VERSION})", m.format_version)));
    }
    if let Some(out) = out {
        m.out = out;
    }
    Ok(m)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|_| {
        let manifest = match cli.command {
            Command::Evolve(a) => a.into_manifest(CommandKind::Evolve),
            Command::Verify(a) => a.into_manifest(CommandKind::Verify),
            Command::Simulate(a) => a.into_manifest(CommandKind::Simulate),
            Command::Run { manifest, out } => load_manifest(&manifest, out)?,
        };
        commands::dispatch(&manifest)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
