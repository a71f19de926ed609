//! `cparticle` command-line runner: parses a scenario and its parameters,
//! runs it, writes the data files with a report and manifest, and maps the
//! outcome onto an exit code.

pub mod config;
pub mod output;
pub mod scenarios;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use config::{read_config, Resolver};
use output::{write_outputs, Format, Manifest};
use scenarios::{
    ClockPatternArgs, ContinuumArgs, Context, DoubleSlitArgs, LatticeArgs, Plan, PropagatorArgs,
    SpectralArgs,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid parameters: {0}")]
    Model(#[from] cparticle::Error),
    #[error("numerical check failed: {0}")]
    Check(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Model(_) => EXIT_CONFIG,
            CliError::Check(_) => EXIT_CHECK,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cparticle", version, about = "Clock-particle model experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parity raster and fixed-t slice of the boosted-clock pattern.
    ClockPattern(ClockPatternArgs),
    /// Binary clock pattern against the sign of the free propagator.
    PropagatorCompare(PropagatorArgs),
    /// Lorentz-filtered two-slit screen pattern and its controls.
    DoubleSlit(DoubleSlitArgs),
    /// Four-state lattice evolution with an optional Monte Carlo overlay.
    LatticeEvolve(LatticeArgs),
    /// Continuum-limit convergence studies.
    ContinuumCheck(ContinuumArgs),
    /// Transfer-matrix identities and the eigenvalue expansion.
    SpectralCheck(SpectralArgs),
    /// Re-hash the files of a finished run against its manifest.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug)]
pub struct RunSummary {
    pub out: PathBuf,
    pub manifest: Manifest,
    pub passed: bool,
}

pub const DEFAULT_SEED: u64 = 2024;

fn scenario_run(name: &str, common: &CommonArgs, plan: impl FnOnce(&mut Resolver) -> Result<Plan, CliError>) -> Result<RunSummary, CliError> {
    let file = match &common.config {
        Some(path) => read_config(path)?,
        None => Default::default(),
    };
    let mut resolver = Resolver::new(file);
    let out = PathBuf::from(resolver.take("out", common.out.clone(), format!("out/{name}"))?);
    let format = resolver.take("format", common.format, Format::Csv)?;
    let seed = resolver.take("seed", common.seed, DEFAULT_SEED)?;
    let threads = resolver.take("threads", common.threads, 0usize)?;
    let plan = plan(&mut resolver)?;
    let config = resolver.finish()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let started = Instant::now();
    let ctx = Context { format, seed };
    let outcome = pool.install(|| plan.run(&ctx))?;
    let manifest = write_outputs(&out, name, config, &outcome, started.elapsed())?;
    Ok(RunSummary {
        out,
        passed: outcome.all_passed(),
        manifest,
    })
}

pub fn execute(cli: Cli) -> Result<RunSummary, CliError> {
    match cli.command {
        Command::ClockPattern(a) => scenario_run("clock-pattern", &a.common, |r| a.plan(r)),
        Command::PropagatorCompare(a) => scenario_run("propagator-compare", &a.common, |r| a.plan(r)),
        Command::DoubleSlit(a) => scenario_run("double-slit", &a.common, |r| a.plan(r)),
        Command::LatticeEvolve(a) => scenario_run("lattice-evolve", &a.common, |r| a.plan(r)),
        Command::ContinuumCheck(a) => scenario_run("continuum-check", &a.common, |r| a.plan(r)),
        Command::SpectralCheck(a) => scenario_run("spectral-check", &a.common, |r| a.plan(r)),
        Command::Verify(a) => {
            let bad = output::verify(&a.out)?;
            if !bad.is_empty() {
                return Err(CliError::Check(format!("digest mismatch: {}", bad.join(", "))));
            }
            let manifest = output::read_manifest(&a.out)?;
            Ok(RunSummary {
                out: a.out,
                manifest,
                passed: true,
            })
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(summary) => {
            for c in &summary.manifest.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("wrote {}", summary.out.display());
            if summary.passed {
                EXIT_OK
            } else {
                EXIT_CHECK
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
