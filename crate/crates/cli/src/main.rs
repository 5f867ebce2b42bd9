mod commands;
mod config;
mod report;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use lcslab_core::ContactModel;

use crate::commands::Ctx;
use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::report::{Artifacts, Checks, ReportEnvelope};

#[derive(Parser)]
#[command(name = "lcslab", version, about = "Numerical checks for lcs instantons on model contact manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the report and artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Contact frame axioms at random points.
    VerifyFrames(Common),
    /// Explicit family: residual, energy and charges.
    Example(Common),
    /// Energy breakdown of an explicit family.
    Energy(Common),
    /// Harmonic decomposition of a closed one-form.
    Decompose(Common),
    /// End and slice charges of a cylinder family.
    Charges(Common),
    /// Closed Reeb orbits from perturbed seeds.
    Orbits(Common),
    /// Conley-Zehnder index of a rotation or orbit path.
    Cz(Common),
    /// Action spectrum and asymptotic operator gap.
    Spectrum(Common),
    /// Fredholm index formulas.
    Index(Common),
    /// Gauss-Newton solve from a perturbed family, then classification.
    Solve(Common),
    /// Analytic against finite-difference linearization.
    LinearizeCheck(Common),
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::VerifyFrames(c) => ("verify-frames", c),
            Command::Example(c) => ("example", c),
            Command::Energy(c) => ("energy", c),
            Command::Decompose(c) => ("decompose", c),
            Command::Charges(c) => ("charges", c),
            Command::Orbits(c) => ("orbits", c),
            Command::Cz(c) => ("cz", c),
            Command::Spectrum(c) => ("spectrum", c),
            Command::Index(c) => ("index", c),
            Command::Solve(c) => ("solve", c),
            Command::LinearizeCheck(c) => ("linearize-check", c),
        }
    }
}

/// Runs one command and writes its report. Returns whether all checks passed.
fn run(command: &str, args: &Common) -> Result<bool> {
    let cfg = RunConfig::load(&args.config)?;
    let mut checks = Checks::new(&commands::tolerances(command, &cfg)?, &cfg.tolerances)?;
    let model = ContactModel::new(cfg.model)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let out = args.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("lcslab-out"));
    let mut art = Artifacts::new(&out, command)?;
    let start = Instant::now();
    let ctx = Ctx { cfg: &cfg, model, seed };
    let results = commands::run(command, &ctx, &mut checks, &mut art)?;
    let pass = checks.all_pass();
    let envelope = ReportEnvelope {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        seed,
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        results,
        checks: checks.list,
        pass,
        artifacts: art.written.clone(),
    };
    let path = art.report(&envelope)?;
    for c in &envelope.checks {
        println!(
            "{} {:<24} value {:.6e} {:?} tolerance {:.3e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.comparison,
            c.tolerance
        );
    }
    println!("report {}", display(&path));
    Ok(pass)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.split();
    debug_assert!(commands::COMMANDS.contains(&name));
    match run(name, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
