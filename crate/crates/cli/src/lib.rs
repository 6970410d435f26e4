//! Command-line front end: configuration, orchestration and output files.

pub mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use eplab_core::diagnostics::{total_energy, Context, EnergyBreakdown, StateRef};
use eplab_core::experiments::{
    run_joint_sweep, run_paired, run_zem_sweep, well_prepared_init, Limit, SweepConfig, SweepResult,
};
use eplab_core::hyperbolic::{advance, SchemeConfig, Stepper, System};
use eplab_core::io::{write_energy, write_fields, write_header, write_rel_energy, write_sweep, FieldDump};
use eplab_core::verify::{run_check, Check, CheckReport, VerifySettings};
use eplab_core::{EosSpec, Mesh1D};

pub use config::{parse_config, ConfigError, RunConfig, Violation};

pub const DEFAULT_EPS_LIST: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] eplab_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Usage(_) => 2,
            Self::Io { .. } | Self::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "eplab", version, about = "Bipolar Euler-Poisson finite-volume lab")]
pub struct Cli {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve one system and write field dumps and the energy history.
    Run,
    /// Run a singular-limit sweep and fit the convergence rate.
    Sweep {
        /// Limit to approach: `zem` (electron mass to zero, delta = 1) or `joint` (delta = eps).
        #[arg(long, value_parser = parse_limit)]
        limit: Limit,
        /// Comma-separated, strictly decreasing small parameters.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_EPS_LIST)]
        eps: Vec<f64>,
    },
    /// Run verification checks; exits nonzero if any fails.
    Verify {
        /// Checks to run; all of them when omitted.
        #[arg(long = "check", value_parser = parse_check)]
        checks: Vec<Check>,
    },
}

fn parse_limit(s: &str) -> Result<Limit, String> {
    s.parse().map_err(|e: eplab_core::Error| e.to_string())
}

fn parse_check(s: &str) -> Result<Check, String> {
    s.parse().map_err(|e: eplab_core::Error| e.to_string())
}

pub fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn eos_pair(cfg: &RunConfig) -> Result<(EosSpec, EosSpec), CliError> {
    Ok((EosSpec::new(cfg.gamma1, cfg.k1)?, EosSpec::new(cfg.gamma2, cfg.k2)?))
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok((path, BufWriter::new(file)))
}

/// Creates `name` under the output directory, writes the config header, then `body`.
fn write_output(
    cfg: &RunConfig,
    command: &str,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<PathBuf, CliError> {
    let (path, mut w) = create(&cfg.output_dir, name)?;
    let mut header = vec![("command".to_string(), command.to_string())];
    header.extend(cfg.entries());
    write_header(&mut w, &header)
        .and_then(|_| body(&mut w))
        .and_then(|_| w.flush())
        .map_err(|source| CliError::Io { path: path.clone(), source })?;
    Ok(path)
}

/// Files written by `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutputs {
    pub files: Vec<PathBuf>,
    pub steps: usize,
}

pub fn run(cfg: &RunConfig) -> Result<RunOutputs, CliError> {
    let system = cfg.system.ok_or_else(|| {
        CliError::Config(ConfigError {
            violations: vec![Violation::Range {
                key: "system",
                value: "unset".into(),
                expected: "one of bep, ae, euler",
            }],
        })
    })?;
    let (e1, e2) = eos_pair(cfg)?;
    let scheme = SchemeConfig { cfl: cfg.cfl, end_time: cfg.end_time, ..SchemeConfig::default() };
    let stepper = Stepper::new(Mesh1D::new(cfg.length, cfg.ncells)?, e1, e2, scheme)?;
    let ctx = Context::from(&stepper);
    let init = well_prepared_init(&stepper.mesh, cfg.eps, cfg.delta, e1, e2, cfg.amplitude)?;

    let mut energy: Vec<(f64, EnergyBreakdown)> = Vec::new();
    let (first, last) = match system {
        System::Bep => {
            energy.push((0.0, total_energy(&ctx, StateRef::Bep(&init.plasma))));
            let first = FieldDump::from_plasma(&stepper, &init.plasma);
            let end = advance(
                init.plasma,
                cfg.ncells,
                cfg.end_time,
                |s| s.time,
                |s| stepper.compute_dt(s),
                |s, dt| stepper.step_bep(s, dt),
                |s, _| energy.push((s.time, total_energy(&ctx, StateRef::Bep(s)))),
            )?;
            (first, FieldDump::from_plasma(&stepper, &end))
        }
        System::Ae => {
            energy.push((0.0, total_energy(&ctx, StateRef::Ae(&init.ae))));
            let first = FieldDump::from_ae(&stepper, &init.ae)?;
            let end = advance(
                init.ae,
                cfg.ncells,
                cfg.end_time,
                |s| s.time,
                |s| stepper.compute_dt_ae(s),
                |s, dt| stepper.step_ae(s, dt),
                |s, _| energy.push((s.time, total_energy(&ctx, StateRef::Ae(s)))),
            )?;
            (first, FieldDump::from_ae(&stepper, &end)?)
        }
        System::Euler => {
            energy.push((0.0, total_energy(&ctx, StateRef::Euler(&init.euler))));
            let first = FieldDump::from_euler(&stepper, &init.euler)?;
            let end = advance(
                init.euler,
                cfg.ncells,
                cfg.end_time,
                |s| s.time,
                |s| stepper.compute_dt_euler(s),
                |s, dt| stepper.step_euler(s, dt),
                |s, _| energy.push((s.time, total_energy(&ctx, StateRef::Euler(s)))),
            )?;
            (first, FieldDump::from_euler(&stepper, &end)?)
        }
    };

    let mut files = vec![
        write_output(cfg, "run", "fields_initial.csv", |w| write_fields(w, &first))?,
        write_output(cfg, "run", "fields_final.csv", |w| write_fields(w, &last))?,
        write_output(cfg, "run", "energy.csv", |w| write_energy(w, &energy))?,
    ];
    if system == System::Bep {
        // relative energy against the adiabatic-electron reference from the same data
        let paired = run_paired(Limit::ZeroElectronMass, cfg.eps, cfg.delta, &sweep_config(cfg)?)?;
        files.push(write_output(cfg, "run", "relenergy.csv", |w| write_rel_energy(w, &paired.series))?);
    }
    Ok(RunOutputs { files, steps: energy.len() - 1 })
}

fn sweep_config(cfg: &RunConfig) -> Result<SweepConfig, CliError> {
    let (ion_eos, electron_eos) = eos_pair(cfg)?;
    Ok(SweepConfig {
        mesh: Mesh1D::new(cfg.length, cfg.ncells)?,
        ion_eos,
        electron_eos,
        cfl: cfg.cfl,
        end_time: cfg.end_time,
        amplitude: cfg.amplitude,
    })
}

pub fn sweep(cfg: &RunConfig, limit: Limit, eps: &[f64]) -> Result<(SweepResult, PathBuf), CliError> {
    let sc = sweep_config(cfg)?;
    let result = match limit {
        Limit::ZeroElectronMass => run_zem_sweep(eps, &sc),
        Limit::Joint => run_joint_sweep(eps, &sc),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let path = write_output(cfg, &format!("sweep --limit {limit}"), &format!("sweep_{limit}.csv"), |w| {
        write_sweep(w, &result)
    })?;
    Ok((result, path))
}

pub fn verify_settings(cfg: &RunConfig) -> Result<VerifySettings, CliError> {
    let (ion_eos, electron_eos) = eos_pair(cfg)?;
    Ok(VerifySettings { length: cfg.length, ion_eos, electron_eos, cfl: cfg.cfl, seed: cfg.seed })
}

pub fn verify(cfg: &RunConfig, checks: &[Check]) -> Result<(Vec<CheckReport>, PathBuf), CliError> {
    let settings = verify_settings(cfg)?;
    let selected: Vec<Check> = if checks.is_empty() { Check::ALL.to_vec() } else { checks.to_vec() };
    let reports = selected.iter().map(|&c| run_check(c, &settings)).collect::<Result<Vec<_>, _>>()?;
    let path = write_output(cfg, "verify", "verify.txt", |w| {
        for r in &reports {
            for m in &r.measurements {
                writeln!(w, "{}: {m}", r.check)?;
            }
        }
        Ok(())
    })?;
    Ok((reports, path))
}

/// Runs the command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let cfg = load_config(&cli)?;
    match &cli.command {
        Command::Run => {
            let out = run(&cfg)?;
            println!("{} steps", out.steps);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            Ok(0)
        }
        Command::Sweep { limit, eps } => {
            let start = Instant::now();
            let (result, path) = sweep(&cfg, *limit, eps)?;
            for e in &result.entries {
                println!(
                    "eps = {:.1e}, delta = {:.1e}: sup Phi = {:.6e}, Phi(0) = {:.6e}, {} steps, {:.2?}",
                    e.eps, e.delta, e.phi_sup, e.phi0, e.steps, e.wall_clock
                );
            }
            match result.fit {
                Some(f) => println!("slope = {:.4}, r2 = {:.4}", f.slope, f.r_squared),
                None => println!("slope undefined (fewer than two completed runs)"),
            }
            println!("wrote {} in {:.2?}", path.display(), start.elapsed());
            if let Some(f) = &result.failure {
                eprintln!("sweep aborted at eps = {:e}: {}", f.eps, f.error);
                return Ok(1);
            }
            Ok(0)
        }
        Command::Verify { checks } => {
            let (reports, path) = verify(&cfg, checks)?;
            for r in &reports {
                for m in &r.measurements {
                    println!("{}: {m}", r.check);
                }
            }
            println!("wrote {}", path.display());
            Ok(if reports.iter().all(CheckReport::passed) { 0 } else { 1 })
        }
    }
}
