//! `lambda-sim`: steady states, dressed populations, fluorescence spectra and
//! trajectory checks for a Λ atom in a coherent plus stochastic field.

mod config;
mod error;
mod presets;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Job, Settings, Task};
use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "lambda-sim", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    task: Option<Command>,

    /// Rabi frequency Ω (MHz)
    #[arg(long, global = true)]
    omega: Option<String>,
    /// Single-photon detuning Δ (MHz)
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Excited-state decay rate γ (default 1)
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Ground-state decoherence rate (default 1e-3)
    #[arg(long, global = true)]
    gamma_sg: Option<String>,
    /// Stochastic-field strength D (default 0)
    #[arg(long, global = true)]
    dd: Option<String>,
    /// Stochastic-field bandwidth κ (default 60)
    #[arg(long, global = true)]
    kappa: Option<String>,
    /// Stochastic-field offset η = ω_s − ω_L (default 0)
    #[arg(long, global = true)]
    eta: Option<String>,
    /// Squared dipole moment (default 1)
    #[arg(long, global = true)]
    mu_sq: Option<String>,
    /// Sweep one of eta, dd, delta, omega
    #[arg(long, global = true, value_name = "VAR:MIN:MAX:N", allow_hyphen_values = true)]
    sweep: Option<String>,
    /// Spectrum frequency grid
    #[arg(long, global = true, value_name = "MIN:MAX:N", allow_hyphen_values = true)]
    grid: Option<String>,
    /// Number of trajectories (oracle)
    #[arg(long, global = true)]
    n_traj: Option<String>,
    /// Integration end time in µs (oracle, default 30/γ)
    #[arg(long, global = true)]
    t_end: Option<String>,
    /// Time step in µs (oracle, default 2e-4)
    #[arg(long, global = true)]
    dt: Option<String>,
    /// Base seed for random streams
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Worker threads (falls back to LAMBDA_SIM_THREADS)
    #[arg(long, global = true)]
    threads: Option<String>,
    /// Output file, or directory for presets
    #[arg(long, global = true)]
    out: Option<String>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Canned figure family
    #[arg(long, global = true)]
    preset: Option<String>,
    /// key = value or JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Steady-state bare and dressed populations
    #[command(allow_negative_numbers = true)]
    Populations,
    /// Dressed populations, numeric and secular
    #[command(allow_negative_numbers = true)]
    Dressed,
    /// Incoherent fluorescence spectrum
    #[command(allow_negative_numbers = true)]
    Spectrum,
    /// Stochastic-trajectory ensemble against the effective equation
    #[command(allow_negative_numbers = true)]
    Oracle,
    /// Compare the two generator constructions
    #[command(allow_negative_numbers = true)]
    CheckGenerators,
    /// Eigenvalues of the homogeneous generator
    #[command(allow_negative_numbers = true)]
    CheckStability,
}

impl From<Command> for Task {
    fn from(c: Command) -> Task {
        match c {
            Command::Populations => Task::Populations,
            Command::Dressed => Task::Dressed,
            Command::Spectrum => Task::Spectrum,
            Command::Oracle => Task::Oracle,
            Command::CheckGenerators => Task::CheckGenerators,
            Command::CheckStability => Task::CheckStability,
        }
    }
}

impl Cli {
    fn settings(&self) -> CliResult<Settings> {
        let mut s = Settings {
            task: self.task.map(Task::from),
            ..Settings::default()
        };
        let flags = [
            ("omega", &self.omega),
            ("delta", &self.delta),
            ("gamma", &self.gamma),
            ("gamma_sg", &self.gamma_sg),
            ("dd", &self.dd),
            ("kappa", &self.kappa),
            ("eta", &self.eta),
            ("mu_sq", &self.mu_sq),
            ("sweep", &self.sweep),
            ("grid", &self.grid),
            ("n_traj", &self.n_traj),
            ("t_end", &self.t_end),
            ("dt", &self.dt),
            ("seed", &self.seed),
            ("threads", &self.threads),
            ("out", &self.out),
            ("format", &self.format),
            ("preset", &self.preset),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                s.set(key, v)?;
            }
        }
        Ok(s)
    }
}

fn init_threads(n: Option<usize>) -> CliResult<()> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("threads: {e}")))?;
    }
    Ok(())
}

fn real_main(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    let env_threads = std::env::var("LAMBDA_SIM_THREADS").ok();
    let cfg = file.overlay(cli.settings()?).resolve(env_threads.as_deref())?;
    init_threads(cfg.threads)?;
    log::info!("running {}", cfg.task);
    let outcome = run::run(&cfg)?;
    let to_stderr = cfg.out.is_none() && matches!(cfg.job, Job::Single { .. });
    for line in &outcome.summaries {
        if to_stderr {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }
    if outcome.warnings > 0 {
        log::warn!("{} points failed; see the sidecar for details", outcome.warnings);
        eprintln!("warning: {} points failed", outcome.warnings);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
