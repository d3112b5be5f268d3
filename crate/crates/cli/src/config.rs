//! Run configuration: command-line flags over a config file over defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lambda_sim::steady::SweepVariable;
use lambda_sim::{AtomParams, NoiseParams};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Populations,
    Dressed,
    Spectrum,
    Oracle,
    CheckGenerators,
    CheckStability,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Populations => "populations",
            Task::Dressed => "dressed",
            Task::Spectrum => "spectrum",
            Task::Oracle => "oracle",
            Task::CheckGenerators => "check-generators",
            Task::CheckStability => "check-stability",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        [
            Task::Populations,
            Task::Dressed,
            Task::Spectrum,
            Task::Oracle,
            Task::CheckGenerators,
            Task::CheckStability,
        ]
        .into_iter()
        .find(|t| t.name() == s)
        .ok_or_else(|| CliError::config(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::config(format!("format: expected csv or json, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        lambda_sim::steady::linspace(self.min, self.max, self.n)
    }
}

fn parse_grid(field: &str, parts: &[&str]) -> CliResult<GridSpec> {
    let bad = || CliError::config(format!("{field}: expected MIN:MAX:N, got {:?}", parts.join(":")));
    if parts.len() != 3 {
        return Err(bad());
    }
    let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(min.is_finite() && max.is_finite()) || min >= max {
        return Err(CliError::config(format!("{field}: need finite MIN < MAX")));
    }
    if n < 2 {
        return Err(CliError::config(format!("{field}: need N ≥ 2")));
    }
    Ok(GridSpec { min, max, n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: GridSpec,
}

impl FromStr for SweepSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(CliError::config(format!("sweep: expected VAR:MIN:MAX:N, got {s:?}")));
        }
        let variable = parts[0].trim().parse::<SweepVariable>()?;
        Ok(SweepSpec {
            variable,
            grid: parse_grid("sweep", &parts[1..])?,
        })
    }
}

impl FromStr for GridSpec {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        parse_grid("grid", &s.split(':').collect::<Vec<_>>())
    }
}

/// Every recognised setting, each optional, as read from one source.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub task: Option<Task>,
    pub omega: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub gamma_sg: Option<f64>,
    pub dd: Option<f64>,
    pub kappa: Option<f64>,
    pub eta: Option<f64>,
    pub mu_sq: Option<f64>,
    pub sweep: Option<SweepSpec>,
    pub grid: Option<GridSpec>,
    pub n_traj: Option<usize>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub preset: Option<String>,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim()
        .parse()
        .map_err(|_| CliError::config(format!("{key}: malformed value {v:?}")))
}

impl Settings {
    /// Sets one key from its textual value; `-` and `_` are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim().replace('-', "_");
        let k = key.as_str();
        match k {
            "task" => self.task = Some(value.trim().parse()?),
            "omega" => self.omega = Some(parse_value(k, value)?),
            "delta" => self.delta = Some(parse_value(k, value)?),
            "gamma" => self.gamma = Some(parse_value(k, value)?),
            "gamma_sg" => self.gamma_sg = Some(parse_value(k, value)?),
            "dd" => self.dd = Some(parse_value(k, value)?),
            "kappa" => self.kappa = Some(parse_value(k, value)?),
            "eta" => self.eta = Some(parse_value(k, value)?),
            "mu_sq" => self.mu_sq = Some(parse_value(k, value)?),
            "sweep" => self.sweep = Some(value.trim().parse()?),
            "grid" => self.grid = Some(value.trim().parse()?),
            "n_traj" => self.n_traj = Some(parse_value(k, value)?),
            "t_end" => self.t_end = Some(parse_value(k, value)?),
            "dt" => self.dt = Some(parse_value(k, value)?),
            "seed" => self.seed = Some(parse_value(k, value)?),
            "threads" => self.threads = Some(parse_value(k, value)?),
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "format" => self.format = Some(value.trim().parse()?),
            "preset" => self.preset = Some(value.trim().to_string()),
            _ => return Err(CliError::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// `key = value` lines with `#` comments, or a flat JSON object.
    pub fn parse_file_text(text: &str) -> CliResult<Self> {
        let mut s = Settings::default();
        if text.trim_start().starts_with('{') {
            let v: serde_json::Value =
                serde_json::from_str(text).map_err(|e| CliError::config(format!("config JSON: {e}")))?;
            let obj = v
                .as_object()
                .ok_or_else(|| CliError::config("config JSON must be an object"))?;
            for (k, v) in obj {
                let text = match v {
                    serde_json::Value::String(x) => x.clone(),
                    serde_json::Value::Number(n) => n.to_string(),
                    other => return Err(CliError::config(format!("{k}: unsupported value {other}"))),
                };
                s.set(k, &text)?;
            }
            return Ok(s);
        }
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(format!("config line {}: expected key = value", no + 1)))?;
            s.set(k, v)?;
        }
        Ok(s)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        Self::parse_file_text(&text)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: Settings) -> Settings {
        Settings {
            task: over.task.or(self.task),
            omega: over.omega.or(self.omega),
            delta: over.delta.or(self.delta),
            gamma: over.gamma.or(self.gamma),
            gamma_sg: over.gamma_sg.or(self.gamma_sg),
            dd: over.dd.or(self.dd),
            kappa: over.kappa.or(self.kappa),
            eta: over.eta.or(self.eta),
            mu_sq: over.mu_sq.or(self.mu_sq),
            sweep: over.sweep.or(self.sweep),
            grid: over.grid.or(self.grid),
            n_traj: over.n_traj.or(self.n_traj),
            t_end: over.t_end.or(self.t_end),
            dt: over.dt.or(self.dt),
            seed: over.seed.or(self.seed),
            threads: over.threads.or(self.threads),
            out: over.out.or(self.out),
            format: over.format.or(self.format),
            preset: over.preset.or(self.preset),
        }
    }
}

pub const DEFAULT_N_TRAJ: usize = 2000;
pub const DEFAULT_ORACLE_DT: f64 = 2e-4;
pub const ORACLE_RECORDS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpec {
    pub n_traj: usize,
    pub t_end: f64,
    pub dt: f64,
}

/// Physical parameters common to every member of a preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub gamma: f64,
    pub gamma_sg: f64,
    pub kappa: f64,
    pub mu_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Single {
        atom: AtomParams,
        noise: NoiseParams,
        sweep: Option<SweepSpec>,
        grid: Option<GridSpec>,
        oracle: OracleSpec,
    },
    Preset {
        name: String,
        rates: Rates,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub job: Job,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

fn reject_for(task: Task, name: &str, present: bool, allowed: &[Task]) -> CliResult<()> {
    if present && !allowed.contains(&task) {
        return Err(CliError::config(format!("{name} is not valid for {task}")));
    }
    Ok(())
}

impl Settings {
    pub fn resolve(self, env_threads: Option<&str>) -> CliResult<RunConfig> {
        let preset_task = match &self.preset {
            Some(name) => Some(crate::presets::lookup(name)?.task),
            None => None,
        };
        let task = match (self.task, preset_task) {
            (Some(t), Some(p)) if t != p => {
                return Err(CliError::config(format!(
                    "preset {} runs {p}, not {t}",
                    self.preset.unwrap_or_default()
                )))
            }
            (Some(t), _) | (None, Some(t)) => t,
            (None, None) => return Err(CliError::config("no task given")),
        };
        let threads = match (self.threads, env_threads) {
            (Some(n), _) => Some(n),
            (None, Some(v)) if !v.trim().is_empty() => Some(parse_value("LAMBDA_SIM_THREADS", v)?),
            _ => None,
        };
        if threads == Some(0) {
            return Err(CliError::config("threads must be ≥ 1"));
        }
        let rates = Rates {
            gamma: self.gamma.unwrap_or(lambda_sim::params::DEFAULT_GAMMA),
            gamma_sg: self.gamma_sg.unwrap_or(lambda_sim::params::DEFAULT_GAMMA_SG),
            kappa: self.kappa.unwrap_or(lambda_sim::params::DEFAULT_KAPPA),
            mu_sq: self.mu_sq.unwrap_or(lambda_sim::params::DEFAULT_MU_SQ),
        };
        let job = if let Some(name) = self.preset {
            for (field, present) in [
                ("omega", self.omega.is_some()),
                ("delta", self.delta.is_some()),
                ("dd", self.dd.is_some()),
                ("eta", self.eta.is_some()),
                ("sweep", self.sweep.is_some()),
                ("grid", self.grid.is_some()),
                ("n_traj", self.n_traj.is_some()),
                ("t_end", self.t_end.is_some()),
                ("dt", self.dt.is_some()),
            ] {
                if present {
                    return Err(CliError::config(format!("{field} conflicts with preset {name}")));
                }
            }
            Job::Preset { name, rates }
        } else {
            let omega = self.omega.ok_or_else(|| CliError::config("omega is required"))?;
            let delta = self.delta.ok_or_else(|| CliError::config("delta is required"))?;
            let atom = AtomParams {
                gamma: rates.gamma,
                gamma_sg: rates.gamma_sg,
                omega,
                delta,
                mu_sq: rates.mu_sq,
            };
            atom.validate()?;
            let noise = NoiseParams {
                dd: self.dd.unwrap_or(0.0),
                kappa: rates.kappa,
                eta: self.eta.unwrap_or(0.0),
            };
            noise.validate()?;
            reject_for(task, "sweep", self.sweep.is_some(), &[Task::Populations, Task::Dressed])?;
            reject_for(task, "grid", self.grid.is_some(), &[Task::Spectrum])?;
            for (name, present) in [
                ("n_traj", self.n_traj.is_some()),
                ("t_end", self.t_end.is_some()),
                ("dt", self.dt.is_some()),
            ] {
                reject_for(task, name, present, &[Task::Oracle])?;
            }
            let oracle = OracleSpec {
                n_traj: self.n_traj.unwrap_or(DEFAULT_N_TRAJ),
                t_end: self.t_end.unwrap_or(30.0 / atom.gamma),
                dt: self.dt.unwrap_or(DEFAULT_ORACLE_DT),
            };
            if oracle.n_traj == 0 {
                return Err(CliError::config("n_traj must be ≥ 1"));
            }
            if !(oracle.t_end > 0.0 && oracle.t_end.is_finite()) {
                return Err(CliError::config("t_end must be > 0"));
            }
            if !(oracle.dt > 0.0 && oracle.dt.is_finite()) {
                return Err(CliError::config("dt must be > 0"));
            }
            Job::Single {
                atom,
                noise,
                sweep: self.sweep,
                grid: self.grid,
                oracle,
            }
        };
        Ok(RunConfig {
            task,
            job,
            out: self.out,
            format: self.format.unwrap_or_default(),
            seed: self.seed,
            threads,
        })
    }
}
