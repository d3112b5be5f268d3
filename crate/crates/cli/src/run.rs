//! Dispatch of a resolved configuration to the simulation library.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use lambda_sim::dressed::{dressed_sweep, DressedSweep};
use lambda_sim::liouvillian::{build_constructed, build_transcribed, compare_with_errata, stability_spectrum, Errata};
use lambda_sim::noise::compute_coeffs;
use lambda_sim::output;
use lambda_sim::spectrum::{default_grid, spectrum_sweep, SpectrumResult};
use lambda_sim::steady::{default_eta_grid, sweep, SweepResult, SweepVariable};
use lambda_sim::trajectory::{compare_with_master_equation, EnsembleConfig};
use lambda_sim::{AtomParams, NoiseParams};
use serde_json::{json, Value};

use crate::config::{Format, GridSpec, Job, OracleSpec, Rates, RunConfig, Task, ORACLE_RECORDS};
use crate::error::{CliError, CliResult};
use crate::presets::{self, EtaChoice, Member};

pub const GENERATOR_TOL: f64 = 1e-12;
pub const ORACLE_SIGMA: f64 = 3.0;
/// Below `κ = 10γ` the effective equation is not expected to hold.
pub const ORACLE_MIN_KAPPA_RATIO: f64 = 10.0;

/// One computed table with its metadata.
pub struct Artifact {
    pub csv: Vec<u8>,
    pub meta: Value,
    pub data: Value,
    pub summary: String,
    pub warnings: usize,
    pub failure: Option<CliError>,
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory does not fail");
    buf
}

fn max_finite(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().filter(|x| x.is_finite()).fold(0.0, f64::max)
}

fn populations_artifact(r: SweepResult, seed: Option<u64>) -> Artifact {
    let summary = format!(
        "populations: {} points over {}, max residual {:.3e}, {} failed",
        r.axis.len(),
        r.variable,
        max_finite(r.series.residual.iter().copied()),
        r.failures.len()
    );
    Artifact {
        csv: csv_bytes(|w| output::write_sweep_csv(w, &r)),
        meta: output::sweep_sidecar(&r, seed),
        warnings: r.failures.len(),
        data: json!(r),
        summary,
        failure: None,
    }
}

fn dressed_artifact(r: DressedSweep, seed: Option<u64>) -> Artifact {
    let summary = format!(
        "dressed: {} points over {}, max secular gap {:.3e}, {} failed",
        r.axis.len(),
        r.variable,
        r.max_secular_gap(),
        r.failures.len()
    );
    Artifact {
        csv: csv_bytes(|w| output::write_dressed_csv(w, &r)),
        meta: output::dressed_sidecar(&r, seed),
        warnings: r.failures.len(),
        data: json!(r),
        summary,
        failure: None,
    }
}

fn spectrum_artifact(r: SpectrumResult, seed: Option<u64>) -> Artifact {
    let peaks: Vec<String> = r.peaks.iter().map(|p| format!("{:.2}", p.omega)).collect();
    let summary = format!(
        "spectrum: {} points, peaks at [{}], max residual {:.3e}, {} failed",
        r.omegas.len(),
        peaks.join(", "),
        r.max_residual,
        r.failures.len()
    );
    Artifact {
        csv: csv_bytes(|w| output::write_spectrum_csv(w, &r)),
        meta: output::spectrum_sidecar(&r, seed),
        warnings: r.failures.len(),
        data: json!(r),
        summary,
        failure: None,
    }
}

type Axis = (SweepVariable, Vec<f64>);

fn axis_or_point(noise: &NoiseParams, axis: Option<Axis>) -> Axis {
    axis.unwrap_or_else(|| (SweepVariable::Eta, vec![noise.eta]))
}

fn run_populations(p: &AtomParams, noise: &NoiseParams, axis: Option<Axis>, seed: Option<u64>) -> Artifact {
    let (var, grid) = axis_or_point(noise, axis);
    populations_artifact(sweep(p, noise, var, &grid), seed)
}

fn run_dressed(p: &AtomParams, noise: &NoiseParams, axis: Option<Axis>, seed: Option<u64>) -> Artifact {
    let (var, grid) = axis_or_point(noise, axis);
    dressed_artifact(dressed_sweep(p, noise, var, &grid), seed)
}

fn run_spectrum(p: &AtomParams, noise: &NoiseParams, grid: Option<GridSpec>, seed: Option<u64>) -> CliResult<Artifact> {
    let grid = grid.map(|g| g.points()).unwrap_or_else(|| default_grid(p));
    Ok(spectrum_artifact(spectrum_sweep(p, noise, &grid)?, seed))
}

fn run_oracle(p: &AtomParams, noise: &NoiseParams, spec: OracleSpec, seed: Option<u64>) -> CliResult<Artifact> {
    let cfg = EnsembleConfig {
        n_traj: spec.n_traj,
        t_end: spec.t_end,
        dt: spec.dt,
        base_seed: seed.unwrap_or(0),
        n_records: ORACLE_RECORDS,
    };
    let (ens, cmp) = compare_with_master_equation(p, noise, &cfg)?;
    let params = json!({ "atom": p, "noise": noise, "config": cfg });
    let mut meta = output::ensemble_sidecar(&ens, &params);
    meta["comparison"] = json!(cmp);
    let max_z = cmp.max_z();
    let mut warnings = 0;
    let mut failure = None;
    if max_z > ORACLE_SIGMA {
        if noise.kappa < ORACLE_MIN_KAPPA_RATIO * p.gamma {
            log::warn!("max z = {max_z:.2} but κ < {ORACLE_MIN_KAPPA_RATIO}γ, outside the effective equation's regime");
            warnings += 1;
        } else {
            failure = Some(CliError::Tolerance(format!(
                "ensemble deviates from the effective equation: max z = {max_z:.2} > {ORACLE_SIGMA}"
            )));
        }
    }
    let summary = format!(
        "oracle: {} trajectories to t = {}, max z {:.2} (gg {:.3e} vs {:.3e}, ee {:.3e} vs {:.3e}, ss {:.3e} vs {:.3e})",
        ens.n_traj,
        cmp.t_end,
        max_z,
        cmp.ensemble[0],
        cmp.master[0],
        cmp.ensemble[1],
        cmp.master[1],
        cmp.ensemble[2],
        cmp.master[2],
    );
    Ok(Artifact {
        csv: csv_bytes(|w| output::write_ensemble_csv(w, &ens)),
        meta,
        data: json!(ens),
        summary,
        warnings,
        failure,
    })
}

fn run_check_generators(p: &AtomParams, noise: &NoiseParams) -> Artifact {
    let coeffs = compute_coeffs(p, noise);
    let errata = Errata::shipped();
    let diff = compare_with_errata(&build_constructed(p, &coeffs), &build_transcribed(p, &coeffs), &errata);
    let summary = format!(
        "check-generators: max diff {:.3e} at {:?} with {} errata entries",
        diff.max_abs,
        diff.worst_index,
        errata.len()
    );
    let failure = (!(diff.max_abs <= GENERATOR_TOL))
        .then(|| CliError::Tolerance(format!("generator mismatch {:.3e} > {GENERATOR_TOL:e}", diff.max_abs)));
    let csv = format!(
        "max_abs,worst_row,worst_col,errata\n{},{},{},{}\n",
        output::fmt_num(diff.max_abs),
        diff.worst_index.0,
        diff.worst_index.1,
        errata.len()
    );
    let meta = json!({
        "version": lambda_sim::VERSION,
        "kind": "check-generators",
        "atom": p,
        "noise": noise,
        "tolerance": GENERATOR_TOL,
    });
    Artifact {
        csv: csv.into_bytes(),
        meta,
        data: json!(diff),
        summary,
        warnings: 0,
        failure,
    }
}

fn run_check_stability(p: &AtomParams, noise: &NoiseParams) -> CliResult<Artifact> {
    let g = build_constructed(p, &compute_coeffs(p, noise));
    let spec = stability_spectrum(&g)?;
    let mut csv = String::from("re,im,flagged\n");
    for z in &spec.eigenvalues {
        let flagged = spec.flagged.contains(z);
        csv.push_str(&format!(
            "{},{},{}\n",
            output::fmt_num(z.re),
            output::fmt_num(z.im),
            flagged as u8
        ));
    }
    let summary = format!(
        "check-stability: max Re λ = {:.3e}, |λ|max = {:.3e}, {} flagged",
        spec.max_real(),
        spec.max_modulus(),
        spec.flagged.len()
    );
    let failure = (!spec.is_stable()).then(|| {
        CliError::Model(lambda_sim::Error::Singular {
            eigenvalue: spec.flagged[0],
        })
    });
    let meta = json!({
        "version": lambda_sim::VERSION,
        "kind": "check-stability",
        "atom": p,
        "noise": noise,
    });
    Ok(Artifact {
        csv: csv.into_bytes(),
        meta,
        data: json!(spec),
        summary,
        warnings: 0,
        failure,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    s.push(b'\n');
    s
}

fn document(a: &Artifact) -> Value {
    json!({ "meta": a.meta, "data": a.data })
}

/// `<out>` with its extension replaced by `json`.
pub fn sidecar_path(out: &Path) -> CliResult<PathBuf> {
    let side = out.with_extension("json");
    if side == out {
        return Err(CliError::config(format!(
            "out {} would be overwritten by its sidecar; use another extension",
            out.display()
        )));
    }
    Ok(side)
}

fn emit(a: &Artifact, out: Option<&Path>, format: Format) -> CliResult<()> {
    match (out, format) {
        (Some(path), Format::Csv) => {
            let side = sidecar_path(path)?;
            write_file(path, &a.csv)?;
            write_file(&side, &json_bytes(&a.meta))
        }
        (Some(path), Format::Json) => write_file(path, &json_bytes(&document(a))),
        (None, fmt) => {
            let bytes = match fmt {
                Format::Csv => a.csv.clone(),
                Format::Json => json_bytes(&document(a)),
            };
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("writing stdout", e))
        }
    }
}

/// Outcome reported back to `main`.
#[derive(Debug, Default)]
pub struct Outcome {
    pub summaries: Vec<String>,
    pub warnings: usize,
}

fn compute(
    task: Task,
    p: &AtomParams,
    noise: &NoiseParams,
    axis: Option<Axis>,
    grid: Option<GridSpec>,
    oracle: Option<OracleSpec>,
    seed: Option<u64>,
) -> CliResult<Artifact> {
    Ok(match task {
        Task::Populations => run_populations(p, noise, axis, seed),
        Task::Dressed => run_dressed(p, noise, axis, seed),
        Task::Spectrum => run_spectrum(p, noise, grid, seed)?,
        Task::Oracle => run_oracle(p, noise, oracle.expect("oracle settings resolved"), seed)?,
        Task::CheckGenerators => run_check_generators(p, noise),
        Task::CheckStability => run_check_stability(p, noise)?,
    })
}

fn member_params(m: &Member, rates: &Rates) -> (AtomParams, NoiseParams) {
    let atom = AtomParams {
        gamma: rates.gamma,
        gamma_sg: rates.gamma_sg,
        omega: m.omega,
        delta: m.delta,
        mu_sq: rates.mu_sq,
    };
    let eta = match m.eta {
        EtaChoice::Value(v) => v,
        EtaChoice::RabiMultiple(k) => k * atom.rabi(),
    };
    let noise = NoiseParams {
        dd: m.dd,
        kappa: rates.kappa,
        eta,
    };
    (atom, noise)
}

fn run_preset(name: &str, rates: &Rates, cfg: &RunConfig) -> CliResult<Outcome> {
    let preset = presets::lookup(name)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from(preset.name));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    let mut outcome = Outcome::default();
    for m in &preset.members {
        let (atom, noise) = member_params(m, rates);
        atom.validate()?;
        noise.validate()?;
        let axis = m.sweep.map(|variable| (variable, default_eta_grid(&atom)));
        let a = compute(preset.task, &atom, &noise, axis, None, None, cfg.seed)?;
        match cfg.format {
            Format::Csv => {
                write_file(&dir.join(format!("{}.csv", m.label)), &a.csv)?;
                write_file(&dir.join(format!("{}.json", m.label)), &json_bytes(&a.meta))?;
            }
            Format::Json => write_file(&dir.join(format!("{}.json", m.label)), &json_bytes(&document(&a)))?,
        }
        outcome.summaries.push(format!("{}: {}", m.label, a.summary));
        outcome.warnings += a.warnings;
        if let Some(e) = a.failure {
            return Err(e);
        }
    }
    outcome.summaries.push(format!(
        "{}: {} members written to {}",
        preset.name,
        preset.members.len(),
        dir.display()
    ));
    Ok(outcome)
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    match &cfg.job {
        Job::Preset { name, rates } => run_preset(name, rates, cfg),
        Job::Single {
            atom,
            noise,
            sweep,
            grid,
            oracle,
        } => {
            let axis = sweep.map(|s| (s.variable, s.grid.points()));
            let a = compute(cfg.task, atom, noise, axis, *grid, Some(*oracle), cfg.seed)?;
            emit(&a, cfg.out.as_deref(), cfg.format)?;
            let outcome = Outcome {
                summaries: vec![a.summary],
                warnings: a.warnings,
            };
            match a.failure {
                Some(e) => {
                    for s in &outcome.summaries {
                        eprintln!("{s}");
                    }
                    Err(e)
                }
                None => Ok(outcome),
            }
        }
    }
}
