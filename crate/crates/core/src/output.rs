//! CSV tables and JSON sidecars. Numbers are written with 17 significant
//! digits so that files round-trip exactly.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::{json, Value};

use crate::dressed::DressedSweep;
use crate::spectrum::SpectrumResult;
use crate::steady::SweepResult;
use crate::trajectory::EnsembleResult;
use crate::VERSION;

pub const SWEEP_HEADER: &str = "axis,rho_gg,rho_ee,rho_ss,rho_00,rho_pp,rho_mm,residual";
pub const SPECTRUM_HEADER: &str = "omega,s_inc";
pub const DRESSED_HEADER: &str = "axis,rho_00,rho_pp,rho_mm,secular_00,secular_pp,secular_mm";
pub const ENSEMBLE_HEADER: &str = "t,mean_gg,mean_ee,mean_ss,se_gg,se_ee,se_ss";

/// Shortest-exact is not used; every value gets 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn write_row<W: Write>(w: &mut W, row: &[f64]) -> io::Result<()> {
    let line: Vec<String> = row.iter().map(|&x| fmt_num(x)).collect();
    writeln!(w, "{}", line.join(","))
}

pub fn write_sweep_csv<W: Write>(w: &mut W, r: &SweepResult) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    let s = &r.series;
    for (i, &x) in r.axis.iter().enumerate() {
        write_row(
            w,
            &[
                x,
                s.rho_gg[i],
                s.rho_ee[i],
                s.rho_ss[i],
                s.rho_00[i],
                s.rho_pp[i],
                s.rho_mm[i],
                s.residual[i],
            ],
        )?;
    }
    Ok(())
}

pub fn write_dressed_csv<W: Write>(w: &mut W, r: &DressedSweep) -> io::Result<()> {
    writeln!(w, "{DRESSED_HEADER}")?;
    for ((&x, a), b) in r.axis.iter().zip(&r.numeric).zip(&r.closed_form) {
        write_row(w, &[x, a.p00, a.ppp, a.pmm, b.p00, b.ppp, b.pmm])?;
    }
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(w: &mut W, r: &SpectrumResult) -> io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for (&o, &v) in r.omegas.iter().zip(&r.values) {
        write_row(w, &[o, v])?;
    }
    Ok(())
}

pub fn write_ensemble_csv<W: Write>(w: &mut W, r: &EnsembleResult) -> io::Result<()> {
    writeln!(w, "{ENSEMBLE_HEADER}")?;
    for ((&t, m), se) in r.t_grid.iter().zip(&r.mean).zip(&r.std_err) {
        write_row(w, &[t, m[0], m[1], m[2], se[0], se[1], se[2]])?;
    }
    Ok(())
}

fn grid_summary(axis: &[f64]) -> Value {
    json!({
        "min": axis.first(),
        "max": axis.last(),
        "n": axis.len(),
    })
}

pub fn sweep_sidecar(r: &SweepResult, seed: Option<u64>) -> Value {
    json!({
        "version": VERSION,
        "kind": "populations",
        "variable": r.variable,
        "atom": r.atom,
        "noise": r.noise,
        "grid": grid_summary(&r.axis),
        "seed": seed,
        "failures": r.failures,
    })
}

pub fn dressed_sidecar(r: &DressedSweep, seed: Option<u64>) -> Value {
    json!({
        "version": VERSION,
        "kind": "dressed",
        "variable": r.variable,
        "atom": r.atom,
        "noise": r.noise,
        "grid": grid_summary(&r.axis),
        "seed": seed,
        "max_secular_gap": r.max_secular_gap(),
        "failures": r.failures,
    })
}

pub fn spectrum_sidecar(r: &SpectrumResult, seed: Option<u64>) -> Value {
    json!({
        "version": VERSION,
        "kind": "spectrum",
        "atom": r.atom,
        "noise": r.noise,
        "grid": grid_summary(&r.omegas),
        "seed": seed,
        "peaks": r.peaks,
        "max_residual": r.max_residual,
        "failures": r.failures,
    })
}

pub fn ensemble_sidecar<T: Serialize>(r: &EnsembleResult, params: &T) -> Value {
    json!({
        "version": VERSION,
        "kind": "oracle",
        "params": params,
        "seed": r.base_seed,
        "n_traj": r.n_traj,
        "dt": r.dt,
        "grid": grid_summary(&r.t_grid),
    })
}
