//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array` of fixed-stride rows so the page
//! can plot without any deserialisation.

use lambda_sim::dressed::dressed_sweep;
use lambda_sim::spectrum::spectrum_sweep;
use lambda_sim::steady::{linspace, sweep, SweepVariable};
use lambda_sim::{AtomParams, NoiseParams};
use wasm_bindgen::prelude::*;

/// Row width of [`population_table`]: `eta, rho_gg, rho_ee, rho_ss`.
pub const POPULATION_STRIDE: usize = 4;
/// Row width of [`spectrum_table`]: `omega, s_inc`.
pub const SPECTRUM_STRIDE: usize = 2;
/// Row width of [`dressed_table`]: `eta, rho_00, rho_pp, rho_mm`.
pub const DRESSED_STRIDE: usize = 4;

const MAX_POINTS: usize = 20_001;

fn params(omega: f64, delta: f64, dd: f64, kappa: f64, eta: f64) -> Result<(AtomParams, NoiseParams), String> {
    let atom = AtomParams::new(omega, delta);
    let noise = NoiseParams::new(dd, eta).with_kappa(kappa);
    atom.validate().map_err(|e| e.to_string())?;
    noise.validate().map_err(|e| e.to_string())?;
    Ok((atom, noise))
}

fn check_points(n: usize) -> Result<(), String> {
    if (2..=MAX_POINTS).contains(&n) {
        Ok(())
    } else {
        Err(format!("points must be in 2..={MAX_POINTS}, got {n}"))
    }
}

fn rabi_span(atom: &AtomParams, n: usize) -> Vec<f64> {
    let r = atom.rabi();
    linspace(-2.0 * r, 2.0 * r, n)
}

/// Steady-state bare populations over `η ∈ [−2R, 2R]`.
pub fn population_table(omega: f64, delta: f64, dd: f64, kappa: f64, n: usize) -> Result<Vec<f64>, String> {
    check_points(n)?;
    let (atom, noise) = params(omega, delta, dd, kappa, 0.0)?;
    let r = sweep(&atom, &noise, SweepVariable::Eta, &rabi_span(&atom, n));
    let s = &r.series;
    let mut out = Vec::with_capacity(n * POPULATION_STRIDE);
    for i in 0..r.axis.len() {
        out.extend_from_slice(&[r.axis[i], s.rho_gg[i], s.rho_ee[i], s.rho_ss[i]]);
    }
    Ok(out)
}

/// Incoherent fluorescence spectrum over `ω ∈ [−2R, 2R]`.
pub fn spectrum_table(omega: f64, delta: f64, dd: f64, kappa: f64, eta: f64, n: usize) -> Result<Vec<f64>, String> {
    check_points(n)?;
    let (atom, noise) = params(omega, delta, dd, kappa, eta)?;
    let r = spectrum_sweep(&atom, &noise, &rabi_span(&atom, n)).map_err(|e| e.to_string())?;
    Ok(r.omegas.iter().zip(&r.values).flat_map(|(&o, &v)| [o, v]).collect())
}

/// Dressed-state populations over `η ∈ [−2R, 2R]`.
pub fn dressed_table(omega: f64, delta: f64, dd: f64, kappa: f64, n: usize) -> Result<Vec<f64>, String> {
    check_points(n)?;
    let (atom, noise) = params(omega, delta, dd, kappa, 0.0)?;
    let r = dressed_sweep(&atom, &noise, SweepVariable::Eta, &rabi_span(&atom, n));
    Ok(r.axis
        .iter()
        .zip(&r.numeric)
        .flat_map(|(&x, p)| [x, p.p00, p.ppp, p.pmm])
        .collect())
}

#[wasm_bindgen]
pub fn populations(omega: f64, delta: f64, dd: f64, kappa: f64, n: usize) -> Result<Vec<f64>, JsError> {
    population_table(omega, delta, dd, kappa, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn spectrum(omega: f64, delta: f64, dd: f64, kappa: f64, eta: f64, n: usize) -> Result<Vec<f64>, JsError> {
    spectrum_table(omega, delta, dd, kappa, eta, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dressed(omega: f64, delta: f64, dd: f64, kappa: f64, n: usize) -> Result<Vec<f64>, JsError> {
    dressed_table(omega, delta, dd, kappa, n).map_err(|e| JsError::new(&e))
}

/// Generalized Rabi frequency, used by the page to label axes.
#[wasm_bindgen]
pub fn rabi(omega: f64, delta: f64) -> f64 {
    AtomParams::new(omega, delta).rabi()
}
