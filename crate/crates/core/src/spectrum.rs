//! Incoherent resonance-fluorescence spectrum from the quantum regression
//! theorem: fluctuation correlations evolve under the homogeneous part of the
//! generator and are Laplace transformed by a resolvent solve.

use serde::{Deserialize, Serialize};

use crate::density::{Vector8, E, EG, ES, G, S, SLOTS};
use crate::error::{Error, Result};
use crate::linalg;
use crate::liouvillian::{build_constructed, AffineGenerator, Matrix8};
use crate::noise::compute_coeffs;
use crate::params::{AtomParams, NoiseParams};
use crate::pool::map_ordered;
use crate::steady::{linspace, solve_steady, PointFailure, SteadyState};
use crate::C64;

/// Slot read out for the `e→g` channel (operator `σ_ge`).
pub const G_CHANNEL_SLOT: usize = EG;
/// Slot read out for the `e→s` channel (operator `σ_se`).
pub const S_CHANNEL_SLOT: usize = ES;

/// Prominence floor for reported peaks, relative to the global maximum.
pub const PEAK_PROMINENCE: f64 = 0.01;

/// Equal-time fluctuation correlations `⟨σ_ek σ⟩ − ⟨σ_ek⟩⟨σ⟩`, one entry per
/// state-vector slot, for `k = g` and `k = s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationInit {
    pub y_g0: Vector8,
    pub y_s0: Vector8,
}

impl CorrelationInit {
    pub fn zero() -> Self {
        CorrelationInit {
            y_g0: Vector8::zeros(),
            y_s0: Vector8::zeros(),
        }
    }
}

pub fn initial_correlations(ss: &SteadyState) -> CorrelationInit {
    let rho = ss.vec.to_matrix_unchecked().0;
    // ⟨σ_ab⟩ = ρ_ba
    let ev = |a: usize, b: usize| rho[(b, a)];
    let channel = |k: usize| {
        let mut y = Vector8::zeros();
        for (j, &(a, b)) in SLOTS.iter().enumerate() {
            // slot (a, b) carries σ_ba; σ_ek σ_ba = δ_kb σ_ea
            let product = if k == b { ev(E, a) } else { C64::new(0.0, 0.0) };
            y[j] = product - ev(E, k) * ev(b, a);
        }
        y
    };
    CorrelationInit {
        y_g0: channel(G),
        y_s0: channel(S),
    }
}

/// `Y(ω) = −(iω + Q)⁻¹ y₀`, the one-sided Fourier transform of `e^{Qτ} y₀`.
pub fn resolvent_response(g: &AffineGenerator, omega: f64, y0: &Vector8) -> Result<Vector8> {
    let a = shifted(g, omega);
    linalg::lu_solve(&a, &(-y0))
}

fn shifted(g: &AffineGenerator, omega: f64) -> Matrix8 {
    g.q + Matrix8::identity() * C64::new(0.0, omega)
}

/// `‖(iω + Q)Y + y₀‖₂`.
pub fn resolvent_residual(g: &AffineGenerator, omega: f64, y: &Vector8, y0: &Vector8) -> f64 {
    (shifted(g, omega) * y + y0).norm()
}

pub fn s_inc(g: &AffineGenerator, init: &CorrelationInit, omega: f64, mu_sq: f64) -> Result<f64> {
    let yg = resolvent_response(g, omega, &init.y_g0)?;
    let ys = resolvent_response(g, omega, &init.y_s0)?;
    Ok(mu_sq * (yg[G_CHANNEL_SLOT] + ys[S_CHANNEL_SLOT]).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub omega: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Strict local maxima whose topographic prominence is at least
/// `rel_prominence` times the global maximum. Non-finite samples act as
/// barriers and are never peaks.
pub fn find_peaks(omegas: &[f64], values: &[f64], rel_prominence: f64) -> Vec<Peak> {
    let n = values.len().min(omegas.len());
    let v: Vec<f64> = values[..n]
        .iter()
        .map(|&x| if x.is_finite() { x } else { f64::NEG_INFINITY })
        .collect();
    let global = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !global.is_finite() || n < 3 {
        return Vec::new();
    }
    let floor = rel_prominence * global.abs();
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(v[i] > v[i - 1] && v[i] > v[i + 1]) {
            continue;
        }
        let base = |range: &mut dyn Iterator<Item = usize>| {
            let mut lowest = v[i];
            for j in range {
                if v[j] > v[i] {
                    break;
                }
                lowest = lowest.min(v[j]);
            }
            lowest
        };
        let left = base(&mut (0..i).rev());
        let right = base(&mut (i + 1..n));
        let prominence = v[i] - left.max(right);
        if prominence >= floor {
            peaks.push(Peak {
                omega: omegas[i],
                height: v[i],
                prominence,
            });
        }
    }
    peaks
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub peaks: Vec<Peak>,
    pub failures: Vec<PointFailure>,
    pub atom: AtomParams,
    pub noise: NoiseParams,
    /// Largest resolvent residual over the grid.
    pub max_residual: f64,
}

impl SpectrumResult {
    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .filter(|x| x.is_finite())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value at the grid point closest to `omega`.
    pub fn value_near(&self, omega: f64) -> Option<f64> {
        self.omegas
            .iter()
            .zip(&self.values)
            .min_by(|a, b| (a.0 - omega).abs().total_cmp(&(b.0 - omega).abs()))
            .map(|(_, &v)| v)
    }
}

/// Default ω grid: 2001 points on `[−2R, 2R]`.
pub fn default_grid(p: &AtomParams) -> Vec<f64> {
    let rr = p.rabi();
    linspace(-2.0 * rr, 2.0 * rr, 2001)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("grid", "contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("grid", "must be strictly increasing"));
    }
    Ok(())
}

/// Steady state, correlations and one resolvent solve per grid point.
/// Points whose solve fails are recorded and left as NaN.
pub fn spectrum_sweep(p: &AtomParams, noise: &NoiseParams, grid: &[f64]) -> Result<SpectrumResult> {
    p.validate()?;
    noise.validate()?;
    check_grid(grid)?;
    let g = build_constructed(p, &compute_coeffs(p, noise));
    let ss = solve_steady(&g)?;
    let init = initial_correlations(&ss);
    let solved = map_ordered(grid, |_, &w| -> Result<(f64, f64)> {
        let yg = resolvent_response(&g, w, &init.y_g0)?;
        let ys = resolvent_response(&g, w, &init.y_s0)?;
        let residual = resolvent_residual(&g, w, &yg, &init.y_g0).max(resolvent_residual(&g, w, &ys, &init.y_s0));
        let v = p.mu_sq * (yg[G_CHANNEL_SLOT] + ys[S_CHANNEL_SLOT]).re;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                t: w,
                context: "spectrum",
            });
        }
        Ok((v, residual))
    });
    let mut values = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (index, (r, &w)) in solved.into_iter().zip(grid).enumerate() {
        match r {
            Ok((v, res)) => {
                values.push(v);
                max_residual = max_residual.max(res);
            }
            Err(e) => {
                values.push(f64::NAN);
                failures.push(PointFailure {
                    index,
                    axis: w,
                    code: e.code().to_string(),
                    message: e.to_string(),
                });
            }
        }
    }
    let peaks = find_peaks(grid, &values, PEAK_PROMINENCE);
    Ok(SpectrumResult {
        omegas: grid.to_vec(),
        values,
        peaks,
        failures,
        atom: *p,
        noise: *noise,
        max_residual,
    })
}
