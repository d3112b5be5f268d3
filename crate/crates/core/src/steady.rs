//! Steady states of the affine generator, fixed-step RK4 evolution, and
//! population sweeps.

use std::fmt;
use std::str::FromStr;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::density::{DensityVector8, Vector8, TOL};
use crate::dressed::{dressed_basis, numeric_dressed_populations, DressedPopulations};
use crate::error::{Error, Result};
use crate::linalg;
use crate::liouvillian::{build_constructed, stability_spectrum, AffineGenerator, Matrix8};
use crate::noise::compute_coeffs;
use crate::params::{AtomParams, NoiseParams};
use crate::pool::map_ordered;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub vec: DensityVector8,
    /// `‖Qρ + B‖₂`.
    pub residual: f64,
    /// `(ρ_gg, ρ_ee, ρ_ss)`.
    pub populations: (f64, f64, f64),
}

/// `ρ = −Q⁻¹B` by LU with partial pivoting.
pub fn solve_steady(g: &AffineGenerator) -> Result<SteadyState> {
    let x = linalg::lu_solve(&g.q, &(-g.b))?;
    let residual = g.apply(&x).norm();
    let vec = DensityVector8(x);
    let pairing = vec.pairing_error();
    if pairing > TOL {
        return Err(Error::NotPhysical(format!(
            "steady state breaks conjugate pairing by {pairing:e}"
        )));
    }
    Ok(SteadyState {
        vec,
        residual,
        populations: vec.populations(),
    })
}

/// Affine map of one classical RK4 step for `dρ/dt = Qρ + B`.
///
/// For a linear system the four stages collapse to
/// `ρ ↦ Pρ + c` with `P = Σ_{k≤4} (hQ)^k/k!` and
/// `c = h Σ_{k≤3} (hQ)^k/(k+1)! · B`, so many steps can be taken at once by
/// repeated squaring of the augmented map.
#[derive(Debug, Clone, Copy)]
pub struct Rk4Propagator {
    dt: f64,
    step: SMatrix<C64, 9, 9>,
}

impl Rk4Propagator {
    pub fn new(g: &AffineGenerator, dt: f64) -> Self {
        let hq = g.q * C64::new(dt, 0.0);
        let id = Matrix8::identity();
        let hq2 = hq * hq;
        let hq3 = hq2 * hq;
        let hq4 = hq3 * hq;
        let k = |x: f64| C64::new(x, 0.0);
        let p = id + hq + hq2 * k(0.5) + hq3 * k(1.0 / 6.0) + hq4 * k(1.0 / 24.0);
        let c = (id + hq * k(0.5) + hq2 * k(1.0 / 6.0) + hq3 * k(1.0 / 24.0)) * g.b * k(dt);
        let mut step = SMatrix::<C64, 9, 9>::zeros();
        step.fixed_view_mut::<8, 8>(0, 0).copy_from(&p);
        step.fixed_view_mut::<8, 1>(0, 8).copy_from(&c);
        step[(8, 8)] = C64::new(1.0, 0.0);
        Rk4Propagator { dt, step }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, v: &Vector8) -> Vector8 {
        self.apply(&self.step, v)
    }

    /// `n` steps at once.
    pub fn advance(&self, v: &Vector8, n: u64) -> Vector8 {
        let mut result = SMatrix::<C64, 9, 9>::identity();
        let mut base = self.step;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = base * result;
            }
            base = base * base;
            k >>= 1;
        }
        self.apply(&result, v)
    }

    fn apply(&self, m: &SMatrix<C64, 9, 9>, v: &Vector8) -> Vector8 {
        let p = m.fixed_view::<8, 8>(0, 0);
        let c = m.fixed_view::<8, 1>(0, 8);
        p * v + c
    }
}

/// One textbook RK4 step, stage by stage.
pub fn rk4_step(g: &AffineGenerator, v: &Vector8, dt: f64) -> Vector8 {
    let h = C64::new(dt, 0.0);
    let k1 = g.apply(v);
    let k2 = g.apply(&(v + k1 * (h / 2.0)));
    let k3 = g.apply(&(v + k2 * (h / 2.0)));
    let k4 = g.apply(&(v + k3 * h));
    let two = C64::new(2.0, 0.0);
    v + (k1 + k2 * two + k3 * two + k4) * (h / 6.0)
}

pub type Trajectory = Vec<(f64, DensityVector8)>;

/// Largest step recommended for a generator, `0.1 / max|λ|`.
pub fn recommended_dt(g: &AffineGenerator) -> Result<f64> {
    Ok(0.1 / stability_spectrum(g)?.max_modulus())
}

fn step_count(t_end: f64, dt: f64) -> Result<u64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("dt", "must be > 0"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::invalid("t_end", "must be ≥ 0"));
    }
    Ok((t_end / dt - 1e-9).ceil().max(0.0) as u64)
}

fn check_step(g: &AffineGenerator, dt: f64) {
    if let Ok(limit) = recommended_dt(g) {
        if dt > limit {
            log::warn!("step {dt:e} µs exceeds recommended {limit:e} µs");
        }
    }
}

fn check_finite(v: &Vector8, t: f64) -> Result<()> {
    if v.iter().all(|z| z.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { t, context: "evolve" })
    }
}

/// Fixed-step RK4 from `v0` to `t_end`, every step recorded. The step is
/// shrunk slightly if needed so that the last point lands on `t_end`.
pub fn evolve(g: &AffineGenerator, v0: &DensityVector8, t_end: f64, dt: f64) -> Result<Trajectory> {
    evolve_sampled(g, v0, t_end, dt, None)
}

/// Step layout for a fixed-step run of length `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub n_steps: u64,
    /// Steps between recorded points.
    pub stride: u64,
    pub dt: f64,
}

impl StepPlan {
    /// At most `dt` per step, with `n_records` evenly spaced records when
    /// given (every step otherwise). The step shrinks so that both the last
    /// step and the last record land on `t_end`.
    pub fn new(t_end: f64, dt: f64, n_records: Option<u64>) -> Result<Self> {
        let mut n = step_count(t_end, dt)?;
        let stride = match n_records {
            Some(r) if r > 0 => {
                let stride = n.div_ceil(r).max(1);
                n = stride * r;
                stride
            }
            _ => 1,
        };
        let dt = if n == 0 { dt } else { t_end / n as f64 };
        Ok(StepPlan { n_steps: n, stride, dt })
    }

    pub fn n_records(&self) -> u64 {
        self.n_steps / self.stride
    }

    pub fn record_times(&self) -> Vec<f64> {
        (0..=self.n_records())
            .map(|k| (k * self.stride) as f64 * self.dt)
            .collect()
    }
}

/// As [`evolve`], recording only `n_records + 1` evenly spaced points when
/// `n_records` is given. Steps between records are taken in one go.
pub fn evolve_sampled(
    g: &AffineGenerator,
    v0: &DensityVector8,
    t_end: f64,
    dt: f64,
    n_records: Option<u64>,
) -> Result<Trajectory> {
    let plan = StepPlan::new(t_end, dt, n_records)?;
    check_step(g, plan.dt);
    let prop = Rk4Propagator::new(g, plan.dt);
    let mut out = Vec::with_capacity(plan.n_records() as usize + 1);
    let mut v = v0.0;
    out.push((0.0, *v0));
    let mut done = 0u64;
    while done < plan.n_steps {
        v = if plan.stride == 1 {
            prop.step(&v)
        } else {
            prop.advance(&v, plan.stride)
        };
        done += plan.stride;
        let t = done as f64 * plan.dt;
        check_finite(&v, t)?;
        out.push((t, DensityVector8(v)));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Eta,
    Dd,
    Delta,
    Omega,
}

impl SweepVariable {
    pub fn apply(self, p: &AtomParams, noise: &NoiseParams, value: f64) -> (AtomParams, NoiseParams) {
        let (mut p, mut noise) = (*p, *noise);
        match self {
            SweepVariable::Eta => noise.eta = value,
            SweepVariable::Dd => noise.dd = value,
            SweepVariable::Delta => p.delta = value,
            SweepVariable::Omega => p.omega = value,
        }
        (p, noise)
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Eta => "eta",
            SweepVariable::Dd => "dd",
            SweepVariable::Delta => "delta",
            SweepVariable::Omega => "omega",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eta" => Ok(SweepVariable::Eta),
            "dd" => Ok(SweepVariable::Dd),
            "delta" => Ok(SweepVariable::Delta),
            "omega" => Ok(SweepVariable::Omega),
            other => Err(Error::invalid(
                "sweep",
                format!("unknown variable {other:?} (expected eta, dd, delta, omega)"),
            )),
        }
    }
}

/// Bare and dressed steady-state populations at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationPoint {
    pub steady: SteadyState,
    pub dressed: DressedPopulations,
}

impl PopulationPoint {
    pub fn compute(p: &AtomParams, noise: &NoiseParams) -> Result<Self> {
        p.validate()?;
        noise.validate()?;
        let g = build_constructed(p, &compute_coeffs(p, noise));
        let steady = solve_steady(&g)?;
        let dressed = numeric_dressed_populations(&steady, &dressed_basis(p)?);
        Ok(PopulationPoint { steady, dressed })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub axis: f64,
    pub code: String,
    pub message: String,
}

/// Named population curves over the sweep axis; failed points hold NaN.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSeries {
    pub rho_gg: Vec<f64>,
    pub rho_ee: Vec<f64>,
    pub rho_ss: Vec<f64>,
    pub rho_00: Vec<f64>,
    pub rho_pp: Vec<f64>,
    pub rho_mm: Vec<f64>,
    pub residual: Vec<f64>,
}

impl SweepSeries {
    pub fn named(&self) -> [(&'static str, &[f64]); 7] {
        [
            ("rho_gg", &self.rho_gg),
            ("rho_ee", &self.rho_ee),
            ("rho_ss", &self.rho_ss),
            ("rho_00", &self.rho_00),
            ("rho_pp", &self.rho_pp),
            ("rho_mm", &self.rho_mm),
            ("residual", &self.residual),
        ]
    }

    fn push(&mut self, point: Option<&PopulationPoint>) {
        let row = match point {
            Some(pt) => {
                let (gg, ee, ss) = pt.steady.populations;
                [
                    gg,
                    ee,
                    ss,
                    pt.dressed.p00,
                    pt.dressed.ppp,
                    pt.dressed.pmm,
                    pt.steady.residual,
                ]
            }
            None => [f64::NAN; 7],
        };
        for (col, v) in [
            &mut self.rho_gg,
            &mut self.rho_ee,
            &mut self.rho_ss,
            &mut self.rho_00,
            &mut self.rho_pp,
            &mut self.rho_mm,
            &mut self.residual,
        ]
        .into_iter()
        .zip(row)
        {
            col.push(v);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub axis: Vec<f64>,
    pub series: SweepSeries,
    pub failures: Vec<PointFailure>,
    pub atom: AtomParams,
    pub noise: NoiseParams,
}

/// Steady state at every grid value of `variable`; failing points are
/// recorded and left as NaN. Output order follows `grid`.
pub fn sweep(p: &AtomParams, noise: &NoiseParams, variable: SweepVariable, grid: &[f64]) -> SweepResult {
    let points = map_ordered(grid, |_, &x| {
        let (pp, nn) = variable.apply(p, noise, x);
        PopulationPoint::compute(&pp, &nn)
    });
    let mut series = SweepSeries::default();
    let mut failures = Vec::new();
    for (index, (pt, &axis)) in points.iter().zip(grid).enumerate() {
        match pt {
            Ok(pt) => series.push(Some(pt)),
            Err(e) => {
                series.push(None);
                failures.push(PointFailure {
                    index,
                    axis,
                    code: e.code().to_string(),
                    message: e.to_string(),
                });
            }
        }
    }
    SweepResult {
        variable,
        axis: grid.to_vec(),
        series,
        failures,
        atom: *p,
        noise: *noise,
    }
}

/// `n` evenly spaced values on `[min, max]`.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    max
                } else {
                    min + (max - min) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Default η grid: 801 points on `[−2R, 2R]`.
pub fn default_eta_grid(p: &AtomParams) -> Vec<f64> {
    let rr = p.rabi();
    linspace(-2.0 * rr, 2.0 * rr, 801)
}
