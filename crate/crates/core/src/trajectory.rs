//! Microscopic check of the effective master equation: the atom is driven by
//! explicitly sampled Ornstein–Uhlenbeck field paths and the populations are
//! averaged over many trajectories.
//!
//! Seeding contract: trajectory `i` of an ensemble with base seed `s` draws
//! from `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::density::{DensityMatrix3, DensityVector8, E, G, S};
use crate::error::{Error, Result};
use crate::liouvillian::build_constructed;
use crate::noise::compute_coeffs;
use crate::operators::{coherent_and_dissipative, hamiltonian, raising, Op3};
use crate::params::{AtomParams, NoiseParams};
use crate::pool::map_ordered;
use crate::steady::{evolve_sampled, StepPlan};
use crate::C64;

/// Largest tolerated drift of `Tr ρ` along a trajectory.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Recommended upper bound on `κ·dt`.
pub const MAX_KAPPA_DT: f64 = 0.2;

/// Complex field samples `F(n·dt)`, `n = 0..=n_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct OUPath {
    pub dt: f64,
    pub samples: Vec<C64>,
}

impl OUPath {
    /// Linear interpolation at `t`, clamped to the path.
    pub fn at(&self, t: f64) -> C64 {
        let x = (t / self.dt).max(0.0);
        let i = (x.floor() as usize).min(self.samples.len().saturating_sub(2));
        let frac = (x - i as f64).clamp(0.0, 1.0);
        match self.samples.len() {
            0 => C64::new(0.0, 0.0),
            1 => self.samples[0],
            _ => self.samples[i] * (1.0 - frac) + self.samples[i + 1] * frac,
        }
    }
}

/// Generator for trajectory `index` of the ensemble seeded by `base_seed`.
pub fn trajectory_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * sd, im * sd)
}

/// Exact stationary OU update: `F₀` from the stationary law,
/// `F_{n+1} = e^{−κdt}F_n + ζ_n` with `⟨|ζ|²⟩ = Dκ(1 − e^{−2κdt})`.
pub fn sample_ou_with<R: Rng + ?Sized>(noise: &NoiseParams, dt: f64, n_steps: usize, rng: &mut R) -> OUPath {
    let mut samples = Vec::with_capacity(n_steps + 1);
    if noise.dd == 0.0 {
        samples.resize(n_steps + 1, C64::new(0.0, 0.0));
        return OUPath { dt, samples };
    }
    let var = noise.dd * noise.kappa;
    let a = (-noise.kappa * dt).exp();
    let sd_kick = (0.5 * var * (1.0 - a * a)).sqrt();
    let mut f = complex_normal(rng, (0.5 * var).sqrt());
    samples.push(f);
    for _ in 0..n_steps {
        f = f * a + complex_normal(rng, sd_kick);
        samples.push(f);
    }
    OUPath { dt, samples }
}

/// [`sample_ou_with`] on stream 0 of `seed`.
pub fn sample_ou(noise: &NoiseParams, dt: f64, n_steps: usize, seed: u64) -> OUPath {
    sample_ou_with(noise, dt, n_steps, &mut trajectory_rng(seed, 0))
}

/// Empirical `⟨F(t+lag·dt) F*(t)⟩` and `⟨F(t+lag·dt) F(t)⟩` over a path.
pub fn autocorrelation(path: &OUPath, lag: usize) -> (C64, C64) {
    let n = path.samples.len().saturating_sub(lag);
    if n == 0 {
        return (C64::new(f64::NAN, 0.0), C64::new(f64::NAN, 0.0));
    }
    let mut cc = C64::new(0.0, 0.0);
    let mut pp = C64::new(0.0, 0.0);
    for (late, early) in path.samples[lag..].iter().zip(&path.samples[..n]) {
        cc += late * early.conj();
        pp += late * early;
    }
    (cc / n as f64, pp / n as f64)
}

/// Coherent drive plus the stochastic coupling
/// `½[F e^{−iηt} A + F* e^{iηt} A†]`, with `A = σ_eg + σ_es`.
struct DrivenAtom {
    params: AtomParams,
    h0: Op3,
    a: Op3,
    eta: f64,
}

impl DrivenAtom {
    fn new(p: &AtomParams, noise: &NoiseParams) -> Self {
        DrivenAtom {
            params: *p,
            h0: hamiltonian(p),
            a: raising(),
            eta: noise.eta,
        }
    }

    fn hamiltonian(&self, t: f64, f: C64) -> Op3 {
        let c = f * C64::from_polar(0.5, -self.eta * t);
        let ac = self.a * c;
        self.h0 + ac + ac.adjoint()
    }

    fn rhs(&self, t: f64, f: C64, rho: &Op3) -> Op3 {
        coherent_and_dissipative(&self.hamiltonian(t, f), &self.params, rho)
    }

    fn step(&self, t: f64, dt: f64, f0: C64, f1: C64, rho: &Op3) -> Op3 {
        let fm = (f0 + f1) * 0.5;
        let h = C64::new(dt, 0.0);
        let h2 = C64::new(0.5 * dt, 0.0);
        let k1 = self.rhs(t, f0, rho);
        let k2 = self.rhs(t + 0.5 * dt, fm, &(rho + k1 * h2));
        let k3 = self.rhs(t + 0.5 * dt, fm, &(rho + k2 * h2));
        let k4 = self.rhs(t + dt, f1, &(rho + k3 * h));
        let two = C64::new(2.0, 0.0);
        rho + (k1 + k2 * two + k3 * two + k4) * C64::new(dt / 6.0, 0.0)
    }
}

fn run(
    p: &AtomParams,
    noise: &NoiseParams,
    path: &OUPath,
    rho0: &DensityMatrix3,
    stride: usize,
    mut record: impl FnMut(f64, &Op3),
) -> Result<()> {
    let atom = DrivenAtom::new(p, noise);
    let dt = path.dt;
    let mut rho = rho0.0;
    record(0.0, &rho);
    for n in 0..path.samples.len().saturating_sub(1) {
        let t = n as f64 * dt;
        rho = atom.step(t, dt, path.samples[n], path.samples[n + 1], &rho);
        let t1 = (n + 1) as f64 * dt;
        if (n + 1) % stride == 0 {
            if !rho.iter().all(|z| z.is_finite()) {
                return Err(Error::NonFinite {
                    t: t1,
                    context: "trajectory",
                });
            }
            let drift = (rho.trace() - C64::new(1.0, 0.0)).norm();
            if drift > TRACE_DRIFT_TOL {
                return Err(Error::TraceDrift { t: t1, drift });
            }
            record(t1, &rho);
        }
    }
    Ok(())
}

/// RK4 along a sampled path, one record per field sample.
pub fn integrate_trajectory(
    p: &AtomParams,
    noise: &NoiseParams,
    path: &OUPath,
    rho0: &DensityMatrix3,
) -> Result<Vec<(f64, DensityMatrix3)>> {
    rho0.check_physical(crate::density::TOL, crate::density::PSD_TOL)?;
    let mut out = Vec::with_capacity(path.samples.len());
    run(p, noise, path, rho0, 1, |t, m| out.push((t, DensityMatrix3(*m))))?;
    Ok(out)
}

fn populations(m: &Op3) -> [f64; 3] {
    [m[(G, G)].re, m[(E, E)].re, m[(S, S)].re]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_traj: usize,
    pub t_end: f64,
    pub dt: f64,
    pub base_seed: u64,
    /// Number of recorded intervals; the record grid is shared with
    /// [`master_equation_populations`].
    pub n_records: u64,
}

impl EnsembleConfig {
    pub fn validate(&self, noise: &NoiseParams) -> Result<StepPlan> {
        if self.n_traj == 0 {
            return Err(Error::invalid("n_traj", "must be ≥ 1"));
        }
        let plan = StepPlan::new(self.t_end, self.dt, Some(self.n_records.max(1)))?;
        if noise.kappa * plan.dt > MAX_KAPPA_DT {
            log::warn!("κ·dt = {} exceeds {MAX_KAPPA_DT}", noise.kappa * plan.dt);
        }
        Ok(plan)
    }
}

/// Mean populations `(gg, ee, ss)` per record time with standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub t_grid: Vec<f64>,
    pub mean: Vec<[f64; 3]>,
    pub std_err: Vec<[f64; 3]>,
    pub n_traj: usize,
    pub base_seed: u64,
    pub dt: f64,
}

/// Population records of one trajectory, starting from `|g⟩`.
pub fn trajectory_populations(
    p: &AtomParams,
    noise: &NoiseParams,
    plan: &StepPlan,
    base_seed: u64,
    index: u64,
) -> Result<Vec<[f64; 3]>> {
    let mut rng = trajectory_rng(base_seed, index);
    let path = sample_ou_with(noise, plan.dt, plan.n_steps as usize, &mut rng);
    let mut out = Vec::with_capacity(plan.n_records() as usize + 1);
    run(
        p,
        noise,
        &path,
        &DensityMatrix3::basis_state(G),
        plan.stride as usize,
        |_, m| out.push(populations(m)),
    )?;
    Ok(out)
}

/// Averages trajectories in index order, so the result does not depend on
/// how the work was scheduled.
pub fn ensemble_average(p: &AtomParams, noise: &NoiseParams, cfg: &EnsembleConfig) -> Result<EnsembleResult> {
    p.validate()?;
    noise.validate()?;
    let plan = cfg.validate(noise)?;
    let indices: Vec<u64> = (0..cfg.n_traj as u64).collect();
    let runs = map_ordered(&indices, |_, &i| {
        trajectory_populations(p, noise, &plan, cfg.base_seed, i)
    });
    let n_rec = plan.n_records() as usize + 1;
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let n = cfg.n_traj as f64;
    let mut mean = vec![[0.0; 3]; n_rec];
    for r in &runs {
        for (m, pops) in mean.iter_mut().zip(r) {
            for c in 0..3 {
                m[c] += pops[c];
            }
        }
    }
    for m in &mut mean {
        for x in m.iter_mut() {
            *x /= n;
        }
    }
    let mut std_err = vec![[0.0; 3]; n_rec];
    if cfg.n_traj > 1 {
        for r in &runs {
            for ((s, pops), m) in std_err.iter_mut().zip(r).zip(&mean) {
                for c in 0..3 {
                    s[c] += (pops[c] - m[c]).powi(2);
                }
            }
        }
        for s in &mut std_err {
            for x in s.iter_mut() {
                *x = (*x / (n - 1.0) / n).sqrt();
            }
        }
    }
    Ok(EnsembleResult {
        t_grid: plan.record_times(),
        mean,
        std_err,
        n_traj: cfg.n_traj,
        base_seed: cfg.base_seed,
        dt: plan.dt,
    })
}

/// Effective-equation populations from `|g⟩` on the ensemble's record grid.
pub fn master_equation_populations(p: &AtomParams, noise: &NoiseParams, cfg: &EnsembleConfig) -> Result<Vec<[f64; 3]>> {
    let g = build_constructed(p, &compute_coeffs(p, noise));
    let traj = evolve_sampled(
        &g,
        &DensityVector8::ground(),
        cfg.t_end,
        cfg.dt,
        Some(cfg.n_records.max(1)),
    )?;
    Ok(traj
        .iter()
        .map(|(_, v)| {
            let (gg, ee, ss) = v.populations();
            [gg, ee, ss]
        })
        .collect())
}

/// Ensemble against effective equation at the final record time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub t_end: f64,
    pub ensemble: [f64; 3],
    pub std_err: [f64; 3],
    pub master: [f64; 3],
    /// `|ensemble − master| / std_err` per population.
    pub z_scores: [f64; 3],
}

impl OracleComparison {
    pub fn max_z(&self) -> f64 {
        self.z_scores.iter().cloned().fold(0.0, f64::max)
    }

    pub fn within(&self, n_sigma: f64) -> bool {
        self.max_z() <= n_sigma
    }
}

pub fn compare_with_master_equation(
    p: &AtomParams,
    noise: &NoiseParams,
    cfg: &EnsembleConfig,
) -> Result<(EnsembleResult, OracleComparison)> {
    let ens = ensemble_average(p, noise, cfg)?;
    let me = master_equation_populations(p, noise, cfg)?;
    let k = ens.mean.len() - 1;
    let mut z_scores = [0.0; 3];
    for c in 0..3 {
        let diff = (ens.mean[k][c] - me[k][c]).abs();
        let se = ens.std_err[k][c];
        z_scores[c] = if se > 0.0 {
            diff / se
        } else if diff <= 1e-9 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let cmp = OracleComparison {
        t_end: ens.t_grid[k],
        ensemble: ens.mean[k],
        std_err: ens.std_err[k],
        master: me[k],
        z_scores,
    };
    Ok((ens, cmp))
}
