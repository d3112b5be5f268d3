//! Populations in the dressed basis of the coherent Hamiltonian: the secular
//! closed forms, their noise-free limits, and projections of the full
//! steady state.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{compute_coeffs, CoeffSet};
use crate::params::{AtomParams, NoiseParams};
use crate::pool::map_ordered;
use crate::steady::{PointFailure, PopulationPoint, SteadyState, SweepVariable};
use crate::C64;

/// Eigenkets of the coherent Hamiltonian in `(|g⟩, |e⟩, |s⟩)` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedBasis {
    pub ket_zero: Vector3<C64>,
    pub ket_plus: Vector3<C64>,
    pub ket_minus: Vector3<C64>,
}

impl DressedBasis {
    /// Kets in the order `|0⟩, |+⟩, |−⟩`.
    pub fn kets(&self) -> [&Vector3<C64>; 3] {
        [&self.ket_zero, &self.ket_plus, &self.ket_minus]
    }
}

pub fn dressed_basis(p: &AtomParams) -> Result<DressedBasis> {
    if !(p.omega > 0.0) {
        return Err(Error::invalid("omega", "must be > 0 for the dressed basis"));
    }
    let d = p.derived();
    let r = |x: f64| C64::new(x, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let ket = |lambda: f64, norm: f64| {
        let a = p.omega / lambda / norm;
        Vector3::new(r(a), r(1.0 / norm), r(a))
    };
    Ok(DressedBasis {
        ket_zero: Vector3::new(r(h), r(0.0), r(-h)),
        ket_plus: ket(d.lambda_plus, d.n_plus),
        ket_minus: ket(d.lambda_minus, d.n_minus),
    })
}

/// Effective rates between dressed levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSet {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
    pub g4: f64,
    pub c_term: f64,
    pub t_denom: f64,
}

pub fn gammas(p: &AtomParams, coeffs: &CoeffSet) -> GammaSet {
    let (g, gsg, o, dl) = (p.gamma, p.gamma_sg, p.omega, p.delta);
    let rr = p.rabi();
    let o2 = o * o;
    let rp = rr + dl;
    let rm = rr - dl;
    let c_term = coeffs.h_coef.re * (dl * dl + rr * rr) + 8.0 * o * (dl * coeffs.m_coef.re - o * coeffs.n_coef.re);
    let g1 = (2.0 * gsg * o2 + g * rp * rp) / (2.0 * rr * rp);
    let g2 = g1 + dl * (gsg - 4.0 * g) / (4.0 * rr);
    let g3 = (2.0 * o2 - rr * rp) * (g * rp * rp + 2.0 * gsg * o2) / (rr * rr * rp * rp) - c_term / (2.0 * rr * rr);
    let g4 = (2.0 * gsg * o2 + g * rm * rm) / (4.0 * rr * rr) + c_term / (2.0 * rr * rr);
    let t_denom = rr * rp * (4.0 * (g1 * g4 - g2 * g3) + gsg * (g4 - g3)) + 4.0 * o2 * gsg * (g2 - g1);
    GammaSet {
        g1,
        g2,
        g3,
        g4,
        c_term,
        t_denom,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DressedPopulations {
    pub p00: f64,
    pub ppp: f64,
    pub pmm: f64,
}

impl DressedPopulations {
    pub fn sum(&self) -> f64 {
        self.p00 + self.ppp + self.pmm
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.p00 - other.p00)
            .abs()
            .max((self.ppp - other.ppp).abs())
            .max((self.pmm - other.pmm).abs())
    }
}

const T_FLOOR: f64 = 1e-300;

/// Secular steady state from the effective rates.
pub fn closed_form_populations(g: &GammaSet, p: &AtomParams) -> Result<DressedPopulations> {
    if !(g.t_denom.abs() > T_FLOOR) || !g.t_denom.is_finite() {
        return Err(Error::NearZero {
            value: g.t_denom,
            context: "dressed population denominator",
        });
    }
    let rr = p.rabi();
    let rp = rr * (p.delta + rr);
    let o2 = p.omega * p.omega;
    Ok(DressedPopulations {
        p00: 4.0 * rp * (g.g1 * g.g4 - g.g2 * g.g3) / g.t_denom,
        ppp: p.gamma_sg * (4.0 * g.g2 * o2 + g.g4 * rp) / g.t_denom,
        pmm: -p.gamma_sg * (4.0 * g.g1 * o2 + g.g3 * rp) / g.t_denom,
    })
}

/// Closed forms without the stochastic field.
pub fn noise_free_limit(p: &AtomParams) -> DressedPopulations {
    let (g, gsg, o, dl) = (p.gamma, p.gamma_sg, p.omega, p.delta);
    let rr = p.rabi();
    let o2 = o * o;
    let a = 4.0 * g + gsg;
    let den = 4.0 * g * gsg * dl * dl + o2 * a * (4.0 * g + 3.0 * gsg);
    DressedPopulations {
        p00: (2.0 * g * gsg * dl * dl + o2 * a * a) / den,
        ppp: gsg * (o2 * a - g * dl * (rr - dl)) / den,
        pmm: gsg * (o2 * a + g * dl * (rr + dl)) / den,
    }
}

/// `⟨a|ρ|a⟩` for each dressed ket.
pub fn numeric_dressed_populations(ss: &SteadyState, basis: &DressedBasis) -> DressedPopulations {
    let m = ss.vec.to_matrix_unchecked();
    let [z, plus, minus] = basis.kets();
    DressedPopulations {
        p00: m.expectation_in(z),
        ppp: m.expectation_in(plus),
        pmm: m.expectation_in(minus),
    }
}

/// Secular closed form at one parameter point.
pub fn closed_form_at(p: &AtomParams, noise: &NoiseParams) -> Result<DressedPopulations> {
    p.validate()?;
    noise.validate()?;
    closed_form_populations(&gammas(p, &compute_coeffs(p, noise)), p)
}

/// Numerical and closed-form dressed populations along a sweep. Failed
/// points hold NaN in both columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DressedSweep {
    pub variable: SweepVariable,
    pub axis: Vec<f64>,
    pub numeric: Vec<DressedPopulations>,
    pub closed_form: Vec<DressedPopulations>,
    pub failures: Vec<PointFailure>,
    pub atom: AtomParams,
    pub noise: NoiseParams,
}

impl DressedSweep {
    /// Largest secular-vs-full difference over the finite points.
    pub fn max_secular_gap(&self) -> f64 {
        self.numeric
            .iter()
            .zip(&self.closed_form)
            .map(|(a, b)| a.max_abs_diff(b))
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max)
    }
}

const NAN_POPS: DressedPopulations = DressedPopulations {
    p00: f64::NAN,
    ppp: f64::NAN,
    pmm: f64::NAN,
};

pub fn dressed_sweep(p: &AtomParams, noise: &NoiseParams, variable: SweepVariable, grid: &[f64]) -> DressedSweep {
    let points = map_ordered(grid, |_, &x| {
        let (pp, nn) = variable.apply(p, noise, x);
        let numeric = PopulationPoint::compute(&pp, &nn)?.dressed;
        Ok::<_, Error>((numeric, closed_form_at(&pp, &nn)?))
    });
    let mut out = DressedSweep {
        variable,
        axis: grid.to_vec(),
        numeric: Vec::with_capacity(grid.len()),
        closed_form: Vec::with_capacity(grid.len()),
        failures: Vec::new(),
        atom: *p,
        noise: *noise,
    };
    for (index, (r, &axis)) in points.into_iter().zip(grid).enumerate() {
        match r {
            Ok((a, b)) => {
                out.numeric.push(a);
                out.closed_form.push(b);
            }
            Err(e) => {
                out.numeric.push(NAN_POPS);
                out.closed_form.push(NAN_POPS);
                out.failures.push(PointFailure {
                    index,
                    axis,
                    code: e.code().to_string(),
                    message: e.to_string(),
                });
            }
        }
    }
    out
}
