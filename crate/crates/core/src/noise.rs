//! Stochastic-field line shapes and the coupling coefficients `M`, `N`, `H`.
//!
//! The field enters the effective master equation through
//! `Z₋ = [[M, H, M], [N, −2M, N], [M, H, M]]` and `Z₊ = Z₋†`, where each
//! coefficient mixes the Lorentzian factors `f(n) = Dκ / (κ + i(η + nR))`
//! sampled at the dressed-state splittings `0` and `±R`.

use serde::{Deserialize, Serialize};

use crate::operators::Op3;
use crate::params::{generalized_rabi, AtomParams, NoiseParams};
use crate::C64;

/// Dressed-frequency offset `n ∈ {−1, 0, 1}` at which the noise spectrum is
/// sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sideband {
    Lower = -1,
    Center = 0,
    Upper = 1,
}

impl Sideband {
    pub fn n(self) -> f64 {
        self as i32 as f64
    }
}

/// `f(n) = Dκ / (κ + i(η + nR))`.
pub fn f_n(noise: &NoiseParams, rr: f64, n: Sideband) -> C64 {
    C64::new(noise.dd * noise.kappa, 0.0) / C64::new(noise.kappa, noise.eta + n.n() * rr)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffSet {
    pub m_coef: C64,
    pub n_coef: C64,
    pub h_coef: C64,
    pub f_minus: C64,
    pub f_zero: C64,
    pub f_plus: C64,
}

impl CoeffSet {
    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        CoeffSet {
            m_coef: z,
            n_coef: z,
            h_coef: z,
            f_minus: z,
            f_zero: z,
            f_plus: z,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.m_coef,
            self.n_coef,
            self.h_coef,
            self.f_minus,
            self.f_zero,
            self.f_plus,
        ]
        .iter()
        .all(|z| z.is_finite())
    }
}

pub fn compute_coeffs(p: &AtomParams, noise: &NoiseParams) -> CoeffSet {
    if noise.dd == 0.0 {
        return CoeffSet::zero();
    }
    let rr = generalized_rabi(p);
    let (delta, omega) = (p.delta, p.omega);
    let fm = f_n(noise, rr, Sideband::Lower);
    let f0 = f_n(noise, rr, Sideband::Center);
    let fp = f_n(noise, rr, Sideband::Upper);
    let r2 = rr * rr;

    let m_coef = (fm * (delta + rr) - f0 * (2.0 * delta) + fp * (delta - rr)) * (omega / (2.0 * r2));
    let n_coef = (-fm + f0 * 2.0 - fp) * (2.0 * omega * omega / r2);
    let h_coef = (fm * (rr + delta).powi(2) + f0 * (16.0 * omega * omega) + fp * (rr - delta).powi(2)) / (4.0 * r2);

    CoeffSet {
        m_coef,
        n_coef,
        h_coef,
        f_minus: fm,
        f_zero: f0,
        f_plus: fp,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZMatrices {
    pub z_minus: Op3,
    pub z_plus: Op3,
}

pub fn build_z(c: &CoeffSet) -> ZMatrices {
    let (m, n, h) = (c.m_coef, c.n_coef, c.h_coef);
    #[rustfmt::skip]
    let z_minus = Op3::new(
        m, h,        m,
        n, m * -2.0, n,
        m, h,        m,
    );
    ZMatrices {
        z_minus,
        z_plus: z_minus.adjoint(),
    }
}
