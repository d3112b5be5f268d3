//! Physical configuration of the atom and the stochastic field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_GAMMA: f64 = 1.0;
pub const DEFAULT_GAMMA_SG: f64 = 1e-3;
pub const DEFAULT_KAPPA: f64 = 60.0;
pub const DEFAULT_MU_SQ: f64 = 1.0;

/// Atom and coherent-drive parameters. All rates in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    /// Spontaneous decay rate of `|e⟩` into each ground state.
    pub gamma: f64,
    /// Ground-state decoherence rate.
    pub gamma_sg: f64,
    /// Rabi frequency of the coherent drive (equal on both arms).
    pub omega: f64,
    /// Single-photon detuning.
    pub delta: f64,
    /// Squared dipole magnitude, scales the spectrum only.
    pub mu_sq: f64,
}

impl AtomParams {
    /// Drive with the given Rabi frequency and detuning, default rates.
    pub fn new(omega: f64, delta: f64) -> Self {
        AtomParams {
            gamma: DEFAULT_GAMMA,
            gamma_sg: DEFAULT_GAMMA_SG,
            omega,
            delta,
            mu_sq: DEFAULT_MU_SQ,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_gamma_sg(mut self, gamma_sg: f64) -> Self {
        self.gamma_sg = gamma_sg;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("gamma", self.gamma)?;
        check_finite("gamma_sg", self.gamma_sg)?;
        check_finite("omega", self.omega)?;
        check_finite("delta", self.delta)?;
        check_finite("mu_sq", self.mu_sq)?;
        if self.gamma <= 0.0 {
            return Err(Error::invalid("gamma", "must be > 0"));
        }
        if self.gamma_sg < 0.0 {
            return Err(Error::invalid("gamma_sg", "must be ≥ 0"));
        }
        if self.omega <= 0.0 {
            return Err(Error::invalid("omega", "must be > 0"));
        }
        if self.mu_sq <= 0.0 {
            return Err(Error::invalid("mu_sq", "must be > 0"));
        }
        Ok(())
    }

    pub fn rabi(&self) -> f64 {
        generalized_rabi(self)
    }

    pub fn derived(&self) -> DerivedQuantities {
        DerivedQuantities::from_params(self)
    }
}

/// Stochastic-field parameters. All in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Strength `D`; the field autocorrelation is `D κ e^{-κ|τ|}`.
    pub dd: f64,
    /// Bandwidth `κ`.
    pub kappa: f64,
    /// Central-frequency offset `η = ω_s − ω_L`.
    pub eta: f64,
}

impl NoiseParams {
    pub fn new(dd: f64, eta: f64) -> Self {
        NoiseParams {
            dd,
            kappa: DEFAULT_KAPPA,
            eta,
        }
    }

    pub fn noiseless() -> Self {
        NoiseParams::new(0.0, 0.0)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_finite("dd", self.dd)?;
        check_finite("kappa", self.kappa)?;
        check_finite("eta", self.eta)?;
        if self.dd < 0.0 {
            return Err(Error::invalid("dd", "must be ≥ 0"));
        }
        if self.kappa <= 0.0 {
            return Err(Error::invalid("kappa", "must be > 0"));
        }
        Ok(())
    }
}

fn check_finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite, got {v}")))
    }
}

/// Generalized Rabi frequency `R = √(Δ² + 8Ω²)`.
pub fn generalized_rabi(p: &AtomParams) -> f64 {
    (p.delta * p.delta + 8.0 * p.omega * p.omega).sqrt()
}

/// Dressed-state eigenvalues and normalisations of the coherent Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub rr: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub lambda_zero: f64,
    pub n_plus: f64,
    pub n_minus: f64,
}

impl DerivedQuantities {
    pub fn from_params(p: &AtomParams) -> Self {
        let rr = generalized_rabi(p);
        let lambda_plus = 0.5 * (p.delta + rr);
        let lambda_minus = 0.5 * (p.delta - rr);
        let norm = |l: f64| (1.0 + 2.0 * p.omega * p.omega / (l * l)).sqrt();
        DerivedQuantities {
            rr,
            lambda_plus,
            lambda_minus,
            lambda_zero: 0.0,
            n_plus: norm(lambda_plus),
            n_minus: norm(lambda_minus),
        }
    }
}
