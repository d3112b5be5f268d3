//! Atomic operators and the coherent and dissipative parts of the dynamics.

use nalgebra::Matrix3;

use crate::density::{E, G, S};
use crate::params::AtomParams;
use crate::C64;

pub type Op3 = Matrix3<C64>;

/// Transition operator `σ_ij = |i⟩⟨j|`.
pub fn sigma(i: usize, j: usize) -> Op3 {
    let mut m = Op3::zeros();
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// `H_Λ = Δ σ_ee + Ω (σ_eg + σ_es + h.c.)` in the frame rotating at the laser
/// frequency.
pub fn hamiltonian(p: &AtomParams) -> Op3 {
    let o = C64::new(p.omega, 0.0);
    let mut h = Op3::zeros();
    h[(E, E)] = C64::new(p.delta, 0.0);
    h[(E, G)] = o;
    h[(G, E)] = o;
    h[(E, S)] = o;
    h[(S, E)] = o;
    h
}

/// `σ_eg + σ_es`, the operator the stochastic field couples through.
pub fn raising() -> Op3 {
    sigma(E, G) + sigma(E, S)
}

pub fn commutator(a: &Op3, b: &Op3) -> Op3 {
    a * b - b * a
}

pub fn anticommutator(a: &Op3, b: &Op3) -> Op3 {
    a * b + b * a
}

/// Spontaneous emission from `|e⟩` into both ground states at rate `γ`, and
/// ground-state relaxation `|s⟩ → |g⟩` at rate `γ_sg`.
pub fn dissipator(p: &AtomParams, rho: &Op3) -> Op3 {
    let ee = rho[(E, E)];
    let ss = rho[(S, S)];
    let loss = |i: usize| match i {
        E => p.gamma,
        S => 0.5 * p.gamma_sg,
        _ => 0.0,
    };
    let mut out = Op3::from_fn(|i, j| -rho[(i, j)] * (loss(i) + loss(j)));
    out[(G, G)] += ee * p.gamma + ss * p.gamma_sg;
    out[(S, S)] += ee * p.gamma;
    out
}

/// `−i[H, ρ] + L_A ρ`.
pub fn coherent_and_dissipative(h: &Op3, p: &AtomParams, rho: &Op3) -> Op3 {
    commutator(h, rho) * C64::new(0.0, -1.0) + dissipator(p, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dissipator_matches_operator_form() {
        let p = AtomParams::new(1.0, 0.0).with_gamma(1.3).with_gamma_sg(0.2);
        let rho = Op3::from_fn(|i, j| C64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let g = C64::new(p.gamma, 0.0);
        let gs = C64::new(p.gamma_sg, 0.0);
        let want = (sigma(G, E) * rho * sigma(E, G) + sigma(S, E) * rho * sigma(E, S)
            - anticommutator(&sigma(E, E), &rho))
            * g
            + (sigma(G, S) * rho * sigma(S, G) - anticommutator(&sigma(S, S), &rho) * C64::new(0.5, 0.0)) * gs;
        assert!(crate::linalg::max_abs(&(dissipator(&p, &rho) - want)) < 1e-15);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let h = hamiltonian(&AtomParams::new(3.0, -2.0));
        assert_eq!(h, h.adjoint());
    }
}
