//! Simulation of a three-level Λ atom driven by a strong coherent field and a
//! weak, finite-bandwidth Gaussian–Markov (Ornstein–Uhlenbeck) stochastic field.
//!
//! The crate is organised bottom-up:
//!
//! - [`params`]: physical parameters and derived dressed-state quantities.
//! - [`density`]: the 8-component state vector and its 3×3 density matrix.
//! - [`noise`]: line-shape factors `f(n)`, the coupling coefficients `M`, `N`,
//!   `H`, and the `Z±` operators of the effective master equation.
//! - [`liouvillian`]: the affine generator `dρ/dt = Qρ + B`, built from the
//!   superoperator and from the closed-form matrix, plus stability analysis.
//! - [`steady`]: steady states, RK4 evolution, and parameter sweeps.
//! - [`dressed`]: dressed-basis populations (secular closed forms and numerics).
//! - [`spectrum`]: incoherent resonance-fluorescence spectrum via the quantum
//!   regression theorem.
//! - [`trajectory`]: microscopic stochastic-field trajectories used as an
//!   independent check of the effective master equation.
//! - [`output`]: CSV and JSON sidecar writers.
//!
//! Frequencies and rates are angular and in MHz; times are in µs.

pub mod density;
pub mod dressed;
pub mod error;
pub mod liouvillian;
pub mod noise;
pub mod operators;
pub mod output;
pub mod params;
pub mod spectrum;
pub mod steady;
pub mod trajectory;

mod linalg;
mod pool;

pub use density::{DensityMatrix3, DensityVector8};
pub use error::{Error, Result};
pub use liouvillian::AffineGenerator;
pub use noise::CoeffSet;
pub use params::{AtomParams, DerivedQuantities, NoiseParams};

/// Double-precision complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Crate version recorded in output sidecars.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
