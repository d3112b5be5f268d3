//! Reduced atomic state in vectorised (8 entries) and matrix (3×3) form.
//!
//! Basis order is `(|g⟩, |e⟩, |s⟩)`. The vector holds
//! `[ρ_gg, ρ_ge, ρ_gs, ρ_eg, ρ_ee, ρ_es, ρ_sg, ρ_se]`; `ρ_ss` is eliminated by
//! the trace condition.

use nalgebra::{Matrix3, SVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Basis indices.
pub const G: usize = 0;
pub const E: usize = 1;
pub const S: usize = 2;

/// Matrix element `(row, col)` stored at each slot of the 8-vector.
pub const SLOTS: [(usize, usize); 8] = [(G, G), (G, E), (G, S), (E, G), (E, E), (E, S), (S, G), (S, E)];

pub const GG: usize = 0;
pub const GE: usize = 1;
pub const GS: usize = 2;
pub const EG: usize = 3;
pub const EE: usize = 4;
pub const ES: usize = 5;
pub const SG: usize = 6;
pub const SE: usize = 7;

/// Slot pairs related by complex conjugation in a Hermitian state.
pub const CONJUGATE_PAIRS: [(usize, usize); 3] = [(GE, EG), (GS, SG), (ES, SE)];

/// Default absolute tolerance for invariant checks.
pub const TOL: f64 = 1e-9;
/// Smallest eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-8;

pub type Vector8 = SVector<C64, 8>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityVector8(pub Vector8);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix3(pub Matrix3<C64>);

impl DensityVector8 {
    pub fn from_slice(v: &[C64; 8]) -> Self {
        DensityVector8(Vector8::from_column_slice(v))
    }

    pub fn zeros() -> Self {
        DensityVector8(Vector8::zeros())
    }

    pub fn ground() -> Self {
        let mut v = Vector8::zeros();
        v[GG] = C64::new(1.0, 0.0);
        DensityVector8(v)
    }

    /// Largest `|ρ_ij − conj(ρ_ji)|` over the paired slots, including the
    /// imaginary parts of the two stored populations.
    pub fn pairing_error(&self) -> f64 {
        let v = &self.0;
        CONJUGATE_PAIRS
            .iter()
            .map(|&(a, b)| (v[a] - v[b].conj()).norm())
            .chain([v[GG].im.abs(), v[EE].im.abs()])
            .fold(0.0, f64::max)
    }

    /// `(ρ_gg, ρ_ee, ρ_ss)`, summing to one by construction.
    pub fn populations(&self) -> (f64, f64, f64) {
        let gg = self.0[GG].re;
        let ee = self.0[EE].re;
        (gg, ee, 1.0 - gg - ee)
    }

    /// Rebuilds the 3×3 matrix with `ρ_ss = 1 − ρ_gg − ρ_ee`, no checks.
    pub fn to_matrix_unchecked(&self) -> DensityMatrix3 {
        let mut m = Matrix3::zeros();
        for (k, &(i, j)) in SLOTS.iter().enumerate() {
            m[(i, j)] = self.0[k];
        }
        m[(S, S)] = C64::new(1.0, 0.0) - self.0[GG] - self.0[EE];
        DensityMatrix3(m)
    }
}

impl DensityMatrix3 {
    pub fn from_ket(ket: &Vector3<C64>) -> Self {
        DensityMatrix3(ket * ket.adjoint())
    }

    pub fn basis_state(index: usize) -> Self {
        let mut m = Matrix3::zeros();
        m[(index, index)] = C64::new(1.0, 0.0);
        DensityMatrix3(m)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        crate::linalg::max_abs(&(self.0 - self.0.adjoint()))
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let h = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues().min()
    }

    /// Checks Hermiticity, unit trace, and positivity at the given tolerances.
    pub fn check_physical(&self, tol: f64, psd_tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::NotPhysical(format!("hermiticity violated by {herm:e}")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > tol {
            return Err(Error::Trace { trace: tr.re, tol });
        }
        let min = self.min_eigenvalue();
        if min < -psd_tol {
            return Err(Error::NotPhysical(format!(
                "smallest eigenvalue {min:e} below -{psd_tol:e}"
            )));
        }
        Ok(())
    }

    /// Diagonal element `⟨a|ρ|a⟩` for a normalised ket.
    pub fn expectation_in(&self, ket: &Vector3<C64>) -> f64 {
        (ket.adjoint() * self.0 * ket)[(0, 0)].re
    }
}

/// 8-vector to 3×3 matrix, rejecting unpaired or non-positive states.
pub fn vec_to_mat(v: &DensityVector8) -> Result<DensityMatrix3> {
    let pairing = v.pairing_error();
    if pairing > TOL {
        return Err(Error::NotPhysical(format!("conjugate pairing violated by {pairing:e}")));
    }
    let m = v.to_matrix_unchecked();
    m.check_physical(TOL, PSD_TOL)?;
    Ok(m)
}

/// 3×3 matrix to 8-vector; the trace must be one within `1e-9`.
pub fn mat_to_vec(m: &DensityMatrix3) -> Result<DensityVector8> {
    let tr = m.trace();
    if (tr - 1.0).norm() > TOL {
        return Err(Error::Trace { trace: tr.re, tol: TOL });
    }
    let mut v = Vector8::zeros();
    for (k, &(i, j)) in SLOTS.iter().enumerate() {
        v[k] = m.0[(i, j)];
    }
    Ok(DensityVector8(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pure_ground_and_excited() {
        let m = vec_to_mat(&DensityVector8::ground()).unwrap();
        assert_eq!(m, DensityMatrix3::basis_state(G));

        let mut v = Vector8::zeros();
        v[EE] = c(1.0);
        let m = vec_to_mat(&DensityVector8(v)).unwrap();
        assert_eq!(m, DensityMatrix3::basis_state(E));
        assert_eq!(m.0[(S, S)], c(0.0));
    }

    #[test]
    fn trace_closure() {
        let mut v = Vector8::zeros();
        v[GG] = c(0.4);
        v[EE] = c(0.1);
        let m = vec_to_mat(&DensityVector8(v)).unwrap();
        assert!((m.0[(G, G)] - 0.4).norm() < 1e-15);
        assert!((m.0[(E, E)] - 0.1).norm() < 1e-15);
        assert!((m.0[(S, S)] - 0.5).norm() < 1e-15);
    }

    #[test]
    fn maximally_mixed_to_vec() {
        let m = DensityMatrix3(Matrix3::identity() / c(3.0));
        let v = mat_to_vec(&m).unwrap();
        let mut want = Vector8::zeros();
        want[GG] = c(1.0 / 3.0);
        want[EE] = c(1.0 / 3.0);
        assert_eq!(v.0, want);
        assert_eq!(
            mat_to_vec(&DensityMatrix3::basis_state(G)).unwrap(),
            DensityVector8::ground()
        );
    }

    #[test]
    fn rejects_bad_trace() {
        let m = DensityMatrix3(Matrix3::identity() / c(2.0));
        assert!(matches!(mat_to_vec(&m), Err(Error::Trace { .. })));
    }

    #[test]
    fn rejects_unpaired_and_negative() {
        let mut v = DensityVector8::ground();
        v.0[GE] = C64::new(0.1, 0.0);
        assert!(vec_to_mat(&v).is_err());
        v.0[EG] = C64::new(0.1, 0.0);
        // |g⟩⟨g| with a coherence to an empty level is not positive
        assert!(matches!(vec_to_mat(&v), Err(Error::NotPhysical(_))));
        let mut v = Vector8::zeros();
        v[GG] = c(1.2);
        assert!(vec_to_mat(&DensityVector8(v)).is_err());
    }

    fn random_state() -> impl Strategy<Value = DensityMatrix3> {
        proptest::collection::vec(-1.0f64..1.0, 18).prop_map(|x| {
            let a = Matrix3::from_fn(|i, j| C64::new(x[3 * i + j], x[9 + 3 * i + j]));
            let m = a * a.adjoint();
            let tr = m.trace();
            DensityMatrix3(m / tr)
        })
    }

    proptest! {
        #[test]
        fn round_trips(m in random_state()) {
            prop_assume!((m.trace() - 1.0).norm() < 1e-12);
            let v = mat_to_vec(&m).unwrap();
            let back = v.to_matrix_unchecked();
            prop_assert!(crate::linalg::max_abs(&(back.0 - m.0)) < 1e-12);
            prop_assert_eq!(mat_to_vec(&back).unwrap(), v);
            prop_assert!(vec_to_mat(&v).is_ok());
        }
    }
}
