//! Small dense helpers over nalgebra's fixed-size complex matrices.

use nalgebra::{Const, DMatrix, DimMin, SMatrix, SVector, Schur};

use crate::error::{Error, Result};
use crate::C64;

/// Condition estimate above which a solve is reported as singular.
pub(crate) const SINGULAR_COND: f64 = 1e14;
/// Condition estimate above which a warning is logged.
pub(crate) const WARN_COND: f64 = 1e12;

pub(crate) fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn norm1<const N: usize>(m: &SMatrix<C64, N, N>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub(crate) fn eigenvalues<const N: usize>(m: &SMatrix<C64, N, N>) -> Result<Vec<C64>> {
    let dense = DMatrix::from_column_slice(N, N, m.as_slice());
    let schur = Schur::try_new(dense, 1e-15, 10_000).ok_or(Error::EigenSolver)?;
    let (_, t) = schur.unpack();
    Ok((0..N).map(|i| t[(i, i)]).collect())
}

/// Solves `a x = rhs` by LU with partial pivoting.
///
/// Near-singular systems are rejected with the eigenvalue of `a` closest to
/// zero attached.
pub(crate) fn lu_solve<const N: usize>(a: &SMatrix<C64, N, N>, rhs: &SVector<C64, N>) -> Result<SVector<C64, N>>
where
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let lu = a.lu();
    let singular = || {
        let eigenvalue = eigenvalues(a)
            .ok()
            .and_then(|ev| ev.into_iter().min_by(|x, y| x.norm().total_cmp(&y.norm())))
            .unwrap_or(C64::new(0.0, 0.0));
        Error::Singular { eigenvalue }
    };
    let inv = lu.try_inverse().ok_or_else(singular)?;
    let cond = norm1(a) * norm1(&inv);
    if !cond.is_finite() || cond > SINGULAR_COND {
        return Err(singular());
    }
    if cond > WARN_COND {
        log::warn!("ill-conditioned {N}x{N} solve: condition estimate {cond:e}");
    }
    lu.solve(rhs).ok_or_else(singular)
}
