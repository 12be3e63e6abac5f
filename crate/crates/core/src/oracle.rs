//! Finite-difference references for equilibrium and eigenvalue
//! sensitivities, computed by re-solving the equilibrium and
//! re-decomposing its Jacobian at shifted parameters.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynsys::{DiffBackend, ParamModel};
use crate::equilibria::{newton_solve, Equilibrium};
use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 100;

/// `dx*/dp` (states by parameters) and `d lambda_i / dp` (eigenvalues by
/// parameters) by central differences.
#[derive(Debug, Clone)]
pub struct FdSensitivities {
    pub dx: DMatrix<f64>,
    pub dlambda: DMatrix<Complex64>,
}

fn shifted<M: ParamModel + ?Sized>(
    model: &M,
    eq: &Equilibrium,
    params: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<Equilibrium> {
    model.check_params(params)?;
    let root = newton_solve(model, &eq.x, params, backend, NEWTON_TOL, NEWTON_MAX_ITER)
        .ok_or_else(|| Error::ContinuationLost("oracle re-solve did not converge".into()))?;
    Equilibrium::at(model, root.x, params, backend)
}

fn nearest(values: &[Complex64], target: Complex64) -> Complex64 {
    values
        .iter()
        .copied()
        .min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
        .expect("non-empty spectrum")
}

/// Central differences with step `rel_step * max(1, |p_j|)` on every
/// parameter. Eigenvalues at the shifted points are paired with those of
/// `eq` by proximity, which requires a simple spectrum.
pub fn fd_sensitivities<M: ParamModel + ?Sized>(
    model: &M,
    eq: &Equilibrium,
    params: &DVector<f64>,
    backend: &DiffBackend,
    rel_step: f64,
) -> Result<FdSensitivities> {
    let n = eq.x.len();
    let m = params.len();
    let mut dx = DMatrix::zeros(n, m);
    let mut dlambda = DMatrix::from_element(eq.eigenvalues.len(), m, Complex64::new(0.0, 0.0));
    for j in 0..m {
        let h = rel_step * params[j].abs().max(1.0);
        let mut plus = params.clone();
        plus[j] += h;
        let mut minus = params.clone();
        minus[j] -= h;
        let ep = shifted(model, eq, &plus, backend)?;
        let em = shifted(model, eq, &minus, backend)?;
        dx.set_column(j, &((&ep.x - &em.x) / (2.0 * h)));
        for (i, l) in eq.eigenvalues.iter().enumerate() {
            let lp = nearest(&ep.eigenvalues, *l);
            let lm = nearest(&em.eigenvalues, *l);
            dlambda[(i, j)] = (lp - lm) / (2.0 * h);
        }
    }
    Ok(FdSensitivities { dx, dlambda })
}

/// Worst relative error over the columns of `approx` against `reference`:
/// `max_j ||a_j - r_j|| / max(||r_j||, floor)`.
pub fn max_column_error<T>(approx: &DMatrix<T>, reference: &DMatrix<T>, floor: f64) -> f64
where
    T: nalgebra::ComplexField<RealField = f64>,
{
    assert_eq!(approx.shape(), reference.shape());
    (0..reference.ncols())
        .map(|j| {
            let diff = (approx.column(j) - reference.column(j)).norm();
            diff / reference.column(j).norm().max(floor)
        })
        .fold(0.0, f64::max)
}
