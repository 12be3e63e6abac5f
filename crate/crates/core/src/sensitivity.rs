//! Parameter sensitivities of equilibria, eigenvalues and saddle distances.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynsys::{jacobian_pi, total_jacobian_derivative, DiffBackend, ParamModel};
use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};

/// Gradients with norm at or below this are treated as stationary.
pub const STATIONARY_TOL: f64 = 1e-12;
const MAX_CONDITION: f64 = 1e12;
const SIMPLICITY_TOL: f64 = 1e-8;
const ORTHOGONALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectiveKind {
    Eigenvalue { eigen_index: usize },
    SaddleDistance,
    MeanSaddleDistance { saddles: usize },
}

/// Gradient of one scalar objective with respect to the parameters, plus the
/// unit direction that improves it: steepest descent for eigenvalues,
/// steepest ascent for distances.
#[derive(Debug, Clone)]
pub struct ObjectiveGradient {
    pub kind: ObjectiveKind,
    pub grad: DVector<f64>,
    /// `None` when `||grad|| <= STATIONARY_TOL`.
    pub direction: Option<DVector<f64>>,
    /// Set when the gradient was taken from the real part of a complex
    /// eigenvalue.
    pub complex: bool,
}

impl ObjectiveGradient {
    fn descent(kind: ObjectiveKind, grad: DVector<f64>, complex: bool) -> Self {
        let norm = grad.norm();
        let direction = (norm > STATIONARY_TOL).then(|| -&grad / norm);
        Self {
            kind,
            grad,
            direction,
            complex,
        }
    }

    fn ascent(kind: ObjectiveKind, grad: DVector<f64>) -> Self {
        let norm = grad.norm();
        let direction = (norm > STATIONARY_TOL).then(|| &grad / norm);
        Self {
            kind,
            grad,
            direction,
            complex: false,
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.direction.is_none()
    }
}

/// `dx*/dp = -J^{-1} dF/dp`, one column per parameter.
pub fn equilibrium_sensitivity<M: ParamModel + ?Sized>(
    model: &M,
    eq: &Equilibrium,
    params: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<DMatrix<f64>> {
    let jac = &eq.jacobian;
    let sv = jac.singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let cond = if smin > 0.0 {
        smax.max(1.0) / smin
    } else {
        f64::INFINITY
    };
    if cond > MAX_CONDITION {
        return Err(Error::SingularJacobian(cond));
    }
    let dfdp = jacobian_pi(model, &eq.x, params, backend)?;
    let lu = jac.clone().lu();
    lu.solve(&(-dfdp)).ok_or(Error::SingularJacobian(cond))
}

/// `D_j J` for every parameter `j`, given the equilibrium sensitivity.
pub fn jacobian_total_derivatives<M: ParamModel + ?Sized>(
    model: &M,
    eq: &Equilibrium,
    params: &DVector<f64>,
    sensitivity: &DMatrix<f64>,
    backend: &DiffBackend,
) -> Result<Vec<DMatrix<f64>>> {
    (0..params.len())
        .map(|j| {
            let dx: DVector<f64> = sensitivity.column(j).into_owned();
            total_jacobian_derivative(model, &eq.x, params, j, &dx, backend)
        })
        .collect()
}

fn check_simple(eq: &Equilibrium, index: usize) -> Result<()> {
    if index >= eq.eigenvalues.len() {
        return Err(Error::InvalidInput(format!(
            "eigen index {index} out of range"
        )));
    }
    let l = eq.eigenvalues[index];
    let degenerate = eq
        .eigenvalues
        .iter()
        .enumerate()
        .any(|(k, &mu)| k != index && (l - mu).norm() <= SIMPLICITY_TOL);
    if degenerate {
        Err(Error::DegenerateEigenvalue { index })
    } else {
        Ok(())
    }
}

/// `w^T D v / (w^T v)` for eigenpair `index` of `eq`.
fn eigen_quotient(eq: &Equilibrium, index: usize, d_jac: &DMatrix<f64>) -> Result<Complex64> {
    let v = &eq.right_eigenvectors[index];
    let w = &eq.left_eigenvectors[index];
    let wv = w.dot(v);
    if wv.norm() < ORTHOGONALITY_TOL * w.norm() * v.norm() {
        return Err(Error::NearOrthogonalPair { index });
    }
    let dc = d_jac.map(|x| Complex64::new(x, 0.0));
    Ok(w.dot(&(dc * v)) / wv)
}

/// Total derivative of eigenvalue `eigen_index` of `eq` with respect to
/// parameter `param_index`, following the equilibrium as it moves.
pub fn eigenvalue_total_derivative<M: ParamModel + ?Sized>(
    model: &M,
    eq: &Equilibrium,
    params: &DVector<f64>,
    eigen_index: usize,
    param_index: usize,
    backend: &DiffBackend,
) -> Result<Complex64> {
    check_simple(eq, eigen_index)?;
    let sens = equilibrium_sensitivity(model, eq, params, backend)?;
    let dx: DVector<f64> = sens.column(param_index).into_owned();
    let d_jac = total_jacobian_derivative(model, &eq.x, params, param_index, &dx, backend)?;
    eigen_quotient(eq, eigen_index, &d_jac)
}

/// Gradients of several eigenvalues of one equilibrium, sharing the
/// sensitivity solve and the `D_j J` matrices.
pub fn eigenvalue_gradients<M: ParamModel + ?Sized>(
    model: &M,
    eq: &Equilibrium,
    params: &DVector<f64>,
    eigen_indices: &[usize],
    backend: &DiffBackend,
) -> Result<Vec<ObjectiveGradient>> {
    for &i in eigen_indices {
        check_simple(eq, i)?;
    }
    let sens = equilibrium_sensitivity(model, eq, params, backend)?;
    let d_jacs = jacobian_total_derivatives(model, eq, params, &sens, backend)?;
    eigen_indices
        .iter()
        .map(|&i| {
            let complex = eq.is_complex(i);
            let grad = d_jacs
                .iter()
                .map(|d| eigen_quotient(eq, i, d).map(|c| c.re))
                .collect::<Result<Vec<f64>>>()?;
            Ok(ObjectiveGradient::descent(
                ObjectiveKind::Eigenvalue { eigen_index: i },
                DVector::from_vec(grad),
                complex,
            ))
        })
        .collect()
}

/// Total derivatives of every eigenvalue of `eq` (rows) with respect to
/// every parameter (columns).
pub fn eigenvalue_derivative_matrix<M: ParamModel + ?Sized>(
    model: &M,
    eq: &Equilibrium,
    params: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<DMatrix<Complex64>> {
    let n = eq.eigenvalues.len();
    for i in 0..n {
        check_simple(eq, i)?;
    }
    let sens = equilibrium_sensitivity(model, eq, params, backend)?;
    let d_jacs = jacobian_total_derivatives(model, eq, params, &sens, backend)?;
    let mut out = DMatrix::from_element(n, params.len(), Complex64::new(0.0, 0.0));
    for i in 0..n {
        for (j, d) in d_jacs.iter().enumerate() {
            out[(i, j)] = eigen_quotient(eq, i, d)?;
        }
    }
    Ok(out)
}

/// Gradient of `Re(lambda_i)` and its steepest-descent direction.
pub fn eigenvalue_gradient<M: ParamModel + ?Sized>(
    model: &M,
    eq: &Equilibrium,
    params: &DVector<f64>,
    eigen_index: usize,
    backend: &DiffBackend,
) -> Result<ObjectiveGradient> {
    Ok(eigenvalue_gradients(model, eq, params, &[eigen_index], backend)?.remove(0))
}

/// Euclidean distance between a saddle and an attractor.
pub fn saddle_distance(saddle: &Equilibrium, attractor: &Equilibrium) -> f64 {
    (&saddle.x - &attractor.x).norm()
}

fn squared_distance_grad(
    saddle: &Equilibrium,
    attractor: &Equilibrium,
    saddle_sens: &DMatrix<f64>,
    attractor_sens: &DMatrix<f64>,
) -> DVector<f64> {
    let diff = &saddle.x - &attractor.x;
    (saddle_sens - attractor_sens).transpose() * diff * 2.0
}

/// Gradient of the squared saddle-attractor distance,
/// `2 (s - x0)^T (ds/dp - dx0/dp)`, with its unit ascent direction. The
/// direction coincides with that of the plain distance.
pub fn saddle_distance_gradient<M: ParamModel + ?Sized>(
    model: &M,
    saddle: &Equilibrium,
    attractor: &Equilibrium,
    params: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<ObjectiveGradient> {
    let ss = equilibrium_sensitivity(model, saddle, params, backend)?;
    let sx = equilibrium_sensitivity(model, attractor, params, backend)?;
    Ok(ObjectiveGradient::ascent(
        ObjectiveKind::SaddleDistance,
        squared_distance_grad(saddle, attractor, &ss, &sx),
    ))
}

/// Gradient of the plain distance `||s - x0||`; zero when the points coincide.
pub fn euclidean_distance_gradient<M: ParamModel + ?Sized>(
    model: &M,
    saddle: &Equilibrium,
    attractor: &Equilibrium,
    params: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<DVector<f64>> {
    let g = saddle_distance(saddle, attractor);
    let sq = saddle_distance_gradient(model, saddle, attractor, params, backend)?;
    if g == 0.0 {
        return Ok(DVector::zeros(params.len()));
    }
    Ok(sq.grad / (2.0 * g))
}

/// Mean of the squared-distance gradients over `saddles`.
pub fn mean_saddle_distance_gradient<M: ParamModel + ?Sized>(
    model: &M,
    saddles: &[&Equilibrium],
    attractor: &Equilibrium,
    params: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<ObjectiveGradient> {
    if saddles.is_empty() {
        return Err(Error::InvalidInput("no saddles given".into()));
    }
    let sx = equilibrium_sensitivity(model, attractor, params, backend)?;
    let mut sum = DVector::zeros(params.len());
    for s in saddles {
        let ss = equilibrium_sensitivity(model, s, params, backend)?;
        sum += squared_distance_grad(s, attractor, &ss, &sx);
    }
    Ok(ObjectiveGradient::ascent(
        ObjectiveKind::MeanSaddleDistance {
            saddles: saddles.len(),
        },
        sum / saddles.len() as f64,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::ClosureModel;
    use crate::equilibria::Equilibrium;

    fn backend() -> DiffBackend {
        DiffBackend::default()
    }

    #[test]
    fn relaxation_sensitivity_is_one() {
        let m = ClosureModel::new(1, &["p"], |x, p| DVector::from_element(1, p[0] - x[0]));
        let p = DVector::from_element(1, 0.4);
        let eq = Equilibrium::at(&m, DVector::from_element(1, 0.4), &p, &backend()).unwrap();
        let s = equilibrium_sensitivity(&m, &eq, &p, &backend()).unwrap();
        assert!((s[(0, 0)] - 1.0).abs() < 1e-9);
        let d = eigenvalue_total_derivative(&m, &eq, &p, 0, 0, &backend()).unwrap();
        assert!(d.norm() < 1e-8);
    }

    #[test]
    fn quotient_rule_sensitivity() {
        // dx/dt = p1 - p2 x, x* = p1 / p2
        let m = ClosureModel::new(1, &["p1", "p2"], |x, p| {
            DVector::from_element(1, p[0] - p[1] * x[0])
        });
        let p = DVector::from_vec(vec![1.0, 2.0]);
        let eq = Equilibrium::at(&m, DVector::from_element(1, 0.5), &p, &backend()).unwrap();
        let s = equilibrium_sensitivity(&m, &eq, &p, &backend()).unwrap();
        assert!((s[(0, 0)] - 0.5).abs() < 1e-9);
        assert!((s[(0, 1)] + 0.25).abs() < 1e-9);
    }

    #[test]
    fn linear_decay_eigenvalue_derivative() {
        // dx/dt = -a x, lambda = -a
        let m = ClosureModel::new(1, &["a"], |x, p| DVector::from_element(1, -p[0] * x[0]));
        let p = DVector::from_element(1, 1.5);
        let eq = Equilibrium::at(&m, DVector::zeros(1), &p, &backend()).unwrap();
        let d = eigenvalue_total_derivative(&m, &eq, &p, 0, 0, &backend()).unwrap();
        assert!((d.re + 1.0).abs() < 1e-8 && d.im.abs() < 1e-12);
    }

    #[test]
    fn singular_jacobian_is_rejected() {
        let m = ClosureModel::new(1, &["p"], |x, p| {
            DVector::from_element(1, p[0] - x[0].powi(3))
        })
        .with_jacobian_x(|x, _| DMatrix::from_element(1, 1, -3.0 * x[0] * x[0]));
        let p = DVector::zeros(1);
        let eq = Equilibrium::at(&m, DVector::zeros(1), &p, &backend()).unwrap();
        assert!(matches!(
            equilibrium_sensitivity(&m, &eq, &p, &backend()),
            Err(Error::SingularJacobian(_))
        ));
    }

    #[test]
    fn degenerate_eigenvalue_is_rejected() {
        let m = ClosureModel::new(2, &["p"], |x, p| {
            DVector::from_vec(vec![-p[0] * x[0], -p[0] * x[1]])
        });
        let p = DVector::from_element(1, 1.0);
        let eq = Equilibrium::at(&m, DVector::zeros(2), &p, &backend()).unwrap();
        assert_eq!(
            eigenvalue_gradient(&m, &eq, &p, 0, &backend()).unwrap_err(),
            Error::DegenerateEigenvalue { index: 0 }
        );
    }

    #[test]
    fn gradient_to_direction_arithmetic() {
        let g = ObjectiveGradient::descent(
            ObjectiveKind::Eigenvalue { eigen_index: 0 },
            DVector::from_vec(vec![3.0, 4.0]),
            false,
        );
        let d = g.direction.clone().unwrap();
        assert!((d[0] + 0.6).abs() < 1e-15 && (d[1] + 0.8).abs() < 1e-15);
        assert!((g.grad.dot(&d) + g.grad.norm()).abs() < 1e-14);

        let z = ObjectiveGradient::descent(
            ObjectiveKind::Eigenvalue { eigen_index: 0 },
            DVector::zeros(3),
            false,
        );
        assert!(z.is_stationary());
    }

    fn point(x: &[f64]) -> Equilibrium {
        let n = x.len();
        let j = -DMatrix::<f64>::identity(n, n);
        Equilibrium {
            x: DVector::from_column_slice(x),
            residual_norm: 0.0,
            jacobian: j,
            eigenvalues: vec![],
            right_eigenvectors: vec![],
            left_eigenvectors: vec![],
            classification: crate::equilibria::Classification::Stable,
        }
    }

    #[test]
    fn saddle_distance_examples() {
        assert_eq!(
            saddle_distance(&point(&[1.0, 0.0]), &point(&[0.0, 0.0])),
            1.0
        );
        assert_eq!(
            saddle_distance(&point(&[0.3, 0.2]), &point(&[0.3, 0.2])),
            0.0
        );
    }

    #[test]
    fn distance_gradient_from_sensitivity_columns() {
        let s = point(&[1.0, 0.0]);
        let x0 = point(&[0.0, 0.0]);
        // only the first parameter moves the saddle, along (1, 0)
        let ss = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let sx = DMatrix::zeros(2, 3);
        let g = ObjectiveGradient::ascent(
            ObjectiveKind::SaddleDistance,
            squared_distance_grad(&s, &x0, &ss, &sx),
        );
        let d = g.direction.unwrap();
        assert!((d - DVector::from_vec(vec![1.0, 0.0, 0.0])).norm() < 1e-15);

        let same = squared_distance_grad(&s, &x0, &ss, &ss);
        assert!(ObjectiveGradient::ascent(ObjectiveKind::SaddleDistance, same).is_stationary());
    }
}
