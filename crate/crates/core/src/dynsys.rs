//! Parameterized vector fields `dx/dt = F(x, p)` and their derivatives.
//!
//! Every model implements [`ParamModel`]. Built-in models supply analytic
//! Jacobians; anything else falls back to central finite differences, which
//! also serve as the cross-check oracle in tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A smooth parameterized vector field.
///
/// Implementations must be deterministic: equal inputs give bit-identical
/// outputs. Domain violations (for example a non-positive Hill
/// half-activation) are reported by [`ParamModel::check_params`].
pub trait ParamModel: Send + Sync {
    fn state_dim(&self) -> usize;

    fn param_names(&self) -> &[String];

    fn param_dim(&self) -> usize {
        self.param_names().len()
    }

    fn check_params(&self, _params: &DVector<f64>) -> Result<()> {
        Ok(())
    }

    /// Raw right-hand side. Callers go through [`eval_field`], which
    /// validates dimensions and finiteness.
    fn field(&self, x: &DVector<f64>, params: &DVector<f64>) -> DVector<f64>;

    /// Analytic `dF/dx`, if the model has one.
    fn jacobian_x(&self, _x: &DVector<f64>, _params: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    /// Analytic `dF/dp`, if the model has one.
    fn jacobian_p(&self, _x: &DVector<f64>, _params: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names().iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiffMode {
    /// Use the model's analytic derivatives, falling back to finite
    /// differences where the model provides none.
    #[default]
    Analytic,
    CentralDifference,
}

/// How derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiffBackend {
    pub mode: DiffMode,
    /// Relative step; the absolute step is `fd_step * max(1, |coordinate|)`.
    pub fd_step: f64,
}

impl Default for DiffBackend {
    fn default() -> Self {
        Self {
            mode: DiffMode::Analytic,
            fd_step: 1e-6,
        }
    }
}

impl DiffBackend {
    pub fn finite_difference() -> Self {
        Self {
            mode: DiffMode::CentralDifference,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.fd_step > 0.0 && self.fd_step.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "fd_step must be positive, got {}",
                self.fd_step
            )))
        }
    }

    /// Step used for the outer difference in [`total_jacobian_derivative`].
    /// A differenced Jacobian carries noise of order `fd_step^2`, which the
    /// wider step keeps from dominating.
    fn outer_step(&self, exact_jacobian: bool) -> f64 {
        if exact_jacobian {
            self.fd_step.sqrt()
        } else {
            self.fd_step.cbrt()
        }
    }
}

/// Sign allowed for one coordinate of a sign-constrained cone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConstraint {
    Free,
    NonNegative,
    NonPositive,
}

impl SignConstraint {
    pub fn admits(self, value: f64) -> bool {
        match self {
            SignConstraint::Free => true,
            SignConstraint::NonNegative => value >= 0.0,
            SignConstraint::NonPositive => value <= 0.0,
        }
    }
}

/// The cone of admissible parameter-update directions, with vertex at the
/// current parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AffineConeSpec {
    Full,
    Subset {
        indices: Vec<usize>,
    },
    SignConstrained {
        signs: Vec<SignConstraint>,
    },
    /// Only the `k` coordinates with the largest absolute sensitivity may move.
    TopK {
        k: usize,
    },
}

impl AffineConeSpec {
    pub fn validate(&self, param_dim: usize) -> Result<()> {
        match self {
            AffineConeSpec::Full => Ok(()),
            AffineConeSpec::Subset { indices } => match indices.iter().find(|&&i| i >= param_dim) {
                Some(i) => Err(Error::InvalidInput(format!(
                    "cone index {i} out of range for {param_dim} parameters"
                ))),
                None => Ok(()),
            },
            AffineConeSpec::SignConstrained { signs } => {
                if signs.len() == param_dim {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch {
                        what: "sign cone",
                        expected: param_dim,
                        got: signs.len(),
                    })
                }
            }
            AffineConeSpec::TopK { k } => {
                if *k >= 1 {
                    Ok(())
                } else {
                    Err(Error::InvalidInput("top-k cone needs k >= 1".into()))
                }
            }
        }
    }

    /// Membership test. For top-k cones the allowed support is the `k`
    /// largest entries of `ranking` in absolute value; without a ranking any
    /// direction with at most `k` nonzero entries is admitted.
    pub fn admits(&self, direction: &DVector<f64>, ranking: Option<&DVector<f64>>) -> bool {
        match self {
            AffineConeSpec::Full => true,
            AffineConeSpec::Subset { indices } => direction
                .iter()
                .enumerate()
                .all(|(i, &v)| v == 0.0 || indices.contains(&i)),
            AffineConeSpec::SignConstrained { signs } => {
                direction.iter().zip(signs).all(|(&v, s)| s.admits(v))
            }
            AffineConeSpec::TopK { k } => match ranking {
                Some(r) => {
                    let keep = top_k_indices(r, *k);
                    direction
                        .iter()
                        .enumerate()
                        .all(|(i, &v)| v == 0.0 || keep.contains(&i))
                }
                None => direction.iter().filter(|v| **v != 0.0).count() <= *k,
            },
        }
    }
}

/// Indices of the `k` largest `|values[i]|`, ties broken by lower index.
pub fn top_k_indices(values: &DVector<f64>, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    order.truncate(k);
    order.sort_unstable();
    order
}

fn check_dims<M: ParamModel + ?Sized>(
    model: &M,
    x: &DVector<f64>,
    params: &DVector<f64>,
) -> Result<()> {
    if x.len() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "state",
            expected: model.state_dim(),
            got: x.len(),
        });
    }
    if params.len() != model.param_dim() {
        return Err(Error::DimensionMismatch {
            what: "parameters",
            expected: model.param_dim(),
            got: params.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state"));
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("parameters"));
    }
    Ok(())
}

fn finite_matrix(m: DMatrix<f64>, what: &'static str) -> Result<DMatrix<f64>> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(m)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Evaluates `F(x, p)`.
pub fn eval_field<M: ParamModel + ?Sized>(
    model: &M,
    x: &DVector<f64>,
    params: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_dims(model, x, params)?;
    model.check_params(params)?;
    let f = model.field(x, params);
    if f.iter().all(|v| v.is_finite()) {
        Ok(f)
    } else {
        Err(Error::NonFinite("vector field"))
    }
}

fn fd_jacobian_x<M: ParamModel + ?Sized>(
    model: &M,
    x: &DVector<f64>,
    params: &DVector<f64>,
    step: f64,
) -> DMatrix<f64> {
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = x.clone();
    for j in 0..n {
        let h = step * x[j].abs().max(1.0);
        probe[j] = x[j] + h;
        let fp = model.field(&probe, params);
        probe[j] = x[j] - h;
        let fm = model.field(&probe, params);
        probe[j] = x[j];
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    jac
}

fn fd_jacobian_p<M: ParamModel + ?Sized>(
    model: &M,
    x: &DVector<f64>,
    params: &DVector<f64>,
    step: f64,
) -> DMatrix<f64> {
    let m = params.len();
    let mut jac = DMatrix::zeros(x.len(), m);
    let mut probe = params.clone();
    for j in 0..m {
        let h = step * params[j].abs().max(1.0);
        probe[j] = params[j] + h;
        let fp = model.field(x, &probe);
        probe[j] = params[j] - h;
        let fm = model.field(x, &probe);
        probe[j] = params[j];
        jac.set_column(j, &((fp - fm) / (2.0 * h)));
    }
    jac
}

/// `dF/dx` at `(x, p)`.
pub fn jacobian_x<M: ParamModel + ?Sized>(
    model: &M,
    x: &DVector<f64>,
    params: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<DMatrix<f64>> {
    backend.validate()?;
    check_dims(model, x, params)?;
    model.check_params(params)?;
    let jac = match backend.mode {
        DiffMode::Analytic => model
            .jacobian_x(x, params)
            .unwrap_or_else(|| fd_jacobian_x(model, x, params, backend.fd_step)),
        DiffMode::CentralDifference => fd_jacobian_x(model, x, params, backend.fd_step),
    };
    finite_matrix(jac, "state Jacobian")
}

/// `dF/dp` at `(x, p)`, one column per parameter.
pub fn jacobian_pi<M: ParamModel + ?Sized>(
    model: &M,
    x: &DVector<f64>,
    params: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<DMatrix<f64>> {
    backend.validate()?;
    check_dims(model, x, params)?;
    model.check_params(params)?;
    let jac = match backend.mode {
        DiffMode::Analytic => model
            .jacobian_p(x, params)
            .unwrap_or_else(|| fd_jacobian_p(model, x, params, backend.fd_step)),
        DiffMode::CentralDifference => fd_jacobian_p(model, x, params, backend.fd_step),
    };
    finite_matrix(jac, "parameter Jacobian")
}

/// Total derivative of the state Jacobian with respect to parameter
/// `param_index` along the equilibrium branch:
/// `(dJ/dx) * dx_dpi + dJ/dp_i`.
///
/// Computed as a directional derivative of `J` along `(dx_dpi, e_i)` using a
/// central difference with one Richardson extrapolation step, so the
/// third-order tensor `dJ/dx` is never formed.
pub fn total_jacobian_derivative<M: ParamModel + ?Sized>(
    model: &M,
    x_eq: &DVector<f64>,
    params: &DVector<f64>,
    param_index: usize,
    dx_dpi: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<DMatrix<f64>> {
    backend.validate()?;
    check_dims(model, x_eq, params)?;
    if param_index >= params.len() {
        return Err(Error::InvalidInput(format!(
            "parameter index {param_index} out of range"
        )));
    }
    if dx_dpi.len() != x_eq.len() {
        return Err(Error::DimensionMismatch {
            what: "equilibrium sensitivity",
            expected: x_eq.len(),
            got: dx_dpi.len(),
        });
    }
    let scale = params[param_index].abs().max(1.0) / dx_dpi.norm().max(1.0);
    let exact = backend.mode == DiffMode::Analytic && model.jacobian_x(x_eq, params).is_some();
    let step = backend.outer_step(exact) * scale;

    let jac_at = |t: f64| -> Result<DMatrix<f64>> {
        let x = x_eq + dx_dpi * t;
        let mut p = params.clone();
        p[param_index] += t;
        jacobian_x(model, &x, &p, backend)
    };
    let central = |h: f64| -> Result<DMatrix<f64>> { Ok((jac_at(h)? - jac_at(-h)?) / (2.0 * h)) };

    let estimate = match central(step) {
        Ok(coarse) => {
            let fine = central(0.5 * step)?;
            (fine * 4.0 - coarse) / 3.0
        }
        // second-order forward stencil next to the parameter domain boundary
        Err(Error::ParamDomain { .. }) => {
            (jac_at(0.0)? * -3.0 + jac_at(step)? * 4.0 - jac_at(2.0 * step)?) / (2.0 * step)
        }
        Err(e) => return Err(e),
    };
    finite_matrix(estimate, "Jacobian total derivative")
}

type FieldFn = dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync;
type MatrixFn = dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// A model assembled from closures. Handy for small test systems and for
/// user-defined fields that have no analytic derivatives.
pub struct ClosureModel {
    state_dim: usize,
    names: Vec<String>,
    field: Box<FieldFn>,
    jac_x: Option<Box<MatrixFn>>,
    jac_p: Option<Box<MatrixFn>>,
}

impl ClosureModel {
    pub fn new<F>(state_dim: usize, names: &[&str], field: F) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    {
        Self {
            state_dim,
            names: names.iter().map(|s| s.to_string()).collect(),
            field: Box::new(field),
            jac_x: None,
            jac_p: None,
        }
    }

    pub fn with_jacobian_x<F>(mut self, f: F) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jac_x = Some(Box::new(f));
        self
    }

    pub fn with_jacobian_p<F>(mut self, f: F) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.jac_p = Some(Box::new(f));
        self
    }
}

impl std::fmt::Debug for ClosureModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ClosureModel")
            .field("state_dim", &self.state_dim)
            .field("params", &self.names)
            .finish_non_exhaustive()
    }
}

impl ParamModel for ClosureModel {
    fn state_dim(&self) -> usize {
        self.state_dim
    }

    fn param_names(&self) -> &[String] {
        &self.names
    }

    fn field(&self, x: &DVector<f64>, params: &DVector<f64>) -> DVector<f64> {
        (self.field)(x, params)
    }

    fn jacobian_x(&self, x: &DVector<f64>, params: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.jac_x.as_ref().map(|f| f(x, params))
    }

    fn jacobian_p(&self, x: &DVector<f64>, params: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.jac_p.as_ref().map(|f| f(x, params))
    }
}
