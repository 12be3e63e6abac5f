//! Analytic sensitivities against re-solve finite-difference references.

use basinctl_core::dynsys::{DiffBackend, ParamModel};
use basinctl_core::equilibria::{find_equilibria, EquilibriumCensus};
use basinctl_core::models::{BuiltinModel, ModelName};
use basinctl_core::oracle::{fd_sensitivities, max_column_error};
use basinctl_core::sensitivity::{eigenvalue_derivative_matrix, equilibrium_sensitivity};
use nalgebra::DVector;

const REL_TOL: f64 = 1e-3;
const FLOOR: f64 = 1e-8;
const FD_STEP: f64 = 1e-5;

fn census(b: &BuiltinModel, n_seeds: usize) -> EquilibriumCensus {
    find_equilibria(
        b.model.as_ref(),
        &b.defaults,
        &b.reference_box,
        n_seeds,
        0,
        &DiffBackend::default(),
    )
    .unwrap()
}

fn check_all(
    model: &dyn ParamModel,
    census: &EquilibriumCensus,
    params: &DVector<f64>,
    backend: &DiffBackend,
) {
    for (i, eq) in census.equilibria.iter().enumerate() {
        let fd = fd_sensitivities(model, eq, params, &DiffBackend::default(), FD_STEP).unwrap();
        let dx = equilibrium_sensitivity(model, eq, params, backend).unwrap();
        let dl = eigenvalue_derivative_matrix(model, eq, params, backend).unwrap();
        let ex = max_column_error(&dx, &fd.dx, FLOOR);
        let el = max_column_error(&dl, &fd.dlambda, FLOOR);
        assert!(ex <= REL_TOL, "equilibrium {i}: dx error {ex:e}");
        assert!(el <= REL_TOL, "equilibrium {i}: dlambda error {el:e}");
    }
}

#[test]
fn cubic_family_matches_oracle() {
    let b = BuiltinModel::new(ModelName::Cubic1d, false);
    let c = census(&b, 50);
    assert_eq!(c.equilibria.len(), 3);
    check_all(b.model.as_ref(), &c, &b.defaults, &DiffBackend::default());
}

#[test]
fn gradient2d_matches_oracle() {
    let b = BuiltinModel::new(ModelName::Gradient2d, false);
    let c = census(&b, 400);
    assert!(c.equilibria.len() >= 9);
    check_all(b.model.as_ref(), &c, &b.defaults, &DiffBackend::default());
}

#[test]
fn gradient2d_finite_difference_backend_matches_oracle() {
    let b = BuiltinModel::new(ModelName::Gradient2d, false);
    let c = census(&b, 400);
    check_all(
        b.model.as_ref(),
        &c,
        &b.defaults,
        &DiffBackend::finite_difference(),
    );
}

#[test]
fn emt_matches_oracle() {
    let b = BuiltinModel::new(ModelName::Emt, false);
    let c = census(&b, 400);
    assert_eq!(c.equilibria.len(), 7);
    check_all(b.model.as_ref(), &c, &b.defaults, &DiffBackend::default());
}

#[test]
fn emt_with_exponent_matches_oracle() {
    let b = BuiltinModel::new(ModelName::Emt, true);
    assert_eq!(b.defaults.len(), 32);
    let c = census(&b, 400);
    check_all(b.model.as_ref(), &c, &b.defaults, &DiffBackend::default());
}
