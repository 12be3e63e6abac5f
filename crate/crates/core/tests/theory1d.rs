//! Sign conclusions for `dx/dt = x - x^3 - alpha (x - x0)` at `alpha = 0`.

use basinctl_core::control::{
    run_eigenvalue_control, run_saddle_control, CensusSpec, ControlConfig, EigenTarget,
    SaddleTarget, Termination,
};
use basinctl_core::dynsys::DiffBackend;
use basinctl_core::equilibria::{newton_solve, Equilibrium, EquilibriumSelector, SelectorKind};
use basinctl_core::models::Cubic1D;
use basinctl_core::sensitivity::{eigenvalue_gradient, equilibrium_sensitivity};
use nalgebra::DVector;

const H: f64 = 1e-6;

fn alpha(a: f64) -> DVector<f64> {
    DVector::from_element(1, a)
}

fn root(model: &Cubic1D, a: f64, near: f64) -> Equilibrium {
    let backend = DiffBackend::default();
    let r = newton_solve(
        model,
        &DVector::from_element(1, near),
        &alpha(a),
        &backend,
        1e-14,
        100,
    )
    .unwrap();
    Equilibrium::at(model, r.x, &alpha(a), &backend).unwrap()
}

fn config() -> ControlConfig {
    let mut c = ControlConfig::new(CensusSpec::new(vec![(-2.0, 2.0)], 50, 0));
    c.epsilon = 1e-3;
    c
}

#[test]
fn attractor_eigenvalue_decreases_with_alpha() {
    let m = Cubic1D::new(1.0);
    let eq = root(&m, 0.0, 1.0);
    let g = eigenvalue_gradient(&m, &eq, &alpha(0.0), 0, &DiffBackend::default()).unwrap();
    assert!(g.grad[0] < 0.0);
    let fd = (root(&m, H, 1.0).eigenvalues[0].re - root(&m, -H, 1.0).eigenvalues[0].re) / (2.0 * H);
    assert!(fd < 0.0);
    assert!((fd - g.grad[0]).abs() < 1e-6);
}

#[test]
fn lower_saddle_moves_down() {
    let m = Cubic1D::new(1.0);
    let s = root(&m, 0.0, 0.0);
    let dx = equilibrium_sensitivity(&m, &s, &alpha(0.0), &DiffBackend::default()).unwrap();
    assert!(dx[(0, 0)] < 0.0);
    let fd = (root(&m, H, 0.0).x[0] - root(&m, -H, 0.0).x[0]) / (2.0 * H);
    assert!(fd < 0.0);
}

#[test]
fn upper_saddle_moves_up() {
    let m = Cubic1D::new(-1.0);
    let s = root(&m, 0.0, 0.0);
    let dx = equilibrium_sensitivity(&m, &s, &alpha(0.0), &DiffBackend::default()).unwrap();
    assert!(dx[(0, 0)] > 0.0);
    let fd = (root(&m, H, 0.0).x[0] - root(&m, -H, 0.0).x[0]) / (2.0 * H);
    assert!(fd > 0.0);
}

#[test]
fn saddle_control_also_stabilizes_the_attractor() {
    let m = Cubic1D::new(1.0);
    let attractor = EquilibriumSelector::new(vec![1.0], SelectorKind::Stable);
    let target = SaddleTarget {
        saddle: EquilibriumSelector::new(vec![0.0], SelectorKind::Saddle),
        delta: Some(0.1),
    };
    let trace = run_saddle_control(&m, &alpha(0.0), &attractor, &[target], &config()).unwrap();
    assert_eq!(trace.termination, Termination::GoalReached);
    let first = trace.records.first().unwrap().distances[0];
    let last = trace.records.last().unwrap().distances[0];
    assert!(last - first >= 0.1);
    let before = root(&m, 0.0, 1.0).eigenvalues[0].re;
    let p1 = trace.final_params();
    let after = root(&m, p1[0], 1.0).eigenvalues[0].re;
    assert!(after < before, "{after} vs {before}");
}

#[test]
fn eigenvalue_control_raises_alpha() {
    let m = Cubic1D::new(1.0);
    let attractor = EquilibriumSelector::new(vec![1.0], SelectorKind::Stable);
    let trace = run_eigenvalue_control(
        &m,
        &alpha(0.0),
        &attractor,
        &[EigenTarget::index(0, Some(0.5))],
        &config(),
    )
    .unwrap();
    assert_eq!(trace.termination, Termination::GoalReached);
    let series: Vec<f64> = trace.records.iter().map(|r| r.params[0]).collect();
    assert!(series.windows(2).all(|w| w[1] > w[0]));
    let lam = trace.eigen_series(0);
    assert!(lam.windows(2).all(|w| w[1] <= w[0] + 1e-6));
}
