//! Monte Carlo basin estimates on the built-in models.

use basinctl_core::basin::{
    basin_fractions, classify_initial_condition, sample_point, Classified, Tolerance, DEFAULT_T_MAX,
};
use basinctl_core::dynsys::DiffBackend;
use basinctl_core::equilibria::{find_equilibria, EquilibriumCensus};
use basinctl_core::models::{BuiltinModel, ModelName};
use nalgebra::DVector;

fn setup(name: ModelName) -> (BuiltinModel, EquilibriumCensus) {
    let b = BuiltinModel::new(name, false);
    let c = find_equilibria(
        b.model.as_ref(),
        &b.defaults,
        &b.reference_box,
        400,
        0,
        &DiffBackend::default(),
    )
    .unwrap();
    (b, c)
}

#[test]
fn cubic_basins_are_symmetric() {
    let (b, c) = setup(ModelName::Cubic1d);
    let est = basin_fractions(
        b.model.as_ref(),
        &b.defaults,
        &c,
        &b.reference_box,
        4000,
        0,
        DEFAULT_T_MAX,
        Tolerance::default(),
    )
    .unwrap();
    assert_eq!(est.attractors.len(), 2);
    let (l, r) = (&est.attractors[0], &est.attractors[1]);
    assert!((l.fraction - 0.5).abs() <= l.half_width);
    assert!((r.fraction - 0.5).abs() <= r.half_width);
    let total: f64 =
        est.attractors.iter().map(|a| a.fraction).sum::<f64>() + est.unresolved_fraction;
    assert!((total - 1.0).abs() <= 1e-12);
}

#[test]
fn symmetric_gradient_model_has_mirror_basins() {
    let (b, c) = setup(ModelName::Gradient2dSymmetric);
    let est = basin_fractions(
        b.model.as_ref(),
        &b.defaults,
        &c,
        &b.reference_box,
        4000,
        0,
        DEFAULT_T_MAX,
        Tolerance::default(),
    )
    .unwrap();
    // the field is invariant under swapping x and y
    for a in &est.attractors {
        let mirror = est
            .attractors
            .iter()
            .find(|o| (o.x[0] - a.x[1]).abs() < 1e-6 && (o.x[1] - a.x[0]).abs() < 1e-6)
            .expect("mirror attractor exists");
        assert!((a.fraction - mirror.fraction).abs() <= 2.0 * (a.half_width + mirror.half_width));
    }
}

#[test]
fn halving_tolerances_keeps_every_classification() {
    for name in [ModelName::Cubic1d, ModelName::Gradient2d, ModelName::Emt] {
        let (b, c) = setup(name);
        let tol = Tolerance::default();
        for i in 0..100 {
            let x0 = sample_point(&b.reference_box, 11, i);
            let a = classify_initial_condition(
                b.model.as_ref(),
                &b.defaults,
                &x0,
                &c,
                DEFAULT_T_MAX,
                tol,
            );
            let h = classify_initial_condition(
                b.model.as_ref(),
                &b.defaults,
                &x0,
                &c,
                DEFAULT_T_MAX,
                tol.halved(),
            );
            assert_eq!(a, h, "{name:?} sample {i}");
        }
    }
}

#[test]
fn gradient2d_corner_start_is_reproducible() {
    let (b, c) = setup(ModelName::Gradient2d);
    let x0 = DVector::from_vec(vec![2.0, 2.0]);
    let run = || {
        classify_initial_condition(
            b.model.as_ref(),
            &b.defaults,
            &x0,
            &c,
            DEFAULT_T_MAX,
            Tolerance::default(),
        )
    };
    let first = run();
    assert!(matches!(first, Classified::Attractor(_)));
    for _ in 0..3 {
        assert_eq!(run(), first);
    }
}

#[test]
fn emt_defaults_have_three_populated_basins() {
    let (b, c) = setup(ModelName::Emt);
    let est = basin_fractions(
        b.model.as_ref(),
        &b.defaults,
        &c,
        &b.reference_box,
        2000,
        0,
        DEFAULT_T_MAX,
        Tolerance::default(),
    )
    .unwrap();
    assert_eq!(est.attractors.len(), 3);
    assert!(est.attractors.iter().all(|a| a.count > 0));
    let again = basin_fractions(
        b.model.as_ref(),
        &b.defaults,
        &c,
        &b.reference_box,
        2000,
        0,
        DEFAULT_T_MAX,
        Tolerance::default(),
    )
    .unwrap();
    assert_eq!(
        est.attractors.iter().map(|a| a.count).collect::<Vec<_>>(),
        again.attractors.iter().map(|a| a.count).collect::<Vec<_>>()
    );
}
