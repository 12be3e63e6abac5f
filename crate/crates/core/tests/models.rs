//! Structural properties of the built-in models.

use basinctl_core::basin::{integrate, Tolerance};
use basinctl_core::dynsys::{DiffBackend, ParamModel};
use basinctl_core::equilibria::{find_equilibria, CensusCounts, Classification};
use basinctl_core::models::boolean::{phenotype_checks, BoolState};
use basinctl_core::models::calibration::{calibrate, CalibrationSpec};
use basinctl_core::models::{
    boolean_attractors, BuiltinModel, Emt, Gradient2D, ModelName, Phenotype, GRADIENT2D_NOMINAL,
};
use nalgebra::DVector;
use proptest::prelude::*;

proptest! {
    #[test]
    fn gradient2d_field_is_minus_potential_gradient(x in -2.5..2.5f64, y in -2.5..2.5f64) {
        let m = Gradient2D::default();
        let p = DVector::from_column_slice(&GRADIENT2D_NOMINAL);
        let f = m.field(&DVector::from_vec(vec![x, y]), &p);
        let h = 1e-5;
        let dvx = (m.potential(x + h, y, &p) - m.potential(x - h, y, &p)) / (2.0 * h);
        let dvy = (m.potential(x, y + h, &p) - m.potential(x, y - h, &p)) / (2.0 * h);
        let scale = f.norm().max(1.0);
        prop_assert!((f[0] + dvx).abs() <= 1e-6 * scale);
        prop_assert!((f[1] + dvy).abs() <= 1e-6 * scale);
    }

    #[test]
    fn emt_field_points_into_the_orthant(x in prop::collection::vec(0.0..4.0f64, 4), face in 0usize..4) {
        let b = BuiltinModel::new(ModelName::Emt, false);
        let mut x = DVector::from_vec(x);
        x[face] = 0.0;
        let f = b.model.field(&x, &b.defaults);
        prop_assert!(f[face] >= 0.0);
    }
}

#[test]
fn emt_trajectories_stay_nonnegative() {
    let b = BuiltinModel::new(ModelName::Emt, false);
    for start in [
        [0.0, 0.0, 0.0, 0.0],
        [4.0, 0.0, 0.0, 4.0],
        [0.01, 3.0, 0.0, 0.0],
    ] {
        let out = integrate(
            b.model.as_ref(),
            &b.defaults,
            &DVector::from_row_slice(&start),
            50.0,
            Tolerance::default(),
            None,
        )
        .unwrap();
        assert!(out.state.iter().all(|v| *v >= -1e-9), "{:?}", out.state);
    }
}

#[test]
fn cubic_census_is_exact() {
    let b = BuiltinModel::new(ModelName::Cubic1d, false);
    let c = find_equilibria(
        b.model.as_ref(),
        &b.defaults,
        &b.reference_box,
        50,
        0,
        &DiffBackend::default(),
    )
    .unwrap();
    let xs: Vec<f64> = c.equilibria.iter().map(|e| e.x[0]).collect();
    assert_eq!(xs.len(), 3);
    for (x, want) in xs.iter().zip([-1.0, 0.0, 1.0]) {
        assert!((x - want).abs() < 1e-12);
    }
    let kinds: Vec<Classification> = c.equilibria.iter().map(|e| e.classification).collect();
    assert_eq!(
        kinds,
        [
            Classification::Stable,
            Classification::Saddle,
            Classification::Stable
        ]
    );
}

#[test]
fn gradient2d_census_has_nine_equilibria() {
    let b = BuiltinModel::new(ModelName::Gradient2d, false);
    let c = find_equilibria(
        b.model.as_ref(),
        &b.defaults,
        &b.reference_box,
        400,
        0,
        &DiffBackend::default(),
    )
    .unwrap();
    let counts = c.counts();
    assert_eq!(c.equilibria.len(), 9);
    assert_eq!((counts.stable, counts.saddle, counts.unstable), (4, 4, 1));
}

#[test]
fn emt_defaults_have_three_phenotypes() {
    let b = BuiltinModel::new(ModelName::Emt, false);
    let c = find_equilibria(
        b.model.as_ref(),
        &b.defaults,
        &b.reference_box,
        400,
        0,
        &DiffBackend::default(),
    )
    .unwrap();
    assert_eq!(
        c.counts(),
        CensusCounts {
            stable: 3,
            saddle: 3,
            unstable: 1,
            non_hyperbolic: 0
        }
    );
    let emt = Emt::default();
    let mut ph: Vec<Phenotype> = c
        .stable()
        .map(|(_, e)| emt.phenotype(&e.x, &b.defaults))
        .collect();
    ph.sort_by_key(|p| *p as u8);
    assert_eq!(
        ph,
        [
            Phenotype::Epithelial,
            Phenotype::Senescent,
            Phenotype::Mesenchymal
        ]
    );
}

#[test]
fn emt_defaults_are_the_first_calibration_hit() {
    let hits = calibrate(&CalibrationSpec::default(), 1);
    let b = BuiltinModel::new(ModelName::Emt, false);
    assert_eq!(hits.len(), 1);
    assert_eq!(hits[0].params.as_slice(), b.defaults.as_slice());
}

#[test]
fn boolean_network_attractors() {
    let attractors = boolean_attractors();
    let fixed: Vec<BoolState> = attractors
        .iter()
        .filter(|a| a.is_fixed_point())
        .map(|a| a.states[0])
        .collect();
    assert!(fixed.contains(&BoolState::from_bits(1, 0, 1, 0)));
    assert!(fixed.contains(&BoolState::from_bits(0, 1, 1, 1)));
    let checks = phenotype_checks();
    let epi = checks
        .iter()
        .find(|c| c.phenotype == Phenotype::Epithelial)
        .unwrap();
    assert!(epi.discrepancy);
    assert_eq!(epi.image, BoolState::from_bits(0, 1, 1, 1));
    assert!(checks
        .iter()
        .filter(|c| c.phenotype != Phenotype::Epithelial)
        .all(|c| !c.discrepancy));
}
