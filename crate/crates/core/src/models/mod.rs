//! Built-in systems.

pub mod boolean;
pub mod calibration;
pub mod cubic;
pub mod emt;
pub mod gradient2d;

use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynsys::ParamModel;

pub use boolean::{boolean_attractors, boolean_step, BoolState, BooleanAttractor};
pub use cubic::Cubic1D;
pub use emt::{emt_default_parameters, Emt, Phenotype};
pub use gradient2d::{Gradient2D, GRADIENT2D_NOMINAL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Cubic1d,
    Gradient2d,
    /// Gradient system with `nx = ny = 3`.
    Gradient2dSymmetric,
    Emt,
}

/// A built-in model with its default parameters and reference box.
#[derive(Clone)]
pub struct BuiltinModel {
    pub name: ModelName,
    pub model: Arc<dyn ParamModel>,
    pub defaults: DVector<f64>,
    pub reference_box: Vec<(f64, f64)>,
}

impl std::fmt::Debug for BuiltinModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BuiltinModel")
            .field("name", &self.name)
            .field("defaults", &self.defaults.as_slice())
            .field("reference_box", &self.reference_box)
            .finish()
    }
}

impl BuiltinModel {
    /// `controllable_exponent` only affects the EMT network.
    pub fn new(name: ModelName, controllable_exponent: bool) -> Self {
        match name {
            ModelName::Cubic1d => Self {
                name,
                model: Arc::new(Cubic1D::default()),
                defaults: DVector::from_element(1, 0.0),
                reference_box: vec![(-2.0, 2.0)],
            },
            ModelName::Gradient2d => Self {
                name,
                model: Arc::new(Gradient2D::default()),
                defaults: DVector::from_column_slice(&GRADIENT2D_NOMINAL),
                reference_box: vec![(-3.0, 3.0); 2],
            },
            ModelName::Gradient2dSymmetric => Self {
                name,
                model: Arc::new(Gradient2D::new(3, 3)),
                defaults: DVector::from_column_slice(&[3.0, 3.0, 0.5, 0.5]),
                reference_box: vec![(-3.0, 3.0); 2],
            },
            ModelName::Emt => {
                let emt = Emt::new(emt::DEFAULT_HILL_EXPONENT, controllable_exponent);
                let defaults = emt_default_parameters(&emt);
                Self {
                    name,
                    model: Arc::new(emt),
                    defaults,
                    reference_box: vec![(0.0, 4.0); 4],
                }
            }
        }
    }
}
