use nalgebra::{DMatrix, DVector};

use crate::dynsys::ParamModel;

/// `dx/dt = x - x^3 - alpha (x - x0)`.
///
/// The unforced cubic has stable equilibria at `+-1` and an unstable one at
/// `0`. The linear feedback `alpha (x - x0)` vanishes at `alpha = 0`, grows
/// in `x` with the sign of `alpha`, and grows in `alpha` with the sign of
/// `x - x0`.
#[derive(Debug, Clone)]
pub struct Cubic1D {
    pub x0: f64,
    names: Vec<String>,
}

impl Cubic1D {
    pub fn new(x0: f64) -> Self {
        Self {
            x0,
            names: vec!["alpha".to_string()],
        }
    }

    pub fn feedback(&self, x: f64, alpha: f64) -> f64 {
        alpha * (x - self.x0)
    }
}

impl Default for Cubic1D {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl ParamModel for Cubic1D {
    fn state_dim(&self) -> usize {
        1
    }

    fn param_names(&self) -> &[String] {
        &self.names
    }

    fn field(&self, x: &DVector<f64>, params: &DVector<f64>) -> DVector<f64> {
        let v = x[0];
        DVector::from_element(1, v - v.powi(3) - self.feedback(v, params[0]))
    }

    fn jacobian_x(&self, x: &DVector<f64>, params: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(
            1,
            1,
            1.0 - 3.0 * x[0] * x[0] - params[0],
        ))
    }

    fn jacobian_p(&self, x: &DVector<f64>, _params: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_element(1, 1, -(x[0] - self.x0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feedback_conditions() {
        let m = Cubic1D::default();
        let h = 1e-6;
        for x in [-1.5, -0.3, 0.0, 0.8, 2.0] {
            assert_eq!(m.feedback(x, 0.0), 0.0);
            for alpha in [-0.7, 0.4] {
                let dk_dx = (m.feedback(x + h, alpha) - m.feedback(x - h, alpha)) / (2.0 * h);
                assert_eq!(dk_dx.signum(), f64::signum(alpha));
            }
            let dk_da = (m.feedback(x, h) - m.feedback(x, -h)) / (2.0 * h);
            if x != m.x0 {
                assert_eq!(dk_da.signum(), (x - m.x0).signum());
            }
        }
    }
}
