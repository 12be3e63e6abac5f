use nalgebra::{DMatrix, DVector};

use crate::dynsys::ParamModel;

/// Planar gradient system
///
/// ```text
/// dx/dt = -x^nx + alpha_x tanh(x) - y + u_x
/// dy/dt = -y^ny + alpha_y tanh(y) - x + u_y
/// ```
///
/// with parameters `(alpha_x, alpha_y, u_x, u_y)`. The exponents are fixed
/// and not controllable.
#[derive(Debug, Clone)]
pub struct Gradient2D {
    pub nx: i32,
    pub ny: i32,
    names: Vec<String>,
}

pub const GRADIENT2D_NOMINAL: [f64; 4] = [3.0, 4.0, 0.3, 1.0];

impl Gradient2D {
    pub fn new(nx: i32, ny: i32) -> Self {
        Self {
            nx,
            ny,
            names: ["alpha_x", "alpha_y", "u_x", "u_y"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    /// The potential `V` with `F = -grad V`.
    pub fn potential(&self, x: f64, y: f64, params: &DVector<f64>) -> f64 {
        let (ax, ay, ux, uy) = (params[0], params[1], params[2], params[3]);
        x.powi(self.nx + 1) / (self.nx + 1) as f64 + y.powi(self.ny + 1) / (self.ny + 1) as f64
            - ax * ln_cosh(x)
            - ay * ln_cosh(y)
            + x * y
            - ux * x
            - uy * y
    }
}

impl Default for Gradient2D {
    fn default() -> Self {
        Self::new(3, 5)
    }
}

/// `ln(cosh(x))` without overflow for large `|x|`.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn sech2(x: f64) -> f64 {
    let t = x.tanh();
    1.0 - t * t
}

impl ParamModel for Gradient2D {
    fn state_dim(&self) -> usize {
        2
    }

    fn param_names(&self) -> &[String] {
        &self.names
    }

    fn field(&self, s: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
        let (x, y) = (s[0], s[1]);
        DVector::from_vec(vec![
            -x.powi(self.nx) + p[0] * x.tanh() - y + p[2],
            -y.powi(self.ny) + p[1] * y.tanh() - x + p[3],
        ])
    }

    fn jacobian_x(&self, s: &DVector<f64>, p: &DVector<f64>) -> Option<DMatrix<f64>> {
        let (x, y) = (s[0], s[1]);
        let nx = self.nx as f64;
        let ny = self.ny as f64;
        Some(DMatrix::from_row_slice(
            2,
            2,
            &[
                -nx * x.powi(self.nx - 1) + p[0] * sech2(x),
                -1.0,
                -1.0,
                -ny * y.powi(self.ny - 1) + p[1] * sech2(y),
            ],
        ))
    }

    fn jacobian_p(&self, s: &DVector<f64>, _p: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_row_slice(
            2,
            4,
            &[s[0].tanh(), 0.0, 1.0, 0.0, 0.0, s[1].tanh(), 0.0, 1.0],
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_cosh_is_stable() {
        assert!((ln_cosh(0.3) - 0.3f64.cosh().ln()).abs() < 1e-15);
        assert!((ln_cosh(800.0) - (800.0 - std::f64::consts::LN_2)).abs() < 1e-9);
    }
}
