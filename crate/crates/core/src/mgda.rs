//! Common descent directions for several objectives (minimum-norm point of
//! the convex hull of their gradients) and projection onto admissible cones.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynsys::{top_k_indices, AffineConeSpec};
use crate::error::{Error, Result};

/// Hull points with norm at or below this are Pareto stationary.
pub const PARETO_TOL: f64 = 1e-10;
const PGD_TOL: f64 = 1e-12;
const PGD_MAX_ITER: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct HullSolution {
    pub weights: Vec<f64>,
    pub direction: DVector<f64>,
    pub is_pareto_stationary: bool,
}

/// How objective gradients are scaled before the hull is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientScaling {
    Raw,
    #[default]
    UnitNormalized,
}

fn gram(gradients: &[DVector<f64>]) -> DMatrix<f64> {
    let k = gradients.len();
    DMatrix::from_fn(k, k, |i, j| gradients[i].dot(&gradients[j]))
}

fn quad(g: &DMatrix<f64>, w: &[f64]) -> f64 {
    let w = DVector::from_column_slice(w);
    (w.transpose() * g * &w)[(0, 0)]
}

/// Weight on the first point of the segment minimizing `||t a + (1-t) b||`.
fn segment_weight(g_aa: f64, g_ab: f64, g_bb: f64) -> f64 {
    let denom = g_aa - 2.0 * g_ab + g_bb;
    if denom <= 0.0 {
        return 0.5;
    }
    ((g_bb - g_ab) / denom).clamp(0.0, 1.0)
}

fn exact_small(g: &DMatrix<f64>) -> Vec<f64> {
    let k = g.nrows();
    match k {
        1 => vec![1.0],
        2 => {
            let t = segment_weight(g[(0, 0)], g[(0, 1)], g[(1, 1)]);
            vec![t, 1.0 - t]
        }
        3 => {
            let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(7);
            // interior of the triangle: KKT system with the simplex constraint
            let mut kkt = DMatrix::zeros(4, 4);
            kkt.view_mut((0, 0), (3, 3)).copy_from(g);
            for i in 0..3 {
                kkt[(i, 3)] = 1.0;
                kkt[(3, i)] = 1.0;
            }
            let rhs = DVector::from_vec(vec![0.0, 0.0, 0.0, 1.0]);
            if let Some(sol) = kkt.lu().solve(&rhs) {
                let w: Vec<f64> = sol.iter().take(3).copied().collect();
                if w.iter().all(|v| v.is_finite() && *v >= 0.0) {
                    candidates.push(w);
                }
            }
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let t = segment_weight(g[(a, a)], g[(a, b)], g[(b, b)]);
                let mut w = vec![0.0; 3];
                w[a] = t;
                w[b] = 1.0 - t;
                candidates.push(w);
            }
            for i in 0..3 {
                let mut w = vec![0.0; 3];
                w[i] = 1.0;
                candidates.push(w);
            }
            candidates
                .into_iter()
                .map(|w| (quad(g, &w), w))
                .fold((f64::INFINITY, vec![]), |best, (v, w)| {
                    if v < best.0 - 1e-15 {
                        (v, w)
                    } else {
                        best
                    }
                })
                .1
        }
        _ => unreachable!("exact solver handles k <= 3"),
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &DVector<f64>) -> DVector<f64> {
    let mut u: Vec<f64> = v.iter().copied().collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.map(|x| (x - theta).max(0.0))
}

fn projected_gradient(g: &DMatrix<f64>) -> Vec<f64> {
    let k = g.nrows();
    let lipschitz = g.clone().symmetric_eigenvalues().max().max(1e-300);
    let step = 1.0 / lipschitz;
    let mut w = DVector::from_element(k, 1.0 / k as f64);
    for _ in 0..PGD_MAX_ITER {
        let next = project_simplex(&(&w - (g * &w) * step));
        let delta = (&next - &w).norm();
        w = next;
        if delta < PGD_TOL {
            break;
        }
    }
    w.iter().copied().collect()
}

/// Minimum-norm element of the convex hull of `gradients`.
///
/// Exact face enumeration for up to three gradients, projected gradient
/// descent on the simplex weights beyond that.
pub fn min_norm_hull_point(gradients: &[DVector<f64>]) -> Result<HullSolution> {
    let first = gradients
        .first()
        .ok_or_else(|| Error::InvalidInput("no gradients given".into()))?;
    let m = first.len();
    if gradients.iter().any(|g| g.len() != m) {
        return Err(Error::InvalidInput("gradients differ in length".into()));
    }
    if gradients.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("objective gradient"));
    }
    let g = gram(gradients);
    let weights = if gradients.len() <= 3 {
        exact_small(&g)
    } else {
        projected_gradient(&g)
    };
    let direction = gradients
        .iter()
        .zip(&weights)
        .fold(DVector::zeros(m), |acc, (gi, wi)| acc + gi * *wi);
    let is_pareto_stationary = direction.norm() <= PARETO_TOL;
    Ok(HullSolution {
        weights,
        direction,
        is_pareto_stationary,
    })
}

/// Applies `scaling`, then solves the min-norm problem.
pub fn common_direction(
    gradients: &[DVector<f64>],
    scaling: GradientScaling,
) -> Result<HullSolution> {
    match scaling {
        GradientScaling::Raw => min_norm_hull_point(gradients),
        GradientScaling::UnitNormalized => {
            let scaled: Vec<DVector<f64>> = gradients
                .iter()
                .map(|g| {
                    let n = g.norm();
                    if n > 0.0 {
                        g / n
                    } else {
                        g.clone()
                    }
                })
                .collect();
            min_norm_hull_point(&scaled)
        }
    }
}

/// The unit element of `cone` with the largest cosine similarity to
/// `direction`.
///
/// Top-k cones keep the `k` entries largest in absolute value of `ranking`
/// (or of `direction` itself when no ranking is given).
pub fn cone_project(
    direction: &DVector<f64>,
    cone: &AffineConeSpec,
    ranking: Option<&DVector<f64>>,
) -> Result<DVector<f64>> {
    let m = direction.len();
    cone.validate(m)?;
    if direction.norm() == 0.0 {
        return Err(Error::InvalidInput(
            "cannot project a zero direction".into(),
        ));
    }
    let projected = match cone {
        AffineConeSpec::Full => direction.clone(),
        AffineConeSpec::Subset { indices } => DVector::from_fn(m, |i, _| {
            if indices.contains(&i) {
                direction[i]
            } else {
                0.0
            }
        }),
        AffineConeSpec::SignConstrained { signs } => DVector::from_fn(m, |i, _| {
            if signs[i].admits(direction[i]) {
                direction[i]
            } else {
                0.0
            }
        }),
        AffineConeSpec::TopK { k } => {
            let keep = top_k_indices(ranking.unwrap_or(direction), *k);
            DVector::from_fn(m, |i, _| if keep.contains(&i) { direction[i] } else { 0.0 })
        }
    };
    let norm = projected.norm();
    if norm == 0.0 {
        return Err(Error::EmptyProjection);
    }
    Ok(projected / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::SignConstraint;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn single_gradient_is_identity() {
        let sol = min_norm_hull_point(&[v(&[0.3, -2.0])]).unwrap();
        assert_eq!(sol.weights, vec![1.0]);
        assert_eq!(sol.direction, v(&[0.3, -2.0]));
        assert!(!sol.is_pareto_stationary);
    }

    #[test]
    fn opposite_gradients_are_stationary() {
        let g = v(&[1.0, 2.0, -0.5]);
        let sol = min_norm_hull_point(&[g.clone(), -g]).unwrap();
        assert!(sol.is_pareto_stationary);
        assert!(sol.direction.norm() < 1e-15);
    }

    #[test]
    fn orthogonal_unit_vectors() {
        let sol = min_norm_hull_point(&[v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])]).unwrap();
        assert!((sol.weights[0] - 0.5).abs() < 1e-15);
        assert!((sol.direction - v(&[0.5, 0.5, 0.0])).norm() < 1e-15);
        assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn three_gradients_interior_solution() {
        let gs = [v(&[1.0, 0.0]), v(&[-0.5, 0.8]), v(&[-0.5, -0.8])];
        let sol = min_norm_hull_point(&gs).unwrap();
        assert!(sol.is_pareto_stationary);
        assert!(sol.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn projected_gradient_matches_exact_on_three() {
        let gs = [
            v(&[1.0, 0.2, 0.0]),
            v(&[0.3, 1.0, 0.1]),
            v(&[0.1, 0.4, 1.0]),
        ];
        let exact = min_norm_hull_point(&gs).unwrap();
        let pgd = projected_gradient(&gram(&gs));
        let dir = gs
            .iter()
            .zip(&pgd)
            .fold(DVector::zeros(3), |a, (g, w)| a + g * *w);
        assert!((dir.norm() - exact.direction.norm()).abs() < 1e-9);
    }

    #[test]
    fn unit_normalization_equalizes_scales() {
        let gs = [v(&[100.0, 0.0]), v(&[0.0, 1.0])];
        let raw = common_direction(&gs, GradientScaling::Raw).unwrap();
        let unit = common_direction(&gs, GradientScaling::UnitNormalized).unwrap();
        assert!(raw.direction[0] < raw.direction[1]);
        assert!((unit.direction[0] - unit.direction[1]).abs() < 1e-15);
    }

    #[test]
    fn cone_examples() {
        let d = v(&[0.6, -0.8]);
        assert_eq!(cone_project(&d, &AffineConeSpec::Full, None).unwrap(), d);
        assert_eq!(
            cone_project(&d, &AffineConeSpec::Subset { indices: vec![0] }, None).unwrap(),
            v(&[1.0, 0.0])
        );
        assert_eq!(
            cone_project(&v(&[0.6, -0.8, 0.0]), &AffineConeSpec::TopK { k: 1 }, None).unwrap(),
            v(&[0.0, -1.0, 0.0])
        );
        let signs = AffineConeSpec::SignConstrained {
            signs: vec![SignConstraint::NonPositive, SignConstraint::Free],
        };
        assert_eq!(cone_project(&d, &signs, None).unwrap(), v(&[0.0, -1.0]));
        assert_eq!(
            cone_project(&d, &AffineConeSpec::Subset { indices: vec![] }, None).unwrap_err(),
            Error::EmptyProjection
        );
    }

    #[test]
    fn top_k_uses_ranking_when_given() {
        let d = v(&[0.6, -0.8, 0.0]);
        let ranking = v(&[5.0, 0.1, 0.0]);
        assert_eq!(
            cone_project(&d, &AffineConeSpec::TopK { k: 1 }, Some(&ranking)).unwrap(),
            v(&[1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&v(&[0.5, 0.5, 0.5]));
        assert!((p.sum() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|x| (*x - 1.0 / 3.0).abs() < 1e-15));
        let q = project_simplex(&v(&[2.0, -1.0]));
        assert_eq!(q, v(&[1.0, 0.0]));
    }
}
