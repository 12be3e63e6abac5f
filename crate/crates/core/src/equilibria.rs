//! Locating, classifying and continuing equilibria.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::{eval_field, jacobian_x, DiffBackend, ParamModel};
use crate::error::{Error, Result};
use crate::sensitivity::equilibrium_sensitivity;

/// Convergence tolerance on `||F||` for every located equilibrium.
pub const NEWTON_TOL: f64 = 1e-10;
/// Eigenvalues with `|Re| <= HYPERBOLICITY_MARGIN` make an equilibrium non-hyperbolic.
pub const HYPERBOLICITY_MARGIN: f64 = 1e-8;
/// Newton iteration cap used by continuation.
pub const CONTINUATION_MAX_ITER: usize = 50;
const CENSUS_MAX_ITER: usize = 100;
const MIN_OVERLAP_GAP: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "unstable_dims", rename_all = "snake_case")]
pub enum Classification {
    Stable,
    /// Exactly one eigenvalue with positive real part.
    Saddle,
    /// `k >= 2` eigenvalues with positive real part.
    Unstable(usize),
    NonHyperbolic,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::Stable => "stable",
            Classification::Saddle => "saddle",
            Classification::Unstable(_) => "unstable",
            Classification::NonHyperbolic => "non_hyperbolic",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Unstable(k) => write!(f, "unstable({k})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Classifies a set of eigenvalues by the signs of their real parts.
pub fn classify_eigenvalues(eigenvalues: &[Complex64], margin: f64) -> Classification {
    if eigenvalues.iter().any(|l| l.re.abs() <= margin) {
        return Classification::NonHyperbolic;
    }
    match eigenvalues.iter().filter(|l| l.re > margin).count() {
        0 => Classification::Stable,
        1 => Classification::Saddle,
        k => Classification::Unstable(k),
    }
}

/// Classifies the equilibrium whose Jacobian is `jac`.
pub fn classify(jac: &DMatrix<f64>, margin: f64) -> Classification {
    let values: Vec<Complex64> = jac.complex_eigenvalues().iter().copied().collect();
    classify_eigenvalues(&values, margin)
}

/// Eigenvalues sorted by ascending real part (then imaginary part), with unit
/// right eigenvectors `J v = l v` and unit left eigenvectors `w^T J = l w^T`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub right: Vec<DVector<Complex64>>,
    pub left: Vec<DVector<Complex64>>,
}

/// Unit vector spanning the numerical null space of `a`, with the phase
/// fixed so that its largest-magnitude entry is real and positive.
fn null_vector(a: DMatrix<Complex64>) -> DVector<Complex64> {
    let n = a.ncols();
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let (imin, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
            );
    let mut v = DVector::from_iterator(n, v_t.row(imin).iter().map(|c| c.conj()));
    let pivot = v
        .iter()
        .copied()
        .enumerate()
        .fold((0, -1.0), |acc, (i, c)| {
            if c.norm() > acc.1 + 1e-12 {
                (i, c.norm())
            } else {
                acc
            }
        })
        .0;
    let phase = v[pivot].conj() / v[pivot].norm();
    v *= phase;
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

pub fn eigen_decompose(jac: &DMatrix<f64>) -> EigenDecomposition {
    let n = jac.nrows();
    let mut values: Vec<Complex64> = jac.complex_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let jc: DMatrix<Complex64> = jac.map(|v| Complex64::new(v, 0.0));
    let jt = jc.transpose();
    let eye = DMatrix::<Complex64>::identity(n, n);
    let right = values
        .iter()
        .map(|&l| null_vector(&jc - &eye * l))
        .collect();
    let left = values
        .iter()
        .map(|&l| null_vector(&jt - &eye * l))
        .collect();
    EigenDecomposition {
        values,
        right,
        left,
    }
}

/// A located fixed point together with its linearization.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub jacobian: DMatrix<f64>,
    pub eigenvalues: Vec<Complex64>,
    pub right_eigenvectors: Vec<DVector<Complex64>>,
    pub left_eigenvectors: Vec<DVector<Complex64>>,
    pub classification: Classification,
}

impl Equilibrium {
    /// Linearizes `model` at `x`, which is assumed to be a root already.
    pub fn at<M: ParamModel + ?Sized>(
        model: &M,
        x: DVector<f64>,
        params: &DVector<f64>,
        backend: &DiffBackend,
    ) -> Result<Self> {
        let residual_norm = eval_field(model, &x, params)?.norm();
        let jacobian = jacobian_x(model, &x, params, backend)?;
        let eig = eigen_decompose(&jacobian);
        let classification = classify_eigenvalues(&eig.values, HYPERBOLICITY_MARGIN);
        Ok(Self {
            x,
            residual_norm,
            jacobian,
            eigenvalues: eig.values,
            right_eigenvectors: eig.right,
            left_eigenvectors: eig.left,
            classification,
        })
    }

    pub fn is_complex(&self, index: usize) -> bool {
        self.eigenvalues[index].im.abs() > 1e-9 * self.jacobian.norm().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CensusCounts {
    pub stable: usize,
    pub saddle: usize,
    pub unstable: usize,
    pub non_hyperbolic: usize,
}

/// All equilibria found in a box, sorted lexicographically by coordinates.
#[derive(Debug, Clone)]
pub struct EquilibriumCensus {
    pub equilibria: Vec<Equilibrium>,
    pub bounds: Vec<(f64, f64)>,
}

impl EquilibriumCensus {
    pub fn counts(&self) -> CensusCounts {
        let mut c = CensusCounts::default();
        for eq in &self.equilibria {
            match eq.classification {
                Classification::Stable => c.stable += 1,
                Classification::Saddle => c.saddle += 1,
                Classification::Unstable(_) => c.unstable += 1,
                Classification::NonHyperbolic => c.non_hyperbolic += 1,
            }
        }
        c
    }

    pub fn stable(&self) -> impl Iterator<Item = (usize, &Equilibrium)> {
        self.of_kind(Classification::Stable)
    }

    pub fn saddles(&self) -> impl Iterator<Item = (usize, &Equilibrium)> {
        self.of_kind(Classification::Saddle)
    }

    fn of_kind(&self, kind: Classification) -> impl Iterator<Item = (usize, &Equilibrium)> {
        self.equilibria
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.classification == kind)
    }

    pub fn diameter(&self) -> f64 {
        box_diameter(&self.bounds)
    }
}

pub fn box_diameter(bounds: &[(f64, f64)]) -> f64 {
    bounds
        .iter()
        .map(|(lo, hi)| (hi - lo).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Outcome of a Newton solve.
#[derive(Debug, Clone)]
pub struct NewtonRoot {
    pub x: DVector<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Damped Newton iteration with backtracking on `||F||`. After reaching
/// `tol`, up to two more full steps polish the root.
pub fn newton_solve<M: ParamModel + ?Sized>(
    model: &M,
    start: &DVector<f64>,
    params: &DVector<f64>,
    backend: &DiffBackend,
    tol: f64,
    max_iter: usize,
) -> Option<NewtonRoot> {
    let mut x = start.clone();
    let mut f = eval_field(model, &x, params).ok()?;
    let mut fnorm = f.norm();
    let mut iterations = 0;
    while fnorm > tol {
        if iterations == max_iter {
            return None;
        }
        iterations += 1;
        let jac = jacobian_x(model, &x, params, backend).ok()?;
        let step = jac.lu().solve(&(-&f))?;
        if step.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut damping = 1.0;
        loop {
            let trial = &x + &step * damping;
            if let Ok(ft) = eval_field(model, &trial, params) {
                let tn = ft.norm();
                if tn <= (1.0 - 1e-4 * damping) * fnorm {
                    x = trial;
                    f = ft;
                    fnorm = tn;
                    break;
                }
            }
            damping *= 0.5;
            if damping < 1e-6 {
                return None;
            }
        }
    }
    for _ in 0..2 {
        let Ok(jac) = jacobian_x(model, &x, params, backend) else {
            break;
        };
        let Some(step) = jac.lu().solve(&(-&f)) else {
            break;
        };
        let trial = &x + step;
        match eval_field(model, &trial, params) {
            Ok(ft) if ft.norm() < fnorm => {
                x = trial;
                fnorm = ft.norm();
                f = ft;
            }
            _ => break,
        }
    }
    Some(NewtonRoot {
        x,
        residual_norm: fnorm,
        iterations,
    })
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * scale;
        index /= b;
        scale *= inv;
    }
    out
}

/// Halton points in `bounds`, shifted modulo 1 by a seeded random offset.
pub fn halton_points(bounds: &[(f64, f64)], count: usize, rng_seed: u64) -> Vec<DVector<f64>> {
    assert!(
        bounds.len() <= PRIMES.len(),
        "Halton seeding supports up to 16 dimensions"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let shift: Vec<f64> = bounds.iter().map(|_| rng.random::<f64>()).collect();
    (0..count)
        .map(|i| {
            DVector::from_iterator(
                bounds.len(),
                bounds.iter().enumerate().map(|(d, (lo, hi))| {
                    let u = (radical_inverse(i as u64 + 1, PRIMES[d]) + shift[d]).fract();
                    lo + u * (hi - lo)
                }),
            )
        })
        .collect()
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> std::cmp::Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Multistart damped Newton from `n_seeds` quasi-random seeds in `bounds`.
///
/// Roots outside the box are dropped, duplicates within `1e-6 * diam(box)`
/// collapse to the one with the smaller residual, and the survivors are
/// classified and sorted lexicographically.
pub fn find_equilibria<M: ParamModel + ?Sized>(
    model: &M,
    params: &DVector<f64>,
    bounds: &[(f64, f64)],
    n_seeds: usize,
    rng_seed: u64,
    backend: &DiffBackend,
) -> Result<EquilibriumCensus> {
    if bounds.len() != model.state_dim() {
        return Err(Error::DimensionMismatch {
            what: "census box",
            expected: model.state_dim(),
            got: bounds.len(),
        });
    }
    if bounds.iter().any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::InvalidInput("census box is empty".into()));
    }
    if n_seeds == 0 {
        return Err(Error::InvalidInput("n_seeds must be at least 1".into()));
    }
    model.check_params(params)?;

    let diam = box_diameter(bounds);
    let slack = 1e-9 * diam;
    let dedup_radius = 1e-6 * diam;
    let seeds = halton_points(bounds, n_seeds, rng_seed);
    let mut roots: Vec<NewtonRoot> = seeds
        .par_iter()
        .filter_map(|s| newton_solve(model, s, params, backend, NEWTON_TOL, CENSUS_MAX_ITER))
        .filter(|r| {
            r.x.iter()
                .zip(bounds)
                .all(|(v, (lo, hi))| *v >= lo - slack && *v <= hi + slack)
        })
        .collect();
    if roots.is_empty() {
        return Err(Error::NoEquilibriumFound);
    }
    roots.sort_by(|a, b| {
        lexicographic(&a.x, &b.x).then(a.residual_norm.total_cmp(&b.residual_norm))
    });

    let mut unique: Vec<NewtonRoot> = Vec::new();
    for root in roots {
        match unique
            .iter_mut()
            .find(|u| (&u.x - &root.x).norm() <= dedup_radius)
        {
            Some(existing) => {
                if root.residual_norm < existing.residual_norm {
                    *existing = root;
                }
            }
            None => unique.push(root),
        }
    }
    unique.sort_by(|a, b| lexicographic(&a.x, &b.x));

    let equilibria = unique
        .into_iter()
        .map(|r| Equilibrium::at(model, r.x, params, backend))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumCensus {
        equilibria,
        bounds: bounds.to_vec(),
    })
}

/// Result of one continuation step.
#[derive(Debug, Clone)]
pub struct Continued {
    pub equilibrium: Equilibrium,
    pub iterations: usize,
}

/// Warm-started Newton re-solve of `prev` (located at `params_prev`) after
/// the parameters move to `params_new`.
///
/// Fails with [`Error::ContinuationLost`] if Newton does not converge within
/// 50 iterations or the root jumps further than
/// `100 * ||dp|| * ||dx*/dp||`, and with [`Error::ClassificationChanged`] if
/// the stability type changes.
pub fn continue_equilibrium<M: ParamModel + ?Sized>(
    model: &M,
    prev: &Equilibrium,
    params_prev: &DVector<f64>,
    params_new: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<Continued> {
    let sens = equilibrium_sensitivity(model, prev, params_prev, backend)
        .map_err(|e| Error::ContinuationLost(format!("sensitivity unavailable: {e}")))?;
    let dp = (params_new - params_prev).norm();
    let jump_radius = 100.0 * dp * sens.norm() + 10.0 * NEWTON_TOL * (1.0 + prev.x.norm());

    let root = newton_solve(
        model,
        &prev.x,
        params_new,
        backend,
        NEWTON_TOL,
        CONTINUATION_MAX_ITER,
    )
    .ok_or_else(|| Error::ContinuationLost("Newton did not converge".into()))?;
    let jump = (&root.x - &prev.x).norm();
    if jump > jump_radius {
        return Err(Error::ContinuationLost(format!(
            "root jumped {jump:.3e} (allowed {jump_radius:.3e})"
        )));
    }
    let equilibrium = Equilibrium::at(model, root.x, params_new, backend)?;
    if equilibrium.classification != prev.classification {
        return Err(Error::ClassificationChanged {
            from: prev.classification,
            to: equilibrium.classification,
        });
    }
    Ok(Continued {
        equilibrium,
        iterations: root.iterations,
    })
}

/// Index of the eigenvector of `eq` best aligned with `v_prev`, and the
/// overlap.
///
/// The overlap with eigenvector `i` is the magnitude of its coefficient in
/// the eigen-expansion of `v_prev`, `|w_i^T v_prev| / |w_i^T v_i|`. For a
/// normal Jacobian this equals `|<v_i, v_prev>|`; unlike that inner product
/// it still separates nearly parallel eigenvectors of non-normal Jacobians.
///
/// Members of a complex-conjugate pair overlap a real vector equally; in that
/// case the member with positive imaginary part is returned.
pub fn match_eigenpair(eq: &Equilibrium, v_prev: &DVector<Complex64>) -> Result<(usize, f64)> {
    let reference = v_prev / Complex64::new(v_prev.norm(), 0.0);
    let overlaps: Vec<f64> = eq
        .right_eigenvectors
        .iter()
        .zip(&eq.left_eigenvectors)
        .map(|(v, w)| {
            let scale = w.dot(v).norm();
            if scale > f64::EPSILON {
                w.dot(&reference).norm() / scale
            } else {
                0.0
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..overlaps.len()).collect();
    order.sort_by(|&a, &b| overlaps[b].total_cmp(&overlaps[a]).then(a.cmp(&b)));
    let best = order[0];
    if let Some(&second) = order.get(1) {
        let gap = overlaps[best] - overlaps[second];
        if gap < MIN_OVERLAP_GAP {
            let (a, b) = (eq.eigenvalues[best], eq.eigenvalues[second]);
            let conjugate_pair = a.im != 0.0 && (a - b.conj()).norm() <= 1e-9 * (1.0 + a.norm());
            if conjugate_pair {
                let pick = if a.im > 0.0 { best } else { second };
                return Ok((pick, overlaps[pick]));
            }
            return Err(Error::AmbiguousMatch {
                best: overlaps[best],
                second: overlaps[second],
            });
        }
    }
    Ok((best, overlaps[best]))
}

/// Picks one equilibrium of a census: the one of the requested kind nearest
/// to `anchor`, optionally restricted to a radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquilibriumSelector {
    pub near: Vec<f64>,
    #[serde(default = "default_selector_kind")]
    pub kind: SelectorKind,
    #[serde(default)]
    pub radius: Option<f64>,
}

fn default_selector_kind() -> SelectorKind {
    SelectorKind::Stable
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectorKind {
    Stable,
    Saddle,
    Any,
}

/// Why a selector failed to resolve.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SelectorError {
    #[error("selector near {0:?} matches no equilibrium")]
    NoMatch(Vec<f64>),
    #[error("selector near {0:?} matches {1} equilibria")]
    Ambiguous(Vec<f64>, usize),
}

impl EquilibriumSelector {
    pub fn new(near: Vec<f64>, kind: SelectorKind) -> Self {
        Self {
            near,
            kind,
            radius: None,
        }
    }

    pub fn resolve(&self, census: &EquilibriumCensus) -> std::result::Result<usize, SelectorError> {
        let anchor = DVector::from_column_slice(&self.near);
        let mut candidates: Vec<(usize, f64)> = census
            .equilibria
            .iter()
            .enumerate()
            .filter(|(_, e)| e.x.len() == anchor.len())
            .filter(|(_, e)| match self.kind {
                SelectorKind::Stable => e.classification == Classification::Stable,
                SelectorKind::Saddle => e.classification == Classification::Saddle,
                SelectorKind::Any => true,
            })
            .map(|(i, e)| (i, (&e.x - &anchor).norm()))
            .collect();
        if let Some(r) = self.radius {
            candidates.retain(|(_, d)| *d <= r);
            return match candidates.len() {
                0 => Err(SelectorError::NoMatch(self.near.clone())),
                1 => Ok(candidates[0].0),
                k => Err(SelectorError::Ambiguous(self.near.clone(), k)),
            };
        }
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
        match candidates.as_slice() {
            [] => Err(SelectorError::NoMatch(self.near.clone())),
            [(i, _)] => Ok(*i),
            [(i, d0), (_, d1), ..] => {
                if (d1 - d0) <= 1e-9 * d0.max(1.0) {
                    let ties = candidates
                        .iter()
                        .filter(|(_, d)| d - d0 <= 1e-9 * d0.max(1.0))
                        .count();
                    Err(SelectorError::Ambiguous(self.near.clone(), ties))
                } else {
                    Ok(*i)
                }
            }
        }
    }
}
