//! Adaptive integration and Monte Carlo estimates of basin fractions.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynsys::{eval_field, ParamModel};
use crate::equilibria::{box_diameter, Classification, EquilibriumCensus};
use crate::error::{Error, Result};

pub const DEFAULT_T_MAX: f64 = 200.0;
/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_900_4;
const BLOW_UP_NORM: f64 = 1e6;
const MAX_STEPS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

impl Tolerance {
    pub fn halved(self) -> Self {
        Self {
            rtol: self.rtol * 0.5,
            atol: self.atol * 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationStatus {
    ReachedEnd,
    /// The stop predicate fired before `t_max`.
    Stopped,
}

#[derive(Debug, Clone)]
pub struct IntegrationOutcome {
    pub state: DVector<f64>,
    pub t: f64,
    pub steps: usize,
    pub status: IntegrationStatus,
}

// Dormand-Prince 5(4) tableau; the field is autonomous so the nodes c_i are not needed
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `dx/dt = F(x, p)` from `x0` with a Dormand-Prince 5(4) pair,
/// calling `stop(t, x)` after every accepted step.
pub fn integrate_until<M, S>(
    model: &M,
    params: &DVector<f64>,
    x0: &DVector<f64>,
    t_max: f64,
    tol: Tolerance,
    mut stop: S,
) -> Result<IntegrationOutcome>
where
    M: ParamModel + ?Sized,
    S: FnMut(f64, &DVector<f64>) -> bool,
{
    if !(t_max > 0.0) || !(tol.rtol > 0.0) || !(tol.atol > 0.0) {
        return Err(Error::InvalidInput(
            "t_max and tolerances must be positive".into(),
        ));
    }
    let f = |x: &DVector<f64>| eval_field(model, x, params);

    let mut t = 0.0;
    let mut x = x0.clone();
    if stop(t, &x) {
        return Ok(IntegrationOutcome {
            state: x,
            t,
            steps: 0,
            status: IntegrationStatus::Stopped,
        });
    }
    let mut k1 = f(&x)?;
    let mut h = (1e-2f64).min(t_max);
    let mut steps = 0;

    while t < t_max {
        if steps >= MAX_STEPS {
            return Err(Error::InvalidInput(format!(
                "step limit reached at t = {t}"
            )));
        }
        h = h.min(t_max - t);
        let k2 = f(&(&x + &k1 * (h * A21)))?;
        let k3 = f(&(&x + (&k1 * A31 + &k2 * A32) * h))?;
        let k4 = f(&(&x + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h))?;
        let k5 = f(&(&x + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h))?;
        let k6 = f(&(&x + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h))?;
        let x_new = &x + (&k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * h;
        let k7 = f(&x_new)?;
        let err_vec = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;

        let n = x.len() as f64;
        let err = (err_vec
            .iter()
            .zip(x.iter().zip(x_new.iter()))
            .map(|(e, (a, b))| {
                let sc = tol.atol + tol.rtol * a.abs().max(b.abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            / n)
            .sqrt();

        if err <= 1.0 {
            t += h;
            x = x_new;
            k1 = k7;
            steps += 1;
            if x.norm() > BLOW_UP_NORM {
                return Err(Error::BlowUp { t });
            }
            if stop(t, &x) {
                return Ok(IntegrationOutcome {
                    state: x,
                    t,
                    steps,
                    status: IntegrationStatus::Stopped,
                });
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < 1e-14 * t.max(1.0) {
            return Err(Error::InvalidInput(format!(
                "step size underflow at t = {t}"
            )));
        }
    }
    Ok(IntegrationOutcome {
        state: x,
        t,
        steps,
        status: IntegrationStatus::ReachedEnd,
    })
}

/// Integrates to `t_max`, or stops early once `||F|| < 1e-9` within `1e-4`
/// of a stable equilibrium of `census` when one is given.
pub fn integrate<M: ParamModel + ?Sized>(
    model: &M,
    params: &DVector<f64>,
    x0: &DVector<f64>,
    t_max: f64,
    tol: Tolerance,
    census: Option<&EquilibriumCensus>,
) -> Result<IntegrationOutcome> {
    integrate_until(model, params, x0, t_max, tol, |_, x| match census {
        None => false,
        Some(c) => {
            c.stable().any(|(_, e)| (&e.x - x).norm() < 1e-4)
                && eval_field(model, x, params).is_ok_and(|f| f.norm() < 1e-9)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "outcome", content = "census_index")]
pub enum Classified {
    /// Index into the census' equilibria.
    Attractor(usize),
    Unresolved,
}

/// Integrates from `x0` until it comes within the capture radius
/// `1e-4 * diam(census box)` of exactly one stable equilibrium.
pub fn classify_initial_condition<M: ParamModel + ?Sized>(
    model: &M,
    params: &DVector<f64>,
    x0: &DVector<f64>,
    census: &EquilibriumCensus,
    t_max: f64,
    tol: Tolerance,
) -> Classified {
    let capture = 1e-4 * census.diameter();
    let stable: Vec<(usize, &DVector<f64>)> = census
        .equilibria
        .iter()
        .enumerate()
        .filter(|(_, e)| e.classification == Classification::Stable)
        .map(|(i, e)| (i, &e.x))
        .collect();
    let captured = |x: &DVector<f64>| -> Option<usize> {
        let mut hits = stable.iter().filter(|(_, s)| (*s - x).norm() <= capture);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Some(*i),
            _ => None,
        }
    };
    let mut found = None;
    let outcome = integrate_until(model, params, x0, t_max, tol, |_, x| {
        found = captured(x);
        found.is_some()
    });
    match (outcome, found) {
        (Ok(_), Some(i)) => Classified::Attractor(i),
        _ => Classified::Unresolved,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorFraction {
    pub census_index: usize,
    pub x: Vec<f64>,
    pub count: usize,
    pub fraction: f64,
    /// 99% normal-approximation binomial half-width.
    pub half_width: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasinEstimate {
    pub attractors: Vec<AttractorFraction>,
    pub unresolved_count: usize,
    pub unresolved_fraction: f64,
    pub unresolved_half_width: f64,
    pub n_samples: usize,
    pub rng_seed: u64,
    pub bounds: Vec<(f64, f64)>,
}

impl BasinEstimate {
    pub fn fraction_of(&self, census_index: usize) -> Option<&AttractorFraction> {
        self.attractors
            .iter()
            .find(|a| a.census_index == census_index)
    }
}

pub fn binomial_half_width(fraction: f64, n: usize) -> f64 {
    Z99 * (fraction * (1.0 - fraction) / n as f64).sqrt()
}

/// Uniform point in `bounds` drawn from the RNG stream of sample `index`.
pub fn sample_point(bounds: &[(f64, f64)], rng_seed: u64, index: usize) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(index as u64);
    DVector::from_iterator(
        bounds.len(),
        bounds
            .iter()
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>()),
    )
}

/// Monte Carlo basin fractions of the stable equilibria of `census` for
/// initial conditions drawn uniformly from `bounds`.
#[allow(clippy::too_many_arguments)]
pub fn basin_fractions<M: ParamModel + ?Sized>(
    model: &M,
    params: &DVector<f64>,
    census: &EquilibriumCensus,
    bounds: &[(f64, f64)],
    n_samples: usize,
    rng_seed: u64,
    t_max: f64,
    tol: Tolerance,
) -> Result<BasinEstimate> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("n_samples must be at least 1".into()));
    }
    if census.stable().next().is_none() {
        return Err(Error::InvalidInput(
            "census has no stable equilibrium".into(),
        ));
    }
    if bounds.len() != model.state_dim() || box_diameter(bounds) == 0.0 {
        return Err(Error::InvalidInput("invalid sampling box".into()));
    }
    let outcomes: Vec<Classified> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let x0 = sample_point(bounds, rng_seed, i);
            classify_initial_condition(model, params, &x0, census, t_max, tol)
        })
        .collect();

    let n = n_samples as f64;
    let attractors = census
        .stable()
        .map(|(idx, eq)| {
            let count = outcomes
                .iter()
                .filter(|o| **o == Classified::Attractor(idx))
                .count();
            let fraction = count as f64 / n;
            AttractorFraction {
                census_index: idx,
                x: eq.x.iter().copied().collect(),
                count,
                fraction,
                half_width: binomial_half_width(fraction, n_samples),
            }
        })
        .collect();
    let unresolved_count = outcomes
        .iter()
        .filter(|o| **o == Classified::Unresolved)
        .count();
    let unresolved_fraction = unresolved_count as f64 / n;
    Ok(BasinEstimate {
        attractors,
        unresolved_count,
        unresolved_fraction,
        unresolved_half_width: binomial_half_width(unresolved_fraction, n_samples),
        n_samples,
        rng_seed,
        bounds: bounds.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{ClosureModel, DiffBackend};
    use crate::equilibria::find_equilibria;

    fn decay() -> ClosureModel {
        ClosureModel::new(1, &[], |x, _| -x.clone())
    }

    #[test]
    fn exponential_decay() {
        let out = integrate(
            &decay(),
            &DVector::zeros(0),
            &DVector::from_element(1, 1.0),
            20.0,
            Tolerance::default(),
            None,
        )
        .unwrap();
        assert_eq!(out.status, IntegrationStatus::ReachedEnd);
        assert!((out.t - 20.0).abs() < 1e-12);
        assert!((out.state[0] - (-20.0f64).exp()).abs() <= 1e-8 * (-20.0f64).exp() + 1e-10);
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let m = ClosureModel::new(2, &[], |x, _| DVector::from_vec(vec![x[1], -x[0]]));
        let out = integrate(
            &m,
            &DVector::zeros(0),
            &DVector::from_vec(vec![1.0, 0.0]),
            10.0,
            Tolerance::default(),
            None,
        )
        .unwrap();
        assert!((out.state[0] - 10f64.cos()).abs() < 1e-6);
        assert!((out.state[1] + 10f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn blow_up_is_reported() {
        let m = ClosureModel::new(1, &[], |x, _| DVector::from_element(1, x[0] * x[0]));
        let err = integrate(
            &m,
            &DVector::zeros(0),
            &DVector::from_element(1, 1.0),
            5.0,
            Tolerance::default(),
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::BlowUp { .. }));
    }

    #[test]
    fn single_attractor_has_full_basin() {
        let m = decay();
        let p = DVector::zeros(0);
        let census =
            find_equilibria(&m, &p, &[(-1.0, 1.0)], 8, 0, &DiffBackend::default()).unwrap();
        let est = basin_fractions(
            &m,
            &p,
            &census,
            &[(-5.0, 5.0)],
            200,
            3,
            200.0,
            Tolerance::default(),
        )
        .unwrap();
        assert_eq!(est.attractors.len(), 1);
        assert_eq!(est.attractors[0].fraction, 1.0);
        assert_eq!(est.unresolved_count, 0);
    }

    #[test]
    fn sample_streams_are_independent_of_order() {
        let b = [(0.0, 1.0), (-1.0, 1.0)];
        let a = sample_point(&b, 11, 7);
        let _ = sample_point(&b, 11, 3);
        assert_eq!(a, sample_point(&b, 11, 7));
        assert_ne!(a, sample_point(&b, 11, 8));
    }
}
