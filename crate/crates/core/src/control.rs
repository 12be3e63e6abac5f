//! Iterative parameter control of eigenvalues and saddle distances.
//!
//! Each iteration computes the improving direction of every objective,
//! combines them through the minimum-norm hull point, projects the result
//! onto the admissible cone, takes a step of length `epsilon`, and follows
//! every tracked equilibrium by continuation. Failures never abort the run;
//! they end it with a recorded event and termination reason.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynsys::{AffineConeSpec, DiffBackend, ParamModel};
use crate::equilibria::{
    continue_equilibrium, find_equilibria, match_eigenpair, Classification, Equilibrium,
    EquilibriumCensus, EquilibriumSelector, SelectorError,
};
use crate::error::Error;
use crate::mgda::{common_direction, cone_project, GradientScaling};
use crate::sensitivity::{
    eigenvalue_gradients, mean_saddle_distance_gradient, saddle_distance, saddle_distance_gradient,
};

/// Where and how densely to search for equilibria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusSpec {
    pub bounds: Vec<(f64, f64)>,
    #[serde(default = "default_seeds")]
    pub n_seeds: usize,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_seeds() -> usize {
    400
}

impl CensusSpec {
    pub fn new(bounds: Vec<(f64, f64)>, n_seeds: usize, rng_seed: u64) -> Self {
        Self {
            bounds,
            n_seeds,
            rng_seed,
        }
    }

    pub fn run<M: ParamModel + ?Sized>(
        &self,
        model: &M,
        params: &DVector<f64>,
        backend: &DiffBackend,
    ) -> crate::Result<EquilibriumCensus> {
        find_equilibria(
            model,
            params,
            &self.bounds,
            self.n_seeds,
            self.rng_seed,
            backend,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_n_ite")]
    pub n_ite: usize,
    #[serde(default = "default_cone")]
    pub cone: AffineConeSpec,
    #[serde(default)]
    pub scaling: GradientScaling,
    /// End the run when a targeted eigenvalue becomes complex.
    #[serde(default)]
    pub complex_fatal: bool,
    /// Full census re-scan period; 0 disables it.
    #[serde(default = "default_rescan")]
    pub rescan_every: usize,
    pub census: CensusSpec,
    #[serde(default)]
    pub backend: DiffBackend,
}

fn default_epsilon() -> f64 {
    1e-2
}
fn default_n_ite() -> usize {
    1000
}
fn default_cone() -> AffineConeSpec {
    AffineConeSpec::Full
}
fn default_rescan() -> usize {
    50
}

impl ControlConfig {
    pub fn new(census: CensusSpec) -> Self {
        Self {
            epsilon: default_epsilon(),
            n_ite: default_n_ite(),
            cone: default_cone(),
            scaling: GradientScaling::default(),
            complex_fatal: false,
            rescan_every: default_rescan(),
            census,
            backend: DiffBackend::default(),
        }
    }

    fn validate(&self, param_dim: usize) -> crate::Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidInput("epsilon must be positive".into()));
        }
        if self.n_ite == 0 {
            return Err(Error::InvalidInput("n_ite must be at least 1".into()));
        }
        self.cone.validate(param_dim)
    }
}

/// Which eigenvalue of the controlled equilibrium to target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "by", deny_unknown_fields)]
pub enum EigenChoice {
    /// Position in the ascending-real-part ordering at the initial parameters.
    Index { index: usize },
    /// The eigenvalue whose right eigenvector is most aligned with the
    /// direction from the equilibrium to the selected saddle.
    TowardSaddle { saddle: EquilibriumSelector },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenTarget {
    pub eigen: EigenChoice,
    /// Required decrease of the real part; `None` steers without a goal.
    #[serde(default)]
    pub delta: Option<f64>,
}

impl EigenTarget {
    pub fn index(index: usize, delta: Option<f64>) -> Self {
        Self {
            eigen: EigenChoice::Index { index },
            delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaddleTarget {
    pub saddle: EquilibriumSelector,
    /// Required increase of the distance.
    #[serde(default)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeanDistanceTarget {
    pub saddles: Vec<EquilibriumSelector>,
    #[serde(default)]
    pub delta: Option<f64>,
}

/// Full description of a control run's objectives.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ControlProblem {
    pub attractor: Option<EquilibriumSelector>,
    pub eigen: Vec<EigenTarget>,
    pub saddles: Vec<SaddleTarget>,
    pub mean_distance: Option<MeanDistanceTarget>,
    /// End the run if any stable equilibrium of the initial census is lost.
    pub preserve_stable: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlSetupError {
    #[error(transparent)]
    Selector(#[from] SelectorError),
    #[error(transparent)]
    Invalid(#[from] Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "role", content = "index")]
pub enum TrackedRole {
    Attractor,
    /// Position among the tracked saddles.
    Saddle(usize),
    /// Census index of another preserved stable equilibrium.
    Stable(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "event")]
pub enum ControlEvent {
    GoalReached,
    ComplexOnset {
        target: usize,
    },
    ComplexEnd {
        target: usize,
    },
    Bifurcation {
        role: TrackedRole,
        detail: String,
    },
    AmbiguousMatch {
        target: usize,
        detail: String,
    },
    SensitivityFailure {
        detail: String,
    },
    StationaryObjective {
        objective: usize,
    },
    Stall {
        detail: String,
    },
    ParamDomain {
        detail: String,
    },
    /// The step would have left the parameter domain along `param`, which
    /// was frozen for this iteration.
    DomainBoundary {
        param: String,
    },
    CensusChanged {
        stable_before: usize,
        stable_after: usize,
    },
}

impl ControlEvent {
    pub fn tag(&self) -> &'static str {
        match self {
            ControlEvent::GoalReached => "goal",
            ControlEvent::ComplexOnset { .. } => "complex_onset",
            ControlEvent::ComplexEnd { .. } => "complex_end",
            ControlEvent::Bifurcation { .. } => "bifurcation",
            ControlEvent::AmbiguousMatch { .. } => "ambiguous_match",
            ControlEvent::SensitivityFailure { .. } => "sensitivity_failure",
            ControlEvent::StationaryObjective { .. } => "stationary_objective",
            ControlEvent::Stall { .. } => "stall",
            ControlEvent::ParamDomain { .. } => "param_domain",
            ControlEvent::DomainBoundary { .. } => "domain_boundary",
            ControlEvent::CensusChanged { .. } => "census_changed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GoalReached,
    MaxIterations,
    Bifurcation,
    ComplexEigenvalue,
    Stall,
    AmbiguousMatch,
    SensitivityFailure,
    ParamDomain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlRecord {
    pub iteration: usize,
    pub params: Vec<f64>,
    /// Targeted eigenvalues, in target order.
    pub eigenvalues: Vec<Complex64>,
    /// Distances to every tracked saddle.
    pub distances: Vec<f64>,
    pub mean_distance: Option<f64>,
    /// Unit step direction applied after this record.
    pub direction: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    /// Eigenvector overlaps from matching against the previous iteration.
    pub overlaps: Vec<f64>,
    pub events: Vec<ControlEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlTrace {
    pub param_names: Vec<String>,
    pub epsilon: f64,
    pub records: Vec<ControlRecord>,
    pub termination: Termination,
    /// Census index of the controlled equilibrium at the initial parameters.
    pub attractor_index: usize,
    /// Eigen indices of the targets at the initial parameters.
    pub initial_eigen_indices: Vec<usize>,
    /// Position of the controlled equilibrium at the last record.
    pub final_attractor: Vec<f64>,
}

impl ControlTrace {
    /// Number of parameter updates applied.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn final_params(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.records.last().expect("trace has a record").params)
    }

    pub fn eigen_series(&self, target: usize) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.eigenvalues[target].re)
            .collect()
    }

    pub fn mean_distance_series(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(|r| r.mean_distance)
            .collect()
    }

    pub fn has_event(&self, tag: &str) -> bool {
        self.records
            .iter()
            .any(|r| r.events.iter().any(|e| e.tag() == tag))
    }
}

fn resolve_eigen(
    choice: &EigenChoice,
    census: &EquilibriumCensus,
    attractor: &Equilibrium,
) -> Result<usize, ControlSetupError> {
    match choice {
        EigenChoice::Index { index } => {
            if *index < attractor.eigenvalues.len() {
                Ok(*index)
            } else {
                Err(Error::InvalidInput(format!("eigen index {index} out of range")).into())
            }
        }
        EigenChoice::TowardSaddle { saddle } => {
            let s = &census.equilibria[saddle.resolve(census)?];
            let dir = (&s.x - &attractor.x).map(|v| Complex64::new(v, 0.0));
            let dir = &dir / Complex64::new(dir.norm(), 0.0);
            let best = attractor
                .right_eigenvectors
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.dotc(&dir).norm()))
                .fold((0, -1.0), |b, (i, o)| if o > b.1 { (i, o) } else { b });
            Ok(best.0)
        }
    }
}

struct Tracked {
    attractor: Equilibrium,
    saddles: Vec<Equilibrium>,
    others: Vec<(usize, Equilibrium)>,
}

/// Continues every tracked equilibrium to `next`; the first failure is
/// returned as an event.
fn continue_all<M: ParamModel + ?Sized>(
    model: &M,
    tracked: &Tracked,
    prev: &DVector<f64>,
    next: &DVector<f64>,
    backend: &DiffBackend,
) -> Result<Tracked, ControlEvent> {
    let step = |eq: &Equilibrium, role: TrackedRole| {
        continue_equilibrium(model, eq, prev, next, backend)
            .map(|c| c.equilibrium)
            .map_err(|e| ControlEvent::Bifurcation {
                role,
                detail: e.to_string(),
            })
    };
    let attractor = step(&tracked.attractor, TrackedRole::Attractor)?;
    let saddles = tracked
        .saddles
        .iter()
        .enumerate()
        .map(|(i, s)| step(s, TrackedRole::Saddle(i)))
        .collect::<Result<Vec<_>, _>>()?;
    let others = tracked
        .others
        .iter()
        .map(|(i, e)| step(e, TrackedRole::Stable(*i)).map(|c| (*i, c)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Tracked {
        attractor,
        saddles,
        others,
    })
}

/// Runs the general control loop for `problem` from parameters `params0`.
pub fn run_control<M: ParamModel + ?Sized>(
    model: &M,
    params0: &DVector<f64>,
    problem: &ControlProblem,
    config: &ControlConfig,
) -> Result<ControlTrace, ControlSetupError> {
    config.validate(model.param_dim())?;
    let backend = config.backend;
    let census = config.census.run(model, params0, &backend)?;
    let attractor_selector = problem
        .attractor
        .clone()
        .ok_or_else(|| Error::InvalidInput("no attractor selector".into()))?;
    let attractor_index = attractor_selector.resolve(&census)?;
    let attractor = census.equilibria[attractor_index].clone();
    if attractor.classification != Classification::Stable {
        return Err(Error::InvalidInput("controlled equilibrium is not stable".into()).into());
    }
    if problem.eigen.is_empty() && problem.saddles.is_empty() && problem.mean_distance.is_none() {
        return Err(Error::InvalidInput("control problem has no objective".into()).into());
    }

    let mut eigen_idx = problem
        .eigen
        .iter()
        .map(|t| resolve_eigen(&t.eigen, &census, &attractor))
        .collect::<Result<Vec<_>, _>>()?;
    let initial_eigen_indices = eigen_idx.clone();
    let mut eigen_vecs: Vec<_> = eigen_idx
        .iter()
        .map(|&i| attractor.right_eigenvectors[i].clone())
        .collect();

    let n_point_saddles = problem.saddles.len();
    let mut saddle_indices = problem
        .saddles
        .iter()
        .map(|t| t.saddle.resolve(&census))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(mean) = &problem.mean_distance {
        if mean.saddles.is_empty() {
            return Err(Error::InvalidInput("mean distance needs saddles".into()).into());
        }
        for s in &mean.saddles {
            saddle_indices.push(s.resolve(&census)?);
        }
    }
    for &i in &saddle_indices {
        if census.equilibria[i].classification != Classification::Saddle {
            return Err(Error::InvalidInput(format!("census entry {i} is not a saddle")).into());
        }
    }
    let others = if problem.preserve_stable {
        census
            .stable()
            .filter(|(i, _)| *i != attractor_index)
            .map(|(i, e)| (i, e.clone()))
            .collect()
    } else {
        Vec::new()
    };
    let initial_stable = census.counts().stable;
    let mut tracked = Tracked {
        attractor,
        saddles: saddle_indices
            .iter()
            .map(|&i| census.equilibria[i].clone())
            .collect(),
        others,
    };

    let mut params = params0.clone();
    let mut records: Vec<ControlRecord> = Vec::new();
    let mut pending_events: Vec<ControlEvent> = Vec::new();
    let mut overlaps = vec![1.0; eigen_idx.len()];
    let mut complex_state = vec![false; eigen_idx.len()];
    let mut initial: Option<(Vec<f64>, Vec<f64>, Option<f64>)> = None;

    let termination = 'outer: loop {
        let iteration = records.len();
        let eigenvalues: Vec<Complex64> = eigen_idx
            .iter()
            .map(|&i| tracked.attractor.eigenvalues[i])
            .collect();
        let distances: Vec<f64> = tracked
            .saddles
            .iter()
            .map(|s| saddle_distance(s, &tracked.attractor))
            .collect();
        let mean_distance = problem.mean_distance.as_ref().map(|_| {
            let d = &distances[n_point_saddles..];
            d.iter().sum::<f64>() / d.len() as f64
        });
        let mut events = std::mem::take(&mut pending_events);

        for (t, &i) in eigen_idx.iter().enumerate() {
            let now = tracked.attractor.is_complex(i);
            if now != complex_state[t] {
                events.push(if now {
                    ControlEvent::ComplexOnset { target: t }
                } else {
                    ControlEvent::ComplexEnd { target: t }
                });
                complex_state[t] = now;
            }
        }

        let (lambda0, dist0, mean0) = initial
            .get_or_insert_with(|| {
                (
                    eigenvalues.iter().map(|l| l.re).collect(),
                    distances.clone(),
                    mean_distance,
                )
            })
            .clone();

        let mut has_goal = false;
        let mut reached = true;
        for (t, target) in problem.eigen.iter().enumerate() {
            if let Some(delta) = target.delta {
                has_goal = true;
                reached &= eigenvalues[t].re - lambda0[t] <= -delta;
            }
        }
        for (t, target) in problem.saddles.iter().enumerate() {
            if let Some(delta) = target.delta {
                has_goal = true;
                reached &= distances[t] - dist0[t] >= delta;
            }
        }
        if let Some(delta) = problem.mean_distance.as_ref().and_then(|m| m.delta) {
            has_goal = true;
            reached &= mean_distance.unwrap_or(0.0) - mean0.unwrap_or(0.0) >= delta;
        }

        let mut record = ControlRecord {
            iteration,
            params: params.iter().copied().collect(),
            eigenvalues,
            distances,
            mean_distance,
            direction: None,
            weights: None,
            overlaps: overlaps.clone(),
            events,
        };

        macro_rules! finish {
            ($term:expr, $event:expr) => {{
                record.events.push($event);
                records.push(record);
                break 'outer $term;
            }};
        }

        if has_goal && reached {
            finish!(Termination::GoalReached, ControlEvent::GoalReached);
        }
        if config.complex_fatal && complex_state.iter().any(|c| *c) {
            records.push(record);
            break Termination::ComplexEigenvalue;
        }
        if iteration == config.n_ite {
            records.push(record);
            break Termination::MaxIterations;
        }

        // objective gradients in minimization form
        let mut gradients = Vec::new();
        let mut objective = 0;
        let mut push = |g: crate::sensitivity::ObjectiveGradient,
                        negate: bool,
                        events: &mut Vec<ControlEvent>| {
            if g.is_stationary() {
                events.push(ControlEvent::StationaryObjective { objective });
            } else if negate {
                gradients.push(-g.grad);
            } else {
                gradients.push(g.grad);
            }
            objective += 1;
        };
        let sens = (|| -> crate::Result<Vec<(crate::sensitivity::ObjectiveGradient, bool)>> {
            let mut out = Vec::new();
            if !eigen_idx.is_empty() {
                for g in
                    eigenvalue_gradients(model, &tracked.attractor, &params, &eigen_idx, &backend)?
                {
                    out.push((g, false));
                }
            }
            for s in tracked.saddles.iter().take(n_point_saddles) {
                out.push((
                    saddle_distance_gradient(model, s, &tracked.attractor, &params, &backend)?,
                    true,
                ));
            }
            if problem.mean_distance.is_some() {
                let refs: Vec<&Equilibrium> = tracked.saddles[n_point_saddles..].iter().collect();
                out.push((
                    mean_saddle_distance_gradient(
                        model,
                        &refs,
                        &tracked.attractor,
                        &params,
                        &backend,
                    )?,
                    true,
                ));
            }
            Ok(out)
        })();
        let sens = match sens {
            Ok(s) => s,
            Err(e) => finish!(
                Termination::SensitivityFailure,
                ControlEvent::SensitivityFailure {
                    detail: e.to_string()
                }
            ),
        };
        for (g, negate) in sens {
            push(g, negate, &mut record.events);
        }
        if gradients.is_empty() {
            finish!(
                Termination::Stall,
                ControlEvent::Stall {
                    detail: "every objective is stationary".into()
                }
            );
        }
        let hull = match common_direction(&gradients, config.scaling) {
            Ok(h) => h,
            Err(e) => finish!(
                Termination::SensitivityFailure,
                ControlEvent::SensitivityFailure {
                    detail: e.to_string()
                }
            ),
        };
        if hull.is_pareto_stationary {
            finish!(
                Termination::Stall,
                ControlEvent::Stall {
                    detail: "Pareto stationary".into()
                }
            );
        }
        let descent = -&hull.direction / hull.direction.norm();
        // coordinates whose step would leave the parameter domain are frozen
        let mut frozen = vec![false; descent.len()];
        let (direction, next) = loop {
            let free = DVector::from_fn(
                descent.len(),
                |i, _| if frozen[i] { 0.0 } else { descent[i] },
            );
            if free.norm() == 0.0 {
                finish!(
                    Termination::Stall,
                    ControlEvent::Stall {
                        detail: "no admissible step inside the parameter domain".into()
                    }
                );
            }
            let direction = match cone_project(&(&free / free.norm()), &config.cone, None) {
                Ok(d) => d,
                Err(e) => finish!(
                    Termination::Stall,
                    ControlEvent::Stall {
                        detail: e.to_string()
                    }
                ),
            };
            let next = &params + &direction * config.epsilon;
            match model.check_params(&next) {
                Ok(()) => break (direction, next),
                Err(Error::ParamDomain { name, value }) => match model.param_index(&name) {
                    Some(i) if !frozen[i] && direction[i] != 0.0 => {
                        frozen[i] = true;
                        record
                            .events
                            .push(ControlEvent::DomainBoundary { param: name });
                    }
                    _ => finish!(
                        Termination::ParamDomain,
                        ControlEvent::ParamDomain {
                            detail: Error::ParamDomain { name, value }.to_string()
                        }
                    ),
                },
                Err(e) => finish!(
                    Termination::ParamDomain,
                    ControlEvent::ParamDomain {
                        detail: e.to_string()
                    }
                ),
            }
        };
        record.direction = Some(direction.iter().copied().collect());
        record.weights = Some(hull.weights.clone());

        let continued = match continue_all(model, &tracked, &params, &next, &backend) {
            Ok(c) => c,
            Err(event) => finish!(Termination::Bifurcation, event),
        };

        let mut new_idx = Vec::with_capacity(eigen_idx.len());
        let mut new_overlaps = Vec::with_capacity(eigen_idx.len());
        for (t, v_prev) in eigen_vecs.iter().enumerate() {
            match match_eigenpair(&continued.attractor, v_prev) {
                Ok((i, o)) => {
                    new_idx.push(i);
                    new_overlaps.push(o);
                }
                Err(e) => finish!(
                    Termination::AmbiguousMatch,
                    ControlEvent::AmbiguousMatch {
                        target: t,
                        detail: e.to_string()
                    }
                ),
            }
        }
        records.push(record);

        eigen_vecs = new_idx
            .iter()
            .map(|&i| continued.attractor.right_eigenvectors[i].clone())
            .collect();
        eigen_idx = new_idx;
        overlaps = new_overlaps;
        tracked = continued;
        params = next;

        let done = records.len();
        if config.rescan_every > 0 && done.is_multiple_of(config.rescan_every) {
            if let Ok(c) = config.census.run(model, &params, &backend) {
                let stable_after = c.counts().stable;
                if stable_after != initial_stable {
                    log::debug!(
                        "rescan after {done} records: {initial_stable} -> {stable_after} stable"
                    );
                    pending_events.push(ControlEvent::CensusChanged {
                        stable_before: initial_stable,
                        stable_after,
                    });
                }
            }
        }
    };
    log::info!(
        "control ended with {termination:?} after {} iterations",
        records.len().saturating_sub(1)
    );

    Ok(ControlTrace {
        param_names: model.param_names().to_vec(),
        epsilon: config.epsilon,
        final_attractor: tracked.attractor.x.iter().copied().collect(),
        records,
        termination,
        attractor_index,
        initial_eigen_indices,
    })
}

/// Steepest descent of one or more eigenvalues of a stable equilibrium,
/// combined by the min-norm hull point and projected onto the configured
/// cone.
pub fn run_eigenvalue_control<M: ParamModel + ?Sized>(
    model: &M,
    params0: &DVector<f64>,
    attractor: &EquilibriumSelector,
    targets: &[EigenTarget],
    config: &ControlConfig,
) -> Result<ControlTrace, ControlSetupError> {
    let problem = ControlProblem {
        attractor: Some(attractor.clone()),
        eigen: targets.to_vec(),
        ..ControlProblem::default()
    };
    run_control(model, params0, &problem, config)
}

/// Steepest ascent of one or more saddle-attractor distances.
pub fn run_saddle_control<M: ParamModel + ?Sized>(
    model: &M,
    params0: &DVector<f64>,
    attractor: &EquilibriumSelector,
    targets: &[SaddleTarget],
    config: &ControlConfig,
) -> Result<ControlTrace, ControlSetupError> {
    let problem = ControlProblem {
        attractor: Some(attractor.clone()),
        saddles: targets.to_vec(),
        ..ControlProblem::default()
    };
    run_control(model, params0, &problem, config)
}

/// Simultaneous eigenvalue descent and mean-saddle-distance ascent; the run
/// ends as soon as any stable equilibrium of the initial census is lost.
pub fn run_multiobjective_control<M: ParamModel + ?Sized>(
    model: &M,
    params0: &DVector<f64>,
    attractor: &EquilibriumSelector,
    eigen: &[EigenTarget],
    mean_distance: Option<&MeanDistanceTarget>,
    config: &ControlConfig,
) -> Result<ControlTrace, ControlSetupError> {
    let problem = ControlProblem {
        attractor: Some(attractor.clone()),
        eigen: eigen.to_vec(),
        mean_distance: mean_distance.cloned(),
        preserve_stable: true,
        ..ControlProblem::default()
    };
    run_control(model, params0, &problem, config)
}
