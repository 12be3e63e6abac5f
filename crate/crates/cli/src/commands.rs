//! The subcommands, each producing a [`Report`].

use basinctl_core::basin::{basin_fractions, BasinEstimate};
use basinctl_core::control::{run_control, ControlTrace};
use basinctl_core::equilibria::{EquilibriumCensus, EquilibriumSelector, SelectorKind};
use basinctl_core::models::boolean::{phenotype_checks, transient_length};
use basinctl_core::models::emt::{Emt, DEFAULT_HILL_EXPONENT};
use basinctl_core::models::{boolean_attractors, boolean_step, BoolState, ModelName};
use basinctl_core::sensitivity::{eigenvalue_derivative_matrix, equilibrium_sensitivity};
use log::info;
use nalgebra::DVector;
use serde_json::{json, Value};

use crate::config::Experiment;
use crate::error::CliError;
use crate::output::{num, numbered, opt_num, Report, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Locate and classify all equilibria in the census box.
    Census,
    /// Equilibrium and eigenvalue sensitivities of one equilibrium.
    Sensitivity,
    /// Run the configured control loop.
    Control,
    /// Monte Carlo basin fractions, optionally before and after control.
    Basin,
    /// Attractors of the four-gene boolean network.
    Boolean,
}

pub fn execute(command: Command, exp: &Experiment) -> Result<Report, CliError> {
    match command {
        Command::Census => census(exp),
        Command::Sensitivity => sensitivity(exp),
        Command::Control => control(exp),
        Command::Basin => basin(exp),
        Command::Boolean => Ok(boolean_report()),
    }
}

fn run_census(exp: &Experiment, params: &DVector<f64>) -> Result<EquilibriumCensus, CliError> {
    let census = exp.census.run(
        exp.builtin.model.as_ref(),
        params,
        &exp.config.model.backend,
    )?;
    info!(
        "census: {} equilibria ({:?})",
        census.equilibria.len(),
        census.counts()
    );
    Ok(census)
}

fn phenotype_labels(
    exp: &Experiment,
    census: &EquilibriumCensus,
    params: &DVector<f64>,
) -> Option<Vec<String>> {
    if exp.builtin.name != ModelName::Emt {
        return None;
    }
    let emt = Emt::new(DEFAULT_HILL_EXPONENT, exp.config.model.include_p);
    Some(
        census
            .equilibria
            .iter()
            .map(|e| {
                serde_json::to_value(emt.phenotype(&e.x, params))
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default()
            })
            .collect(),
    )
}

fn census_value(census: &EquilibriumCensus, labels: Option<&[String]>) -> Value {
    let rows: Vec<Value> = census
        .equilibria
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut v = json!({
                "index": i,
                "x": e.x.as_slice(),
                "residual_norm": e.residual_norm,
                "classification": e.classification.label(),
                "eigenvalues": e.eigenvalues.iter().map(|l| [l.re, l.im]).collect::<Vec<_>>(),
            });
            if let Some(labels) = labels {
                v["phenotype"] = json!(labels[i]);
            }
            v
        })
        .collect();
    json!({
        "bounds": census.bounds,
        "counts": census.counts(),
        "equilibria": rows,
    })
}

fn census(exp: &Experiment) -> Result<Report, CliError> {
    let census = run_census(exp, &exp.params)?;
    let labels = phenotype_labels(exp, &census, &exp.params);
    let n = exp.builtin.model.state_dim();
    let mut header = vec!["index".to_string()];
    header.extend(numbered("x", n));
    header.push("residual_norm".into());
    header.push("classification".into());
    for i in 1..=n {
        header.push(format!("lambda_{i}_re"));
        header.push(format!("lambda_{i}_im"));
    }
    if labels.is_some() {
        header.push("phenotype".into());
    }
    let mut table = Table::new(header);
    for (i, e) in census.equilibria.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(e.x.iter().map(|v| num(*v)));
        row.push(num(e.residual_norm));
        row.push(e.classification.label().into());
        for l in &e.eigenvalues {
            row.push(num(l.re));
            row.push(num(l.im));
        }
        if let Some(labels) = &labels {
            row.push(labels[i].clone());
        }
        table.push(row);
    }
    let mut json = census_value(&census, labels.as_deref());
    json["model"] = json!(exp.builtin.name);
    json["params"] = params_value(exp, &exp.params);
    Ok(Report { table, json })
}

fn params_value(exp: &Experiment, params: &DVector<f64>) -> Value {
    let map: serde_json::Map<String, Value> = exp
        .param_names()
        .iter()
        .zip(params.iter())
        .map(|(n, v)| (n.clone(), json!(v)))
        .collect();
    Value::Object(map)
}

fn sensitivity(exp: &Experiment) -> Result<Report, CliError> {
    let block = exp.config.sensitivity.as_ref().ok_or_else(|| {
        CliError::Config("the sensitivity command needs a sensitivity block".into())
    })?;
    let census = run_census(exp, &exp.params)?;
    let idx = block.equilibrium.resolve(&census)?;
    let eq = &census.equilibria[idx];
    let model = exp.builtin.model.as_ref();
    let backend = &exp.config.model.backend;
    let dx = equilibrium_sensitivity(model, eq, &exp.params, backend)?;
    let dl = eigenvalue_derivative_matrix(model, eq, &exp.params, backend)?;
    let n = model.state_dim();

    let mut header = vec!["param".to_string(), "value".to_string()];
    header.extend(numbered("dx", n));
    for i in 1..=n {
        header.push(format!("dlambda_{i}_re"));
        header.push(format!("dlambda_{i}_im"));
    }
    let mut table = Table::new(header);
    let mut rows = Vec::new();
    for (j, name) in exp.param_names().iter().enumerate() {
        let mut row = vec![name.clone(), num(exp.params[j])];
        row.extend(dx.column(j).iter().map(|v| num(*v)));
        for i in 0..n {
            row.push(num(dl[(i, j)].re));
            row.push(num(dl[(i, j)].im));
        }
        table.push(row);
        rows.push(json!({
            "param": name,
            "value": exp.params[j],
            "dx": dx.column(j).iter().copied().collect::<Vec<_>>(),
            "dlambda": (0..n).map(|i| [dl[(i, j)].re, dl[(i, j)].im]).collect::<Vec<_>>(),
        }));
    }
    let json = json!({
        "model": exp.builtin.name,
        "census_index": idx,
        "x": eq.x.as_slice(),
        "classification": eq.classification.label(),
        "eigenvalues": eq.eigenvalues.iter().map(|l| [l.re, l.im]).collect::<Vec<_>>(),
        "sensitivities": rows,
    });
    Ok(Report { table, json })
}

fn control_header(exp: &Experiment) -> Vec<String> {
    let c = exp.config.control.as_ref().expect("control block present");
    let names = exp.param_names();
    let mut header = vec!["iteration".to_string()];
    header.extend(names.iter().cloned());
    for i in 1..=c.eigen.len() {
        header.push(format!("lambda_{i}_re"));
        header.push(format!("lambda_{i}_im"));
    }
    header.extend(numbered("distance", c.n_distances()));
    if c.mean_distance.is_some() {
        header.push("mean_distance".into());
    }
    header.extend(names.iter().map(|n| format!("d_{n}")));
    header.extend(numbered("weight", c.n_objectives()));
    header.extend(numbered("overlap", c.eigen.len()));
    header.push("events".into());
    header
}

fn run_configured_control(exp: &Experiment) -> Result<Option<ControlTrace>, CliError> {
    let block = exp
        .config
        .control
        .as_ref()
        .ok_or_else(|| CliError::Config("the control command needs a control block".into()))?;
    if block.n_ite == 0 {
        return Ok(None);
    }
    let config = exp.control_config().expect("control block present");
    let trace = run_control(
        exp.builtin.model.as_ref(),
        &exp.params,
        &block.problem(),
        &config,
    )?;
    Ok(Some(trace))
}

fn control(exp: &Experiment) -> Result<Report, CliError> {
    let trace = run_configured_control(exp)?;
    let block = exp.config.control.as_ref().expect("control block present");
    let header = control_header(exp);
    let width = header.len();
    let mut table = Table::new(header);
    let n_params = exp.params.len();
    let Some(trace) = trace else {
        return Ok(Report {
            table,
            json: json!({ "param_names": exp.param_names(), "records": [] }),
        });
    };
    for r in &trace.records {
        let mut row = vec![r.iteration.to_string()];
        row.extend(r.params.iter().map(|v| num(*v)));
        for l in &r.eigenvalues {
            row.push(num(l.re));
            row.push(num(l.im));
        }
        row.extend(r.distances.iter().map(|v| num(*v)));
        if block.mean_distance.is_some() {
            row.push(opt_num(r.mean_distance));
        }
        match &r.direction {
            Some(d) => row.extend(d.iter().map(|v| num(*v))),
            None => row.extend(std::iter::repeat_n(String::new(), n_params)),
        }
        let n_obj = block.n_objectives();
        match &r.weights {
            Some(w) => row.extend((0..n_obj).map(|i| opt_num(w.get(i).copied()))),
            None => row.extend(std::iter::repeat_n(String::new(), n_obj)),
        }
        row.extend((0..block.eigen.len()).map(|i| opt_num(r.overlaps.get(i).copied())));
        row.push(
            r.events
                .iter()
                .map(|e| e.tag())
                .collect::<Vec<_>>()
                .join(";"),
        );
        debug_assert_eq!(row.len(), width);
        table.push(row);
    }
    let json =
        serde_json::to_value(&trace).map_err(|e| CliError::Computation(format!("output: {e}")))?;
    Ok(Report { table, json })
}

fn basin_rows(
    table: &mut Table,
    phase: &str,
    est: &BasinEstimate,
    controlled: Option<usize>,
    n: usize,
) {
    for a in &est.attractors {
        let mut row = vec![phase.to_string(), a.census_index.to_string()];
        row.extend(a.x.iter().map(|v| num(*v)));
        row.push((Some(a.census_index) == controlled).to_string());
        row.push(a.count.to_string());
        row.push(num(a.fraction));
        row.push(num(a.half_width));
        table.push(row);
    }
    let mut row = vec![phase.to_string(), String::new()];
    row.extend(std::iter::repeat_n(String::new(), n));
    row.push("false".into());
    row.push(est.unresolved_count.to_string());
    row.push(num(est.unresolved_fraction));
    row.push(num(est.unresolved_half_width));
    table.push(row);
}

fn estimate(
    exp: &Experiment,
    params: &DVector<f64>,
    census: &EquilibriumCensus,
) -> Result<BasinEstimate, CliError> {
    let b = exp.config.basin.as_ref().expect("basin block present");
    if census.stable().next().is_none() {
        return Err(CliError::Computation(
            "census has no stable equilibrium".into(),
        ));
    }
    let bounds = b
        .bounds
        .clone()
        .unwrap_or_else(|| exp.census.bounds.clone());
    let est = basin_fractions(
        exp.builtin.model.as_ref(),
        params,
        census,
        &bounds,
        b.n_samples,
        b.rng_seed,
        b.t_max,
        b.tolerance,
    )?;
    info!(
        "basin: {} samples, {} unresolved",
        est.n_samples, est.unresolved_count
    );
    Ok(est)
}

fn basin(exp: &Experiment) -> Result<Report, CliError> {
    let b = exp
        .config
        .basin
        .as_ref()
        .ok_or_else(|| CliError::Config("the basin command needs a basin block".into()))?;
    let n = exp.builtin.model.state_dim();
    let mut header = vec!["phase".to_string(), "census_index".to_string()];
    header.extend(numbered("x", n));
    for h in ["controlled", "count", "fraction", "half_width"] {
        header.push(h.into());
    }
    let mut table = Table::new(header);

    let census = run_census(exp, &exp.params)?;
    let before = estimate(exp, &exp.params, &census)?;
    let before_controlled = match &exp.config.control {
        Some(c) => Some(c.attractor.resolve(&census)?),
        None => None,
    };
    basin_rows(&mut table, "before", &before, before_controlled, n);
    let mut json = json!({
        "model": exp.builtin.name,
        "before": { "controlled": before_controlled, "estimate": before },
    });

    if b.before_after {
        let trace = run_configured_control(exp)?;
        let (params, final_x, meta) = match &trace {
            Some(t) => (
                t.final_params(),
                t.final_attractor.clone(),
                json!({ "termination": t.termination, "iterations": t.iterations() }),
            ),
            None => (
                exp.params.clone(),
                census.equilibria[before_controlled.expect("control block")]
                    .x
                    .iter()
                    .copied()
                    .collect(),
                json!({ "termination": null, "iterations": 0 }),
            ),
        };
        let census_after = run_census(exp, &params)?;
        let sel = EquilibriumSelector {
            near: final_x,
            kind: SelectorKind::Stable,
            radius: Some(1e-6 * census_after.diameter()),
        };
        let after_controlled = sel.resolve(&census_after).ok();
        let after = estimate(exp, &params, &census_after)?;
        basin_rows(&mut table, "after", &after, after_controlled, n);
        json["control"] = meta;
        json["after"] = json!({
            "controlled": after_controlled,
            "params": params_value(exp, &params),
            "estimate": after,
        });
    }
    Ok(Report { table, json })
}

fn bits(s: BoolState) -> String {
    s.0.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

pub fn boolean_report() -> Report {
    let attractors = boolean_attractors();
    let checks = phenotype_checks();
    let header = [
        "state",
        "image",
        "transient_length",
        "attractor",
        "attractor_kind",
        "reference_phenotype",
        "reference_fixed_point",
        "discrepancy",
    ]
    .map(String::from)
    .to_vec();
    let mut table = Table::new(header);
    let mut states = Vec::new();
    for s in BoolState::all() {
        let a = attractors
            .iter()
            .find(|a| a.basin.contains(&s))
            .expect("attractors partition the state space");
        let cycle = a
            .states
            .iter()
            .map(|x| bits(*x))
            .collect::<Vec<_>>()
            .join("->");
        let kind = if a.is_fixed_point() {
            "fixed_point"
        } else {
            "cycle"
        };
        let check = checks.iter().find(|c| c.state == s);
        let phenotype = check
            .map(|c| {
                serde_json::to_value(c.phenotype)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default()
            })
            .unwrap_or_default();
        table.push(vec![
            bits(s),
            bits(boolean_step(s)),
            transient_length(s).to_string(),
            cycle.clone(),
            kind.to_string(),
            phenotype.clone(),
            check
                .map(|c| c.is_fixed_point.to_string())
                .unwrap_or_default(),
            check.map(|c| c.discrepancy.to_string()).unwrap_or_default(),
        ]);
        states.push(json!({
            "state": bits(s),
            "image": bits(boolean_step(s)),
            "transient_length": transient_length(s),
            "attractor": cycle,
            "attractor_kind": kind,
        }));
    }
    let json = json!({
        "attractors": attractors.iter().map(|a| json!({
            "states": a.states.iter().map(|s| bits(*s)).collect::<Vec<_>>(),
            "basin": a.basin.iter().map(|s| bits(*s)).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
        "phenotype_checks": checks.iter().map(|c| json!({
            "phenotype": c.phenotype,
            "state": bits(c.state),
            "image": bits(c.image),
            "is_fixed_point": c.is_fixed_point,
            "discrepancy": c.discrepancy,
        })).collect::<Vec<_>>(),
        "states": states,
    });
    Report { table, json }
}
