//! Command-line behaviour: exit codes, formats and configuration checks.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.json"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("basinctl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_basinctl"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().unwrap()
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = scratch(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn cubic_with(control: &str) -> String {
    format!(
        r#"{{"model": {{"name": "cubic1d"}}, "census": {{"n_seeds": 50}}, "control": {control}}}"#
    )
}

#[test]
fn census_csv_lists_cubic_roots() {
    let out = run(&["census"], Some(&shipped("cubic1d")));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "index,x_1,residual_norm,classification,lambda_1_re,lambda_1_im"
    );
    assert_eq!(lines.len(), 4);
    assert!(lines[2].starts_with("1,0.0,0.0,saddle,1.0,"));
}

#[test]
fn json_format_and_output_file() {
    let path = scratch("census.json");
    let out = run(
        &[
            "census",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ],
        Some(&shipped("gradient2d")),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(v["equilibria"].as_array().unwrap().len(), 9);
    assert_eq!(v["counts"]["stable"], 4);
}

#[test]
fn zero_iterations_write_only_a_header() {
    let cfg = write_config(
        "n0.json",
        &cubic_with(
            r#"{"strategy": "eigenvalue", "attractor": {"near": [1.0]}, "eigen": [{"eigen": {"by": "index", "index": 0}, "delta": 0.5}], "n_ite": 0}"#,
        ),
    );
    let out = run(&["control"], Some(&cfg));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "iteration,alpha,lambda_1_re,lambda_1_im,d_alpha,weight_1,overlap_1,events\n"
    );
}

#[test]
fn control_csv_has_one_row_per_record() {
    let out = run(&["control"], Some(&shipped("cubic1d")));
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows.len() >= 2);
    assert!(rows.last().unwrap().ends_with(",goal"));
    assert!(rows[0].starts_with("0,0.0,1.0,"));
}

#[test]
fn unknown_field_is_a_config_error() {
    let cfg = write_config(
        "unknown.json",
        r#"{"model": {"name": "cubic1d", "colour": 1}}"#,
    );
    let out = run(&["census"], Some(&cfg));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_parameter_is_a_config_error() {
    let cfg = write_config(
        "param.json",
        r#"{"model": {"name": "gradient2d", "params": {"beta": 1.0}}}"#,
    );
    let out = run(&["census"], Some(&cfg));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn missing_block_and_bad_values_are_config_errors() {
    let out = run(
        &["control"],
        Some(&write_config(
            "noctl.json",
            r#"{"model": {"name": "cubic1d"}}"#,
        )),
    );
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(
        "eps.json",
        &cubic_with(
            r#"{"strategy": "eigenvalue", "attractor": {"near": [1.0]}, "eigen": [{"eigen": {"by": "index", "index": 0}}], "epsilon": -1.0}"#,
        ),
    );
    assert_eq!(run(&["control"], Some(&cfg)).status.code(), Some(2));
    let cfg = write_config(
        "strategy.json",
        &cubic_with(
            r#"{"strategy": "saddle", "attractor": {"near": [1.0]}, "eigen": [{"eigen": {"by": "index", "index": 0}}]}"#,
        ),
    );
    assert_eq!(run(&["control"], Some(&cfg)).status.code(), Some(2));
    assert_eq!(run(&["census"], None).status.code(), Some(2));
    assert_eq!(
        run(&["census", "--format", "xml"], Some(&shipped("cubic1d")))
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn selector_without_match_exits_with_4() {
    let cfg = write_config(
        "radius.json",
        &cubic_with(
            r#"{"strategy": "eigenvalue", "attractor": {"near": [0.5], "radius": 0.1}, "eigen": [{"eigen": {"by": "index", "index": 0}}]}"#,
        ),
    );
    let out = run(&["control"], Some(&cfg));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn ambiguous_selector_exits_with_4() {
    let cfg = write_config(
        "tie.json",
        r#"{"model": {"name": "cubic1d"}, "census": {"n_seeds": 50}, "sensitivity": {"equilibrium": {"near": [0.0], "kind": "stable"}}}"#,
    );
    let out = run(&["sensitivity"], Some(&cfg));
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn seed_flag_overrides_the_basin_seed() {
    let a = run(&["basin", "--seed", "3"], Some(&shipped("cubic1d")));
    let b = run(&["basin", "--seed", "3"], Some(&shipped("cubic1d")));
    let c = run(&["basin"], Some(&shipped("cubic1d")));
    assert!(a.status.success() && c.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn thread_count_does_not_change_results() {
    let one = run(&["basin", "--threads", "1"], Some(&shipped("cubic1d")));
    let two = run(&["basin", "--threads", "2"], Some(&shipped("cubic1d")));
    assert!(one.status.success() && two.status.success());
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn boolean_runs_without_a_config() {
    let out = run(&["boolean"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 17);
    assert!(text.contains("0110,0111,1,0111,fixed_point,epithelial,false,true"));
}
