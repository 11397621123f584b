//! End-to-end tests of the `woven` binary: exit-code contract, report
//! determinism, and the JSON output shape.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../woven-frames/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn woven(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_woven"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

/// Report body: everything except the wall-clock line.
fn body(output: &Output) -> String {
    stdout(output)
        .lines()
        .filter(|line| !line.starts_with("wall_clock_seconds:"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn bounds_reports_frame_g() {
    let output = woven(&["bounds", &fixture("example_2_3.json"), "--frame", "G"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("frame G: lower 4 upper 9"), "got: {text}");
    assert!(text.contains("verdict: verified"));
}

#[test]
fn bounds_rejects_unknown_frame_names() {
    let output = woven(&["bounds", &fixture("example_2_3.json"), "--frame", "H"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("no frame named"));
}

#[test]
fn weave_reports_the_selected_weaving() {
    let output = woven(&[
        "weave",
        &fixture("example_2_3.json"),
        "--partition",
        "0,0,1",
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("lower: 4"));
    assert!(text.contains("upper: 9"));

    let bad_label = woven(&[
        "weave",
        &fixture("example_2_3.json"),
        "--partition",
        "0,0,7",
    ]);
    assert_eq!(bad_label.status.code(), Some(2));

    let bad_length = woven(&[
        "weave",
        &fixture("example_2_3.json"),
        "--partition",
        "0,1",
    ]);
    assert_eq!(bad_length.status.code(), Some(2));
}

#[test]
fn verify_woven_certifies_the_plane_bank() {
    let output = woven(&["verify-woven", &fixture("example_2_3.json"), "--exhaustive"]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("partitions_checked: 8"));
    assert!(text.contains("is_woven: true"));
    assert!(text.contains("universal_lower: 4"));
    assert!(text.contains("universal_upper: 13.47213595499958"));
    assert!(text.contains("concatenated_lambda_min: 13"));
    assert!(text.contains("concatenated_lambda_max: 18"));
}

#[test]
fn verify_woven_fails_on_the_zero_bank() {
    let output = woven(&["verify-woven", &fixture("zero_bank.json"), "--exhaustive"]);
    assert_eq!(output.status.code(), Some(1));
    let text = stdout(&output);
    assert!(text.contains("is_woven: false"));
    assert!(text.contains("verdict: failed"));
}

#[test]
fn text_reports_are_deterministic_modulo_wall_clock() {
    let args = ["verify-woven", &fixture("example_2_3.json"), "--exhaustive", "--table"];
    let first = woven(&args);
    let second = woven(&args);
    assert_eq!(body(&first), body(&second));
    // wall clock is genuinely present
    assert!(stdout(&first).contains("wall_clock_seconds:"));
}

#[test]
fn sampled_reports_are_deterministic_for_a_seed() {
    let args = [
        "verify-woven",
        &fixture("example_2_3.json"),
        "--samples",
        "50",
        "--seed",
        "42",
    ];
    let first = woven(&args);
    let second = woven(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(body(&first), body(&second));
    assert!(stdout(&first).contains("mode: sampled"));
    assert!(stdout(&first).contains("seed: 42"));
}

#[test]
fn json_reports_parse_and_are_deterministic() {
    let args = [
        "verify-woven",
        &fixture("example_2_3.json"),
        "--exhaustive",
        "--format",
        "json",
    ];
    let first = woven(&args);
    let second = woven(&args);
    assert_eq!(first.status.code(), Some(0));

    let strip = |output: &Output| -> serde_json::Value {
        let mut value: serde_json::Value =
            serde_json::from_str(&stdout(output)).expect("valid JSON report");
        value
            .as_object_mut()
            .expect("object report")
            .remove("wall_clock_seconds")
            .expect("wall clock present");
        value
    };
    let a = strip(&first);
    let b = strip(&second);
    assert_eq!(a, b);
    assert_eq!(a["kind"], "verify-woven");
    assert_eq!(a["certificate"]["partitions_checked"], 8);
    assert_eq!(a["certificate"]["is_woven"], true);
    assert_eq!(a["verdict"], "verified");
    assert!(a["inputs"][0]["sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn dual_writes_a_loadable_bank() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("dual.json");
    let output = woven(&[
        "dual",
        &fixture("example_2_3.json"),
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("reconstruction_residual:"));

    let written = std::fs::read_to_string(&out_path).unwrap();
    let document: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(document["dim"], 2);
    assert_eq!(document["frames"][0]["name"], "F");
}

#[test]
fn tighten_reaches_unit_bounds() {
    let output = woven(&["tighten", &fixture("example_2_3.json")]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("concatenated_lower: 1"), "got: {text}");
    assert!(text.contains("verdict: verified"));
}

#[test]
fn dual_fails_on_a_degenerate_bank() {
    let output = woven(&["dual", &fixture("zero_bank.json")]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains("failure:"));
}

#[test]
fn transform_certifies_and_rejects() {
    let output = woven(&[
        "transform",
        &fixture("example_2_3.json"),
        "--operator",
        &fixture("operator_swap_2d.json"),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("contained: true"));

    let singular = woven(&[
        "transform",
        &fixture("example_2_3.json"),
        "--operator",
        &fixture("operator_singular_2d.json"),
    ]);
    assert_eq!(singular.status.code(), Some(1));
    assert!(stdout(&singular).contains("not invertible"));
}

#[test]
fn sum_check_detects_cancellation() {
    let output = woven(&[
        "sum-check",
        &fixture("example_2_3.json"),
        "--operator1",
        &fixture("operator_identity_2d.json"),
        "--operator2",
        &fixture("operator_identity_2d.json"),
        "--bank2",
        &fixture("example_2_3_negated.json"),
    ]);
    assert_eq!(output.status.code(), Some(1));
    let text = stdout(&output);
    assert!(text.contains("combined_rank_ok: false"));
    assert!(text.contains("is_woven: false"));

    // adding the bank to itself doubles every vector: still woven
    let woven_sum = woven(&[
        "sum-check",
        &fixture("example_2_3.json"),
        "--operator1",
        &fixture("operator_identity_2d.json"),
        "--operator2",
        &fixture("operator_identity_2d.json"),
        "--bank2",
        &fixture("example_2_3.json"),
    ]);
    assert_eq!(woven_sum.status.code(), Some(0));
    let text = stdout(&woven_sum);
    assert!(text.contains("combined_rank_ok: true"), "got: {text}");
    assert!(text.contains("consistent: true"));
}

#[test]
fn project_and_intersect_restrict_the_certificate() {
    let output = woven(&[
        "project",
        &fixture("application_alpha_1.json"),
        "--subspace",
        &fixture("subspace_e1e2_3d.json"),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let text = stdout(&output);
    assert!(text.contains("ambient_partitions_checked: 64"));
    assert!(text.contains("contained: true"));

    let meet = woven(&[
        "intersect",
        &fixture("application_alpha_1.json"),
        "--subspace",
        &fixture("subspace_e1e2_3d.json"),
        "--subspace2",
        &fixture("subspace_e2e3_3d.json"),
    ]);
    assert_eq!(meet.status.code(), Some(0));
    let text = stdout(&meet);
    assert!(text.contains("intersection_dim: 1"));
    assert!(text.contains("basis_column 0: 0,1,0"));
}

#[test]
fn disjoint_subspaces_fail_verification() {
    let dir = tempfile::tempdir().unwrap();
    let e1 = dir.path().join("e1.json");
    let e2 = dir.path().join("e2.json");
    std::fs::write(&e1, r#"{"ambient_dim": 3, "basis_columns": [[1.0, 0.0, 0.0]]}"#).unwrap();
    std::fs::write(&e2, r#"{"ambient_dim": 3, "basis_columns": [[0.0, 1.0, 0.0]]}"#).unwrap();
    let output = woven(&[
        "intersect",
        &fixture("application_alpha_1.json"),
        "--subspace",
        e1.to_str().unwrap(),
        "--subspace2",
        e2.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stdout(&output).contains("intersect only trivially"));
}

#[test]
fn unusable_inputs_exit_with_two() {
    let missing = woven(&["bounds", "no_such_file.json"]);
    assert_eq!(missing.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\n  \"dim\": 2,\n  nope\n}").unwrap();
    let parse = woven(&["bounds", broken.to_str().unwrap()]);
    assert_eq!(parse.status.code(), Some(2));
    assert!(stderr(&parse).contains("line 3"), "got: {}", stderr(&parse));

    let usage = woven(&["frobnicate"]);
    assert_eq!(usage.status.code(), Some(2));

    let conflict = woven(&[
        "verify-woven",
        &fixture("example_2_3.json"),
        "--exhaustive",
        "--samples",
        "10",
    ]);
    assert_eq!(conflict.status.code(), Some(2));
}

#[test]
fn enumeration_cap_environment_variable() {
    let fallback = Command::new(env!("CARGO_BIN_EXE_woven"))
        .args(["verify-woven", &fixture("example_2_3.json")])
        .env("WOVEN_ENUM_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(fallback.status.code(), Some(0));
    let text = stdout(&fallback);
    assert!(text.contains("warning:"), "got: {text}");
    assert!(text.contains("mode: sampled"));

    let strict = Command::new(env!("CARGO_BIN_EXE_woven"))
        .args(["verify-woven", &fixture("example_2_3.json"), "--exhaustive"])
        .env("WOVEN_ENUM_CAP", "4")
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(2));
    assert!(stderr(&strict).contains("exceeds the cap"));

    let garbage = Command::new(env!("CARGO_BIN_EXE_woven"))
        .args(["bounds", &fixture("example_2_3.json")])
        .env("WOVEN_ENUM_CAP", "lots")
        .output()
        .unwrap();
    assert_eq!(garbage.status.code(), Some(2));
}

#[test]
fn help_exits_cleanly() {
    let output = woven(&["--help"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("verify-woven"));
}
