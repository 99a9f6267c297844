//! End-to-end behavior of the `pfunc` binary: config rejection before any
//! work, per-job isolation of failures, listing stability, and CSV dumps.

use std::path::Path;
use std::process::{Command, Output};

fn pfunc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfunc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary spawns")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn a_bad_check_id_is_rejected_before_any_report_is_written() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        r#"{
  "jobs": [
    {
      "jobId": "fine",
      "equation": "red77_quadratic",
      "grid": { "nx": 17, "ny": 17 },
      "checks": [{ "id": "order_reduction" }],
      "outputs": { "reportPath": "reports/fine.json" }
    },
    {
      "jobId": "broken",
      "equation": "red77_quadratic",
      "grid": { "nx": 17, "ny": 17 },
      "checks": [{ "id": "order_reducton" }],
      "outputs": { "reportPath": "reports/broken.json" }
    }
  ]
}"#,
    );
    let out = pfunc(tmp.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("broken"), "{stderr}");
    assert!(stderr.contains("order_reducton"), "{stderr}");
    // Validation happens before execution: job "fine" must not have run.
    assert!(
        !tmp.path().join("reports/fine.json").exists(),
        "no report may be written when the config is rejected"
    );
}

#[test]
fn parse_errors_carry_a_line_number() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "mangled.json", "{\n  \"jobs\": [,]\n}\n");
    let out = pfunc(tmp.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
}

#[test]
fn a_failing_job_does_not_poison_its_neighbors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "mixed.json",
        r#"{
  "jobs": [
    {
      "jobId": "clean",
      "equation": "red77_quadratic",
      "grid": { "nx": 33, "ny": 33 },
      "checks": [{ "id": "order_reduction", "tol": 1e-12 }],
      "outputs": { "reportPath": "reports/clean.json" }
    },
    {
      "jobId": "sick",
      "equation": "bump",
      "grid": { "nx": 33, "ny": 33 },
      "checks": [{ "id": "mean_value_monotonicity" }],
      "outputs": { "reportPath": "reports/sick.json" }
    }
  ]
}"#,
    );
    let out = pfunc(tmp.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(1), "one failing check fails the run");

    let clean: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("reports/clean.json")).unwrap())
            .unwrap();
    assert_eq!(clean["schema"], "pfunc-report/1");
    assert_eq!(clean["checks"][0]["pass"], true);
    assert_eq!(clean["checks"][0]["provenance"]["equation"], "red77_quadratic");

    let sick: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("reports/sick.json")).unwrap())
            .unwrap();
    assert_eq!(sick["checks"][0]["pass"], false);
    let error = sick["checks"][0]["error"].as_str().unwrap();
    assert!(error.contains("not subharmonic"), "{error}");
}

#[test]
fn solver_errors_are_recorded_as_a_report_not_a_crash() {
    let tmp = tempfile::tempdir().unwrap();
    // One Newton iteration cannot converge to 1e-10 from the harmonic lift.
    let cfg = write(
        tmp.path(),
        "stall.json",
        r#"{
  "jobs": [
    {
      "jobId": "stalled",
      "equation": "exp_growth",
      "pfunction": "exp_counterexample",
      "solver": { "maxIter": 1, "boundary": -1.0 },
      "grid": { "x": [0.0, 1.0], "y": [0.0, 1.0], "nx": 17, "ny": 17 },
      "checks": [{ "id": "gradient_bound" }],
      "outputs": { "reportPath": "reports/stalled.json" }
    }
  ]
}"#,
    );
    let out = pfunc(tmp.path(), &["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("reports/stalled.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["schema"], "pfunc-report/1");
    assert_eq!(report["jobId"], "stalled");
    assert!(report["error"].as_str().unwrap().contains("no convergence"));
}

#[test]
fn list_is_sorted_and_names_the_catalog() {
    let tmp = tempfile::tempdir().unwrap();
    let out = pfunc(tmp.path(), &["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for section in ["equations:", "p-functions:", "fixtures and controls:", "checks:"] {
        assert!(text.contains(section), "missing section {section}");
    }
    for id in [
        "ex1", "ex2", "ex3", "ex4", "ex5", "ma_quadratic", "ho73_cubic", "ho74_quadratic",
        "red77_quadratic",
    ] {
        assert!(text.contains(&format!("  {id}: ")), "missing {id}");
    }
    // Within each section the ids appear in sorted order.
    for block in text.split("\n\n") {
        let ids: Vec<&str> = block
            .lines()
            .skip(1)
            .filter_map(|l| l.trim_start().split(':').next())
            .collect();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        assert_eq!(ids, sorted, "unsorted section: {block}");
    }
}

#[test]
fn dump_field_writes_the_check_field_and_the_solution_as_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "dump.json",
        r#"{
  "jobs": [
    {
      "jobId": "quad",
      "equation": "red77_quadratic",
      "grid": { "nx": 17, "ny": 17 },
      "checks": [{ "id": "order_reduction" }],
      "outputs": { "reportPath": "reports/quad.json" }
    }
  ]
}"#,
    );
    let out = pfunc(
        tmp.path(),
        &["dump-field", "quad", "order_reduction", "--config", &cfg, "--out", "dumps"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = std::fs::read_to_string(tmp.path().join("dumps/quad_order_reduction.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,y,value"));
    let first = lines.next().unwrap();
    // The reduction field of the quadratic is identically zero; its first
    // valid node sits one differencing ring in from the corner of [-1,1]^2.
    assert_eq!(first, "-0.875,-0.875,0");
    assert!(!csv.contains('\r'), "LF line endings only");
    assert!(tmp.path().join("dumps/quad_solution.csv").exists());

    // Asking for a check that has no plane field is a usage error.
    let out = pfunc(
        tmp.path(),
        &["dump-field", "quad", "mean_value_monotonicity", "--config", &cfg, "--out", "dumps"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_rerun_byte_identical_modulo_wall_time() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "twice.json",
        r#"{
  "jobs": [
    {
      "jobId": "flat",
      "equation": "flat_zero",
      "grid": { "nx": 17, "ny": 17 },
      "checks": [{ "id": "liouville_nonexistence" }],
      "outputs": { "reportPath": "reports/flat.json" }
    }
  ]
}"#,
    );
    let strip = |p: &Path| -> String {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.contains("wallTimeMs"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(pfunc(tmp.path(), &["run", &cfg]).status.code(), Some(0));
    let first = strip(&tmp.path().join("reports/flat.json"));
    assert_eq!(pfunc(tmp.path(), &["run", &cfg]).status.code(), Some(0));
    let second = strip(&tmp.path().join("reports/flat.json"));
    assert_eq!(first, second);
}
