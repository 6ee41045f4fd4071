use std::path::PathBuf;
use std::process::Command;

use effprop::cli::run;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("effprop").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn compare_full_grid_layout() {
    let (code, out, err) = cli(&["compare", "--project", &fixture("high_school.json")]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 29);
    assert_eq!(rows[0]["name"], "U-PEAP");
    assert_eq!(rows[1]["name"], "W-PEAP");
    let labels: Vec<&str> = rows[2..].iter().step_by(3).map(|r| r["heuristic"].as_str().unwrap()).collect();
    assert_eq!(
        labels,
        ["(Uni, Uni)", "(Uni, nSig)", "(Uni, UEPF)", "(BSR, Uni)", "(BSR, nSig)", "(BSR, UEPF)", "(BEPR, Uni)", "(BEPR, nSig)", "(BEPR, UEPF)"]
    );
    let paths: Vec<&str> = rows[2..5].iter().map(|r| r["path"].as_str().unwrap()).collect();
    assert_eq!(paths, ["1", "2", "3"]);
    assert_eq!(rows.iter().filter(|r| r["best"] == true).count(), 1);
    assert_eq!(v["metadata"]["project"], "high-school-administration");
    assert_eq!(v["metadata"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn compare_single_strategy() {
    let (code, out, _) = cli(&["compare", "--project", &fixture("high_school.json"), "--strategy", "u-peap"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
    assert_eq!(v["rows"][0]["name"], "U-PEAP");

    let (code, out, _) = cli(&[
        "compare", "--project", &fixture("high_school.json"), "--strategy", "heap", "--block", "bsr", "--unit", "nsig", "--path", "2",
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
    assert_eq!(v["rows"][0]["heuristic"], "(BSR, nSig)");
    assert_eq!(v["rows"][0]["strategy"]["path"], 2);
}

#[test]
fn human_and_machine_renderings_agree() {
    let p = fixture("high_school.json");
    let (_, j, _) = cli(&["compare", "--project", &p, "--format", "json"]);
    let (_, md, _) = cli(&["compare", "--project", &p, "--format", "md"]);
    let (_, csv, _) = cli(&["compare", "--project", &p, "--format", "csv"]);
    assert_eq!(csv.lines().count(), 30);
    for row in json(&j)["rows"].as_array().unwrap() {
        let v = row["total_epi"].as_f64().unwrap();
        assert!(md.contains(&format!("{v:.6}")));
        assert!(csv.contains(&v.to_string()));
    }
}

#[test]
fn malformed_project_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"factors\": [").unwrap();
    let (code, out, err) = cli(&["compare", "--project", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.starts_with("error:"));

    let (code, out, _) = cli(&["compare", "--project", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
}

#[test]
fn validation_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("high_school.json"))
        .unwrap()
        .replace("\"StudSat\": 0.221834", "\"StudSat\": 0.3");
    let p = dir.path().join("p.json");
    std::fs::write(&p, text).unwrap();
    let (code, out, err) = cli(&["compare", "--project", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("significance not normalized"), "{err}");
}

#[test]
fn out_file_written_only_on_success() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let (code, out, _) = cli(&["compare", "--project", &fixture("high_school.json"), "--out", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(json(&std::fs::read_to_string(&target).unwrap())["rows"].as_array().unwrap().len(), 29);

    let other = dir.path().join("never.json");
    let (code, _, _) = cli(&["compare", "--project", "nope.json", "--out", other.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(!other.exists());
}

#[test]
fn paths_lists_three() {
    let (code, out, _) = cli(&["paths", "--project", &fixture("high_school.json")]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["count"], 3);
    let first_block: Vec<_> = v["paths"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["levels"].as_array().unwrap().iter().find(|l| l["label"] == "I-B").unwrap()["members"].clone())
        .collect();
    assert_eq!(first_block, [serde_json::json!(["Schol"]), serde_json::json!(["Int"]), serde_json::json!(["Schol", "Int"])]);
    let (_, md, _) = cli(&["paths", "--project", &fixture("high_school.json"), "--format", "md"]);
    assert!(md.contains("I-B: Schol, Int"));
}

#[test]
fn classify_counts() {
    let (code, out, _) = cli(&["classify", "--project", &fixture("high_school.json")]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["daf"].as_array().unwrap().len(), 12);
    assert_eq!(v["ndaf"], serde_json::json!(["Pabl", "TeachSat", "StudSat"]));
    assert_eq!(v["excluded"], serde_json::json!(["NStaff", "CIn", "HighLow"]));
    assert_eq!(v["factors"][0]["level"], serde_json::json!({"block": 2, "sublevel": 1}));
    assert_eq!(v["factors"][0]["label"], "II-A");
    assert_eq!(v["factors"][1]["label"], "VII");
}

#[test]
fn opinion_project_end_to_end() {
    let p = fixture("small.json");
    let (code, out, err) = cli(&["normalize", "--project", &p]);
    assert_eq!(code, 0, "{err}");
    let v = json(&out);
    assert_eq!(v["dim"][0], serde_json::json!([0.0, 3.0, 2.0]));
    assert_eq!(v["ndim"][0], serde_json::json!([0.0, 0.6, 0.4]));

    let (code, out, _) = cli(&["trm", "--project", &p]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(v["threshold"].as_f64().unwrap() > 0.0);
    assert!(!v["edges"].as_array().unwrap().is_empty());
    let (_, csv, _) = cli(&["trm", "--project", &p, "--format", "csv"]);
    assert!(csv.starts_with("factor,a,b,c\n"));
    assert!(csv.contains("threshold,"));

    let (code, out, _) = cli(&["evaluate", "--project", &p, "--strategy", "heap", "--block", "uni", "--unit", "uni"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let r = &v["results"][0];
    assert_eq!(r["assignment"]["efforts"], serde_json::json!({"a": 0.5, "b": 0.5}));
    assert!(r["uepf"]["c"].as_f64().unwrap() == 0.5);
}

#[test]
fn normalize_from_opinion_files() {
    let e1 = fixture("opinions/expert1.csv");
    let e2 = fixture("opinions/expert2.csv");
    let (code, out, err) = cli(&["normalize", "--opinions", &e1, &e2, "--format", "csv"]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().next(), Some("factor,a,b,c"));
    assert!(out.contains("a,0,0.6,0.4"));
    let (code, _, err) = cli(&["normalize", "--opinions", &e1, &e2, "--weights", "1,-1"]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn path_out_of_range() {
    let (code, out, err) = cli(&["evaluate", "--project", &fixture("high_school.json"), "--strategy", "heap", "--path", "4"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("out of range"));
}

#[test]
fn flags_override_options() {
    let p = fixture("small.json");
    let (_, off, _) = cli(&["compare", "--project", &p, "--strategy", "peap", "--gating", "off"]);
    let (code, on, _) = cli(&["compare", "--project", &p, "--strategy", "peap", "--gating", "on", "--within-block", "on"]);
    assert_eq!(code, 0);
    let on = json(&on);
    assert_eq!(on["metadata"]["options"]["peap_gating"], true);
    assert_eq!(on["metadata"]["options"]["within_block_propagation"], true);
    assert_eq!(json(&off)["metadata"]["options"]["peap_gating"], false);
}

#[test]
fn verify_passes() {
    let (code, out, err) = cli(&["verify", "--cases", "50", "--format", "md"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("all passed"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_effprop");
    let ok = Command::new(bin).args(["paths", "--project", &fixture("high_school.json")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(bin).args(["paths", "--project", "/nonexistent/p.json"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
