use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn incon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_incon")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn measure_json_carries_the_table_values() {
    let o = incon(&["--json", "measure", &data("airport_d1.csv"), "-c", &data("airport.dc"), "--all"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let get = |m: &str| {
        v.as_array()
            .unwrap()
            .iter()
            .find(|x| x["measure"] == m)
            .unwrap_or_else(|| panic!("{m} missing"))["value"]
            .as_f64()
            .unwrap()
    };
    assert_eq!(get("mi"), 7.0);
    assert_eq!(get("rlin"), 2.5);
    assert_eq!(get("rupd"), 4.0);
    assert_eq!(get("viol"), 9.0);
}

#[test]
fn capped_results_exit_with_two() {
    let o = incon(&["--mc-limit", "1", "measure", &data("airport_d1.csv"), "-c", &data("airport.dc"), "-m", "mc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("no"));
}

#[test]
fn input_errors_exit_with_one() {
    let o = incon(&["measure", "missing.csv", "-c", &data("airport.dc")]);
    assert_eq!(o.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad: PathBuf = dir.path().join("bad.dc");
    std::fs::write(&bad, "FD Airport: Nope -> Country\n").unwrap();
    let o = incon(&["measure", &data("airport_d1.csv"), "-c", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Nope"));
}

#[test]
fn script_trajectory_ends_at_the_noisy_copy() {
    let o = incon(&[
        "trajectory",
        &data("airport_d0.csv"),
        "-c",
        &data("airport.dc"),
        "--script",
        &data("d0_to_d1.script"),
        "-m",
        "d,mi,p",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,action,d,mi,p");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].ends_with(",0,0,0"));
    assert!(lines[5].ends_with(",1,7,5"));
}

#[test]
fn fixtures_pass_and_can_be_listed() {
    let o = incon(&["props", "--fixtures"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = incon(&["props", "--list"]);
    assert!(stdout(&o).contains("continuity-family"));
}

#[test]
fn generated_maxcut_instance_measures_to_the_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = incon(&["gen", "maxcut", "--complete", "3", "--out-dir", out]);
    assert_eq!(o.status.code(), Some(0));
    let csv = format!("{out}/maxcut.csv");
    let dc = format!("{out}/maxcut.dc");
    let o = incon(&["--json", "measure", &csv, "-c", &dc, "-m", "r"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["value"].as_f64(), Some(16.0));
}
