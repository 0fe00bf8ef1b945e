use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn darkstate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_darkstate")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(name);
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&value).expect("schema compiles")
}

fn assert_valid(schema_name: &str, text: &str) -> Value {
    let value: Value = serde_json::from_str(text).expect("output is JSON");
    let validator = schema(schema_name);
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
    value
}

/// Export a preset, edit it, and write it to a file.
fn edited_preset(dir: &TempDir, preset: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let out = darkstate(&["export", "--preset", preset]);
    assert_eq!(code(&out), 0);
    let mut doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    edit(&mut doc);
    let path = dir.path().join(format!("{preset}.json"));
    fs::write(&path, serde_json::to_vec_pretty(&doc).unwrap()).unwrap();
    path
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&darkstate(&["--help"])), 0);
    assert_eq!(code(&darkstate(&["--version"])), 0);
    assert_eq!(code(&darkstate(&["classify", "--help"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&darkstate(&[])), 1);
    assert_eq!(code(&darkstate(&["frobnicate"])), 1);
    assert_eq!(code(&darkstate(&["classify"])), 1);
    assert_eq!(code(&darkstate(&["classify", "--preset", "lambda", "--system", "x.json"])), 1);
    assert_eq!(code(&darkstate(&["classify", "--preset", "no-such-preset"])), 1);
    assert_eq!(code(&darkstate(&["evolve", "--preset", "lambda", "--t-end", "-1"])), 1);
    assert_eq!(code(&darkstate(&["scan", "--preset", "pair", "--axis-a", "bogus", "--axis-b", "rabi:1-1:0:1:2"])), 1);
}

#[test]
fn bad_files_exit_one_with_a_location() {
    let dir = TempDir::new().unwrap();
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{\n  \"ground\": [\n}").unwrap();
    let out = darkstate(&["classify", "--system", broken.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let missing = dir.path().join("missing.json");
    assert_eq!(code(&darkstate(&["validate", "--system", missing.to_str().unwrap()])), 1);
}

#[test]
fn presets_list_everything() {
    let out = darkstate(&["presets"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for name in ["lambda", "m-loop", "fan-a", "fan-d", "pair", "rb87-1", "rb87-10"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
}

#[test]
fn frame_report_matches_schema() {
    let out = darkstate(&["rwa", "--preset", "m-loop", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = assert_valid("frame.schema.json", &stdout(&out));
    assert_eq!(v["feasible"], true);
    assert_eq!(v["independent_cycles"], 1);
    assert_eq!(v["cycles"][0]["edges"].as_array().unwrap().len(), 4);
}

#[test]
fn perturbed_loop_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let path = edited_preset(&dir, "m-loop", |doc| {
        let last = doc["couplings"].as_array_mut().unwrap().last_mut().unwrap();
        last["frequency"] = Value::from(last["frequency"].as_f64().unwrap() + 0.05);
    });
    let path = path.to_str().unwrap();
    let out = darkstate(&["rwa", "--system", path, "--format", "json"]);
    assert_eq!(code(&out), 2);
    let v = assert_valid("frame.schema.json", &stdout(&out));
    assert_eq!(v["feasible"], false);
    assert!(v["cycle_space_residual"].as_f64().unwrap() > 0.01);
    assert_eq!(code(&darkstate(&["classify", "--system", path])), 2);
    assert_eq!(code(&darkstate(&["evolve", "--system", path])), 2);
}

#[test]
fn classification_matches_schema() {
    for preset in ["lambda", "fan-a", "fan-c", "m", "pair", "rb87-5", "rb87-10"] {
        let out = darkstate(&["classify", "--preset", preset, "--format", "json"]);
        assert_eq!(code(&out), 0, "{preset}");
        let v = assert_valid("classification.schema.json", &stdout(&out));
        assert_eq!(v["rb87"].is_object(), preset.starts_with("rb87"), "{preset}");
    }
    let v = assert_valid(
        "classification.schema.json",
        &stdout(&darkstate(&["classify", "--preset", "fan-a", "--format", "json"])),
    );
    assert_eq!(v["total_dark_dim"], 3);
    assert_eq!(v["liouvillian_kernel_dim"], 9);
    assert_eq!(v["unique"], false);
}

#[test]
fn classify_without_dark_state_exits_two() {
    let dir = TempDir::new().unwrap();
    let path = edited_preset(&dir, "pair", |doc| {
        for c in doc["couplings"].as_array_mut().unwrap() {
            if c["g"] == 2 && c["e"] == 2 {
                c["magnitude"] = Value::from(2.0);
            }
        }
    });
    let out = darkstate(&["classify", "--system", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("no dark"), "{}", stdout(&out));
}

#[test]
fn rank_tolerance_flag_reaches_the_classifier() {
    let dir = TempDir::new().unwrap();
    let path = edited_preset(&dir, "pair", |doc| {
        doc["couplings"][0]["magnitude"] = Value::from(1.0 + 1e-9);
    });
    let path = path.to_str().unwrap();
    assert_eq!(code(&darkstate(&["classify", "--system", path])), 2);
    assert_eq!(code(&darkstate(&["classify", "--system", path, "--tol-rank", "1e-6"])), 0);
}

#[test]
fn rb87_table_matches_schema() {
    let out = darkstate(&["rb87-table", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = assert_valid("rb87-table.schema.json", &stdout(&out));
    assert_eq!(v.as_array().unwrap().len(), 10);
    let text = stdout(&darkstate(&["rb87-table"]));
    assert!(text.contains("Rabi-conditioned"));
}

#[test]
fn evolve_at_time_zero_returns_the_initial_state() {
    let out = darkstate(&["evolve", "--preset", "lambda", "--t-end", "0", "--rho0", "g2", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v = assert_valid("trajectory.schema.json", &stdout(&out));
    assert_eq!(v["times"], serde_json::json!([0.0]));
    assert_eq!(v["populations"][0], serde_json::json!([0.0, 1.0, 0.0]));
    assert_eq!(v["purity"][0], 1.0);
}

#[test]
fn evolve_writes_csv_with_metadata() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("traj.csv");
    let out = darkstate(&[
        "evolve",
        "--preset",
        "pair",
        "--t-end",
        "500",
        "--steps",
        "100",
        "--eigenbasis",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let csv = fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    assert!(header.contains(&"pop_g1") && header.contains(&"excited_population") && header.contains(&"eig_1"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 101);
    assert!(rows.iter().all(|r| r.len() == header.len()));
    let excited = header.iter().position(|&h| h == "excited_population").unwrap();
    assert!(rows.last().unwrap()[excited] < 1e-6);

    let meta = fs::read_to_string(dir.path().join("traj.csv.meta.json")).unwrap();
    let v = assert_valid("metadata.schema.json", &meta);
    assert_eq!(v["kind"], "trajectory");
    assert_eq!(v["columns"].as_array().unwrap().len(), header.len());
}

#[test]
fn evolve_accepts_a_density_matrix_file() {
    let dir = TempDir::new().unwrap();
    let rho = dir.path().join("rho.json");
    fs::write(&rho, r#"{"re": [[0.5, 0, 0], [0, 0.5, 0], [0, 0, 0]]}"#).unwrap();
    let out = darkstate(&[
        "evolve",
        "--preset",
        "lambda",
        "--t-end",
        "0",
        "--rho0",
        rho.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["purity"][0], 0.5);

    fs::write(&rho, r#"{"re": [[0.5, 0, 0], [0, 0.6, 0], [0, 0, 0]]}"#).unwrap();
    let out = darkstate(&["evolve", "--preset", "lambda", "--t-end", "0", "--rho0", rho.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn scan_writes_grid_and_metadata() {
    let dir = TempDir::new().unwrap();
    let out_path = dir.path().join("scan.csv");
    let out = darkstate(&[
        "scan",
        "--preset",
        "pair",
        "--axis-a",
        "energy:g2:-1:1:3",
        "--axis-b",
        "rabi:1-1:0:2:3",
        "--observable",
        "excited-population",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(&out_path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "energy:g2,rabi:1-1,excited_population");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 9);
    // the preset pair is dark at zero shift and unit Rabi frequency
    let dark = rows.iter().find(|r| r[0] == 0.0 && r[1] == 1.0).unwrap();
    assert!(dark[2].abs() < 1e-8);

    let v = assert_valid("metadata.schema.json", &fs::read_to_string(dir.path().join("scan.csv.meta.json")).unwrap());
    assert_eq!(v["kind"], "scan");
    assert_eq!(v["masked_cells"], 0);
}

#[test]
fn sequential_flag_gives_identical_scans() {
    let args = ["scan", "--preset", "fan-b", "--axis-a", "decay-scale:0.5:1.5:2", "--axis-b", "phase:1-1:0:3:3"];
    let parallel = stdout(&darkstate(&args));
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(parallel, stdout(&darkstate(&seq)));
}

#[test]
fn export_round_trips_through_validate() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("fan.json");
    assert_eq!(code(&darkstate(&["export", "--preset", "fan-c", "--out", path.to_str().unwrap()])), 0);
    let out = darkstate(&["validate", "--system", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let a = stdout(&darkstate(&["classify", "--preset", "fan-c", "--format", "json"]));
    let b = stdout(&darkstate(&["classify", "--system", path.to_str().unwrap(), "--format", "json"]));
    assert_eq!(a, b);
}
