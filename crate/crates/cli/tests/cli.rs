use std::path::Path;
use std::process::{Command, Output};

fn mra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mra")).args(args).output().expect("run mra")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn json_at(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn unknown_config_keys_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("run.toml");
    std::fs::write(&bad, "model = \"haar\"\nlevle = 3\n").unwrap();
    let o = mra(&["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("levle"));

    let good = dir.path().join("run.json");
    std::fs::write(&good, r#"{"model": "warped", "seed": 4}"#).unwrap();
    let out = dir.path().join("out.json");
    let o = mra(&["verify", "--config", good.to_str().unwrap(), "--seed", "9", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let doc = json_at(&out);
    assert_eq!(doc["config"]["model"], "warped");
    assert_eq!(doc["seed"], 9);
    assert_eq!(doc["tool"], "mra");
    assert!(doc["version"].is_string() && doc["timestamp"].is_u64());
}

#[test]
fn bad_flags_and_models_are_usage_errors() {
    assert_eq!(code(&mra(&["verify", "--variant", "sideways"])), 2);
    assert_eq!(code(&mra(&["verify", "--model", "nope"])), 2);
    assert_eq!(code(&mra(&["decompose", "--model", "c2"])), 2);
    assert_eq!(code(&mra(&["solve-scaling", "--model", "haar"])), 2);
}

#[test]
fn counterexample_failure_names_the_offending_overlap() {
    let o = mra(&["verify", "--model", "counterexample"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cross-orthogonality"));
    assert!(err.contains("<Psi, tau^-1 Phi> = +0.000000-0.500000i"));
}

#[test]
fn decompose_and_reconstruct_round_trip_from_a_csv_signal() {
    let dir = tempfile::tempdir().unwrap();
    let signal = dir.path().join("signal.csv");
    let rows: String = (0..64)
        .map(|i| {
            let x = -2.0 + i as f64 / 16.0;
            format!("{x},{}\n", (-x * x).exp())
        })
        .collect();
    std::fs::write(&signal, format!("x,value\n{rows}")).unwrap();
    let dec = dir.path().join("dec.json");
    let o = mra(&[
        "decompose",
        "--input",
        signal.to_str().unwrap(),
        "--jmin",
        "-3",
        "--jmax",
        "1",
        "--out",
        dec.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json_at(&dec)["report"]["reconstruction_residual"].as_f64().unwrap() < 1e-10);

    let rec = dir.path().join("rec.json");
    let o = mra(&["reconstruct", "--input", dec.to_str().unwrap(), "--jmin", "-3", "--jmax", "1", "--out", rec.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json_at(&rec)["report"]["round_trip_residual"].as_f64().unwrap() < 1e-10);

    let o = mra(&["reconstruct", "--model", "warped", "--input", dec.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn malformed_signal_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let signal = dir.path().join("signal.csv");
    std::fs::write(&signal, "x,value\n0.5,abc\n").unwrap();
    assert_eq!(code(&mra(&["decompose", "--input", signal.to_str().unwrap()])), 2);
}

#[test]
fn window_overflow_names_the_level() {
    let o = mra(&["decompose", "--jmin", "-6", "--jmax", "0"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("level j = -7"));
}

#[test]
fn csv_output_carries_provenance_header() {
    let o = mra(&["decompose", "--format", "csv", "--seed", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# tool=mra version="));
    assert!(lines.next().unwrap().starts_with("# config={"));
    assert_eq!(lines.next().unwrap(), "j,k,re,im");
}

#[test]
fn solver_reports_infeasible_moduli_with_exit_one() {
    let o = mra(&["solve-scaling", "--model", "c2"]);
    assert_eq!(code(&o), 1);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["report"]["feasible"], false);
    assert!(doc["report"]["h"].is_null());
    assert_eq!(code(&mra(&["solve-scaling", "--model", "unit"])), 0);
    assert_eq!(code(&mra(&["solve-scaling", "--model", "fixture", "--search", "free"])), 0);
}
