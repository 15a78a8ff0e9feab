use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn liesym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liesym")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = liesym(&all);
    let v: Value = serde_json::from_slice(&out.stdout).expect("json on stdout");
    (out.status.code().unwrap(), v)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn preset(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("presets");
    p.push(format!("{name}.toml"));
    p.to_string_lossy().into_owned()
}

fn temp_spec(name: &str, text: &str) -> String {
    let p = std::env::temp_dir().join(format!("liesym-test-{}-{name}.toml", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn classify_pipe_is_row_8() {
    let (code, v) = json(&["--input", &preset("pipe"), "classify"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "classify");
    let cls = &v["reports"][0]["detail"];
    assert_eq!(cls["subclass"], "A");
    assert_eq!(cls["row"], 8);
}

#[test]
fn classify_inverse_square_beam() {
    let o = liesym(&["--preset", "beam-winkler-invsq", "classify"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("table row 4"), "{s}");
    assert!(s.contains("2 b Y2 + Y3"), "{s}");
}

#[test]
fn classify_e_omega() {
    let o = liesym(&["--preset", "plate-e-omega", "classify"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("6-parameter, E_omega type"));
}

#[test]
fn every_table_row_preset() {
    for row in 1..=11 {
        let (code, v) = json(&["--preset", &format!("rod-row{row:02}"), "classify"]);
        assert_eq!(code, 0, "row {row}");
        assert_eq!(v["reports"][0]["detail"]["row"], row);
    }
}

#[test]
fn check_symmetry_verdicts() {
    let o = liesym(&["--preset", "biharmonic", "check-symmetry", "--xi1", "x1^2 - x2^2", "--xi2", "2*x1*x2", "--sigma", "2*x1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("variational: variational"));

    let o = liesym(&["--preset", "beam", "check-symmetry", "--xi1", "x1", "--xi2", "2*x2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("needs 0.5 X0"));

    let o = liesym(&["--preset", "beam", "check-symmetry", "--xi1", "x2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn beam_table_has_six_laws() {
    let (code, v) = json(&["--preset", "beam", "currents"]);
    assert_eq!(code, 0);
    let names: Vec<&str> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["detail"]["density"].is_string())
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names.len(), 6, "{names:?}");
}

#[test]
fn row_6_currents_verify() {
    let o = liesym(&["--preset", "rod-row06", "currents"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("law for b Y1 + Y3"));
}

#[test]
fn eshelby_current_from_u() {
    let o = liesym(&["--preset", "beam", "currents", "--u", "x1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("P2 = (x1)*w_2"), "{s}");
}

#[test]
fn pipe_travelling_wave() {
    let spec = temp_spec(
        "pipe-m0",
        "[equation]\nkind = \"rod\"\n[rod]\ngamma = 1.0\nchi11 = 1.0\nchi12 = 1.0\nchi22 = 1.0\n",
    );
    let o = liesym(&["--input", &spec, "reduce", "--kind", "travelling-wave", "--c", "1", "--profile", "cos(2*s)", "--integrate"]);
    let s = stdout(&o);
    assert!(o.status.success(), "{s}");
    assert!(s.contains("U'''' + 4 U'' = 0"), "{s}");
}

#[test]
fn row_5_y4_reduction() {
    let o = liesym(&["--preset", "rod-row05", "reduce", "--kind", "y4", "--integrate"]);
    let s = stdout(&o);
    assert!(s.contains("48 U''''"), "{s}");
    assert!(s.contains("U'' - 4 U'"), "{s}");
}

#[test]
fn const_plate_invariant_solution() {
    let o = liesym(&["--preset", "plate-constant-8", "reduce", "--kind", "plate-invariant", "--coeffs", "1,0,0,0"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn transform_worked_example() {
    let o = liesym(&["--preset", "plate-e-omega", "transform", "--k", "0,2,0"]);
    let s = stdout(&o);
    assert!(o.status.success(), "{s}");
    assert!(s.contains("1 W1111 + 2 W1122 + 1 W2222 - 8 W11 + 8 W22 + 16 W = 0"), "{s}");
}

#[test]
fn selfcheck_passes_with_json_file() {
    let path = std::env::temp_dir().join(format!("liesym-selfcheck-{}.json", std::process::id()));
    let o = liesym(&["selfcheck", "--json", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["command"], "selfcheck");
}

#[test]
fn spec_errors_exit_2() {
    assert_eq!(liesym(&["classify"]).status.code(), Some(2));
    assert_eq!(liesym(&["--input", "/nonexistent.toml", "classify"]).status.code(), Some(2));
    let bad = temp_spec("gamma0", "[equation]\nkind = \"rod\"\n[rod]\ngamma = 0.0\nchi22 = 1.0\n");
    assert_eq!(liesym(&["--input", &bad, "classify"]).status.code(), Some(2));
    let o = liesym(&["--preset", "pipe", "reduce", "--kind", "y3"]);
    assert_eq!(o.status.code(), Some(2));
    let (code, v) = json(&["--preset", "nope", "classify"]);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "input");
}

#[test]
fn output_is_stable_for_fixed_seed() {
    let a = liesym(&["--seed", "5", "--json", "--preset", "rod-row02", "classify"]);
    let b = liesym(&["--seed", "5", "--json", "--preset", "rod-row02", "classify"]);
    assert_eq!(a.stdout, b.stdout);
}
