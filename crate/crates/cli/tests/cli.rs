use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rewit::io::{operator_from_json, operator_to_json, params_from_json};
use rewit::oracle::{random_density, restart_rng};
use rewit::witness::build_witness;
use rewit::Dims;
use serde_json::Value;
use tempfile::TempDir;

const GHZ: &str = r#"{"version":1,"dims":[2,2,2],"a":{"":"1","2":"1","3":"1"},"a_full":"0","a_prime":{}}"#;

fn rewit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rewit"))
        .args(args)
        .output()
        .expect("spawn rewit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("structured output parses")
}

#[test]
fn reproduce_succeeds() {
    let o = rewit(&["reproduce"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn unknown_subcommand_is_usage_error() {
    assert_eq!(rewit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(rewit(&[]).status.code(), Some(2));
}

#[test]
fn lp_three_qubit_example() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ghz.json", GHZ);
    let o = rewit(&["lp", s(&p)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("minimum 0 (exact)"), "{text}");
    assert!(text.contains("vertex (1, 1, 1) (exact)"), "{text}");

    let v = json_of(&rewit(&["lp", s(&p), "--format", "json"]));
    assert_eq!(v["version"], 1);
    assert_eq!(v["minimum"]["exact"], "0");
    assert_eq!(v["vertex"], serde_json::json!([{"exact":"1"},{"exact":"1"},{"exact":"1"}]));
    assert_eq!(v["is_ew"], true);
}

#[test]
fn parse_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", r#"{"dims":[2,2,2],"a":{"":"1","2":"oops","3":"1"},"a_full":"0"}"#);
    let o = rewit(&["classify", s(&p)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("a[2]"));
    let o = rewit(&["lp", s(&dir.path().join("missing.json"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = rewit(&["apexes", "--dims", "3,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn build_output_round_trips() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ghz.json", GHZ);
    let out = dir.path().join("w.json");
    let o = rewit(&["build", s(&p), "--format", "json", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let w = operator_from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(w, build_witness(&params_from_json(GHZ).unwrap()).unwrap());
}

#[test]
fn structured_reports_round_trip() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ghz.json", GHZ);
    for cmd in ["spectrum", "classify", "detect", "lp"] {
        let out = dir.path().join(format!("{cmd}.json"));
        let o = rewit(&[cmd, s(&p), "--format", "json", "--output", s(&out)]);
        assert_eq!(o.status.code(), Some(0), "{cmd}");
        let text = std::fs::read_to_string(&out).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], cmd);
        assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", text);
    }
}

#[test]
fn spectrum_reports_exact_values() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ghz.json", GHZ);
    let v = json_of(&rewit(&["spectrum", s(&p), "--format", "json"]));
    assert_eq!(v["omega1"]["exact"], "1");
    assert_eq!(v["omega2"]["exact"], "-1");
    assert!(v["numeric_deviation"]["approx"].as_f64().unwrap() < 1e-12);
}

#[test]
fn apexes_table() {
    let v = json_of(&rewit(&["apexes", "--dims", "2,3,4", "--format", "json"]));
    assert_eq!(v["apexes"].as_array().unwrap().len(), 7);
    assert_eq!(v["facets"].as_array().unwrap().len(), 7);
    assert_eq!(v["coordinates"][0], "P2");
}

#[test]
fn detect_with_state_file() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ghz.json", GHZ);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut entries = vec!["[0,0]".to_string(); 8];
    entries[0] = format!("[{h},0]");
    entries[7] = format!("[{h},0]");
    let ket = write(&dir, "ghz_ket.json", &format!(r#"{{"dims":[2,2,2],"entries":[{}]}}"#, entries.join(",")));
    let v = json_of(&rewit(&["detect", s(&p), "--state", s(&ket), "--format", "json"]));
    assert_eq!(v["verdict"], "undetermined");
    assert!((v["state"]["expectation"]["approx"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(v["state"]["detected"], true);
}

#[test]
fn detect_rejects_non_witness() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "pos.json", r#"{"dims":[2,2,2],"a":{"":"1","2":"1","3":"1"},"a_full":"50"}"#);
    assert_eq!(rewit(&["detect", s(&p)]).status.code(), Some(2));
    // A positive operator is still a valid LP input.
    assert_eq!(rewit(&["lp", s(&p)]).status.code(), Some(0));
}

#[test]
fn oracle_is_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "ghz.json", GHZ);
    let args = ["oracle", s(&p), "--seed", "7", "--samples", "40", "--seesaw-iters", "50", "--tol", "1e-9", "--format", "json"];
    let a = rewit(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, rewit(&args).stdout);
    let v = json_of(&a);
    assert_eq!(v["lower_bound_ok"], true);
    assert_eq!(v["lp_min"]["exact"], "0");
    assert_eq!(v["restarts"], 40);
}

#[test]
fn bd_modes() {
    let v = json_of(&rewit(&["bd", "w1", "--n", "4", "--a", "1", "--b", "0", "--c", "0", "--d", "1", "--format", "json"]));
    assert_eq!(v["minimum"], v["apex_minimum"]);
    assert_eq!(v["certificate_exact"], true);
    let o = rewit(&["bd", "w2", "--n", "3", "--samples", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0 violations"));
    assert_eq!(rewit(&["bd", "w3"]).status.code(), Some(2));
}

#[test]
fn map_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let rho = random_density(&Dims::new(vec![2, 3]).unwrap(), &mut restart_rng(5, 0)).unwrap();
    let rp = write(&dir, "rho.json", &operator_to_json(&rho));
    let o = rewit(&[
        "map", "--rho", s(&rp), "--factor", "2,2,1,0,0", "--factor", "3,3,1,0,0",
        "--samples", "20", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json_of(&o);
    assert!(v["closed_form_deviation"]["approx"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["positivity"]["violations"], 0);
    let image = operator_from_json(&v["image"].to_string()).unwrap();
    assert_eq!(image.dims().as_slice(), &[2, 3]);

    let o = rewit(&["map", "--rho", s(&rp), "--factor", "2,2,1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = rewit(&["map", "--rho", s(&rp)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn map_from_witness_file() {
    let dir = TempDir::new().unwrap();
    // Reduction witness I - 2ψ on 2 ⊗ 2 gives E(ρ) = Tr(ρ) I - ρ.
    let w = build_witness(
        &params_from_json(r#"{"dims":[2,2],"a":{"":"1"},"a_full":"0"}"#).unwrap(),
    )
    .unwrap();
    let wp = write(&dir, "w.json", &operator_to_json(&w));
    let rho = random_density(&Dims::new(vec![2]).unwrap(), &mut restart_rng(9, 0)).unwrap();
    let rp = write(&dir, "rho.json", &operator_to_json(&rho));
    let o = rewit(&[
        "map", "--witness", s(&wp), "--input-dims", "2", "--output-dims", "2", "--rho", s(&rp),
        "--factor", "2,2,1,0,0", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let image = operator_from_json(&json_of(&o)["image"].to_string()).unwrap();
    let want = rewit::Operator::identity(rho.dims()).sub(&rho).unwrap();
    assert!(image.max_abs_diff(&want).unwrap() < 1e-12);
}
