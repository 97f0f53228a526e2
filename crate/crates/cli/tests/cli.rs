use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const ALGAE: &str = "\
# algae and nutrient
[model]
name = algae
kind = ode2
vars = x y

[equations]
x = 2*x*(1 - y)
y = 2 - y - x^2

[domain]
x = 0 3
y = 0 3
";

fn phaseplane(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phaseplane")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = phaseplane(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut args = args.to_vec();
    args.extend(["--json", "-"]);
    serde_json::from_str(&stdout(&args)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn exit_codes() {
    assert_eq!(phaseplane(&["analyze", "--builtin", "ppour"]).status.code(), Some(0));
    assert_eq!(phaseplane(&["analyze", "--builtin", "nosuch"]).status.code(), Some(2));
    assert_eq!(phaseplane(&["analyze", "--builtin", "spruce_budworm"]).status.code(), Some(2));
    assert_eq!(phaseplane(&["analyze"]).status.code(), Some(2));
    assert_eq!(phaseplane(&["scan", "--builtin", "brusselator", "--range", "1", "3", "--hopf"]).status.code(), Some(2));
    assert_eq!(phaseplane(&["analyze", "/no/such/model.txt"]).status.code(), Some(2));
    assert_eq!(phaseplane(&["phaseline", "--builtin", "ppour"]).status.code(), Some(2));
    assert_eq!(phaseplane(&["--help"]).status.code(), Some(0));
    // a defective matrix has no closed form with two independent solutions
    assert_eq!(phaseplane(&["linsolve", "1", "1", "0", "1", "--init", "1,1"]).status.code(), Some(1));
}

#[test]
fn malformed_files_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cut = ALGAE.split("[equations]").next().unwrap();
    let path = write(dir.path(), "cut.txt", cut);
    let out = phaseplane(&["analyze", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[equations]"));

    let path = write(dir.path(), "undeclared.txt", &ALGAE.replace("2*x*(1 - y)", "2*x*(1 - z)"));
    let out = phaseplane(&["analyze", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains('z'));
}

#[test]
fn analyzes_a_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "algae.txt", ALGAE);
    let report = json(&["analyze", &path]);
    let eq: Vec<(f64, f64, &str)> = report["equilibria"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["x"].as_f64().unwrap(), e["y"].as_f64().unwrap(), e["class"].as_str().unwrap()))
        .collect();
    assert_eq!(eq.len(), 2);
    assert!((eq[0].0).abs() < 1e-8 && (eq[0].1 - 2.0).abs() < 1e-8 && eq[0].2 == "stable_node", "{eq:?}");
    assert!((eq[1].0 - 1.0).abs() < 1e-8 && (eq[1].1 - 1.0).abs() < 1e-8 && eq[1].2 == "saddle", "{eq:?}");
    assert_eq!(report["model"]["name"], "algae");
    assert_eq!(report["input_sha256"].as_str().unwrap().len(), 64);
    for key in ["jacobian", "det", "tr", "discriminant", "eigenvalues"] {
        assert!(report["equilibria"][0].get(key).is_some(), "missing {key}");
    }
}

#[test]
fn json_round_trips_byte_for_byte() {
    let text = stdout(&["analyze", "--builtin", "ppour", "--json", "-"]);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", text);
    assert!(!text.contains("-0.0"));
}

#[test]
fn portrait_marks_every_equilibrium() {
    let svg = stdout(&["portrait", "--builtin", "ppour"]);
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("class=\"equilibrium\"").count(), 3);
    assert!(!svg.contains("class=\"trajectory\""));
    assert!(svg.contains("class=\"x-cline\"") && svg.contains("class=\"y-cline\""));
}

#[test]
fn closed_orbit_returns_to_its_start() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lv.svg");
    let out = out.to_str().unwrap();
    stdout(&["portrait", "--builtin", "lotka_volterra", "-o", out, "--start", "1,1", "--tmax", "20"]);
    let svg = std::fs::read_to_string(out).unwrap();
    let line = svg.lines().find(|l| l.contains("class=\"trajectory\"")).unwrap();
    let points = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
    let pts: Vec<(f64, f64)> = points
        .split(' ')
        .map(|p| {
            let (x, y) = p.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    let start = pts[0];
    // the orbit passes close to where it began at least once after leaving
    let far = pts.iter().position(|p| (p.0 - start.0).hypot(p.1 - start.1) > 50.0).unwrap();
    let nearest = pts[far..].iter().map(|p| (p.0 - start.0).hypot(p.1 - start.1)).fold(f64::INFINITY, f64::min);
    assert!(nearest < 5.0, "closest return {nearest} px");
}

#[test]
fn scans_report_critical_values() {
    let hopf = json(&["scan", "--builtin", "brusselator", "--param", "b", "--range", "1.5", "2.5", "--hopf"]);
    assert!((hopf["scan"]["critical"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    let fold = json(&["scan", "--builtin", "logistic_harvest", "--param", "h", "--range", "0", "2", "--fold"]);
    assert!((fold["scan"]["critical"].as_f64().unwrap() - 1.5).abs() < 1e-6);
}

#[test]
fn linear_commands() {
    let r = json(&["linsolve", "1", "4", "1", "1", "--init", "4,6", "--at", "0"]);
    let text = r.to_string();
    assert!(text.contains("saddle"), "{text}");
    let eig = json(&["eig", "-1", "5", "-1", "3"]);
    let text = eig.to_string();
    assert!(text.contains("unstable_spiral"), "{text}");
    let shown = stdout(&["linsolve", "1", "4", "1", "1", "--init", "4,6"]);
    assert!(shown.contains("C1 = 1") && shown.contains("C2 = -2"), "{shown}");
}

#[test]
fn phase_line_of_a_scalar_model() {
    let r = json(&["phaseline", "--builtin", "cubic_flow"]);
    let eq = r["equilibria"].as_array().unwrap();
    let classes: Vec<&str> = eq.iter().map(|e| e["class"].as_str().unwrap()).collect();
    assert_eq!(classes, ["stable", "unstable", "stable"]);
    assert_eq!(r["phase_line"]["basins"].as_array().unwrap().len(), 2);
}
