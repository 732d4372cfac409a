use std::path::Path;
use std::process::{Command, Output};

fn cyclostab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cyclostab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const LINEAR: &str = "kind = \"analyze\"\n[system]\ntype = \"linear\"\na = [1.0, 1.0, 1.0]\nb = [1.0, 1.0, 1.0]\nc = [1.0, 1.0, 1.0]\n";

#[test]
fn analyze_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "unit.toml", LINEAR);
    let out = cyclostab(&["analyze", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["holds"], true);
    assert!((json["lambda_min"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(json["per_mode"].as_array().unwrap().len() > 1);
}

#[test]
fn list_shows_builtins() {
    let out = cyclostab(&["scenario", "list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["counterexample", "two-compartment", "mapk-pde", "linear-rd"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(dir.path(), "typo.toml", &LINEAR.replace("c = ", "cc = "));
    let out = cyclostab(&["analyze", "--config", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 6"));

    let out = cyclostab(&["analyze", "--config", "/nonexistent/file.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(cyclostab(&["scenario", "nope"]).status.code(), Some(2));
    assert_eq!(cyclostab(&["analyze"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "stiff.toml",
        &format!(
            "{}\n[grid]\nnodes = 201\n[integrator]\nt_end = 1.0\ndt = 0.01\n[initial]\ncoordinates = \"deviation\"\ncomponents = [[{{ constant = 1.0 }}], [{{ constant = 0.0 }}], [{{ constant = 0.0 }}]]\n",
            LINEAR.replace("analyze", "simulate-pde")
        ),
    );
    let out = cyclostab(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn builtin_csv_is_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = cyclostab(&["scenario", "counterexample", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    let csv = read(&a, "counterexample.csv");
    assert!(!csv.is_empty());
    assert_eq!(csv, read(&b, "counterexample.csv"));
    assert_eq!(read(&a, "counterexample.json"), read(&b, "counterexample.json"));
}

#[test]
fn sweep_with_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let one = write(dir.path(), "one.toml", LINEAR);
    let two = write(dir.path(), "two.toml", &LINEAR.replace("b = [1.0, 1.0, 1.0]", "b = [2.2, 2.2, 2.2]"));
    let out_dir = dir.path().join("out");
    let out = cyclostab(&["analyze", "--config", &one, "--config", &two, "--jobs", "2", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = |name: &str| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(out_dir.join(name)).unwrap()).unwrap()
    };
    assert_eq!(report("one.json")["holds"], true);
    assert_eq!(report("two.json")["holds"], false);
}
