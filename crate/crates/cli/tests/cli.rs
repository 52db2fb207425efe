use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quarklet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/coefficients.json")
        .display()
        .to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("quarklet-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn approximate_is_deterministic() {
    let f = fixture();
    let args = [
        "approximate",
        "--input",
        &f,
        "--j0",
        "1",
        "--steps",
        "12",
        "--format",
        "json",
    ];
    let (a, b) = (bin(&args), bin(&args));
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["schema"], "quarklet-run/v1");
    assert_eq!(v["steps"].as_array().unwrap().len(), 13);
    assert_eq!(v["a_R_history"].as_array().unwrap().len(), 13);
}

#[test]
fn fixture_error_column_non_increasing() {
    let f = fixture();
    let o = bin(&["approximate", "--input", &f, "--j0", "1", "--steps", "20"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# quarklet-steps v1"));
    assert_eq!(
        lines.next(),
        Some("N,grown_nodes,cardinality,global_error,a_root,step_count")
    );
    let errs: Vec<f64> = lines
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(errs.len(), 21);
    assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
}

#[test]
fn out_dir_receives_all_artifacts() {
    let dir = scratch("artifacts");
    let f = fixture();
    let d = dir.display().to_string();
    let o = bin(&[
        "approximate",
        "--input",
        &f,
        "--j0",
        "1",
        "--steps",
        "5",
        "--out",
        &d,
    ]);
    assert!(o.status.success());
    for name in ["steps.csv", "run.json", "tree.json", "tree.dot"] {
        assert!(dir.join(name).is_file(), "{name}");
    }
    let tree = dir.join("tree.json").display().to_string();
    let dot = bin(&["export-tree", "--input", &tree]);
    assert!(dot.status.success());
    assert_eq!(
        stdout(&dot),
        std::fs::read_to_string(dir.join("tree.dot")).unwrap()
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn zero_steps_is_root_only() {
    let dir = scratch("empty");
    let empty = dir.join("empty.json");
    std::fs::write(&empty, "[]").unwrap();
    let e = empty.display().to_string();
    let o = bin(&["approximate", "--input", &e, "--steps", "0"]);
    assert!(o.status.success());
    let rows: Vec<String> = stdout(&o).lines().skip(2).map(str::to_string).collect();
    assert_eq!(rows, vec!["0,1,1,0e0,0e0,1".to_string()]);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn exit_codes() {
    let dir = scratch("codes");
    let bad_json = dir.join("bad.json");
    std::fs::write(&bad_json, "[{\"p1\": 0,").unwrap();
    let unreachable = dir.join("alpha.json");
    std::fs::write(
        &unreachable,
        r#"[{"p1":0,"j1":1,"k1":0,"p2":0,"j2":1,"k2":0,"alpha":2,"c":1.0},
            {"p1":0,"j1":2,"k1":-3,"p2":0,"j2":1,"k2":0,"c":1.0}]"#,
    )
    .unwrap();
    let (b, u) = (
        bad_json.display().to_string(),
        unreachable.display().to_string(),
    );

    let o = bin(&["approximate", "--input", &b, "--j0", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let o = bin(&["approximate", "--input", &u, "--j0", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(err.contains("entry 0") && err.contains("entry 1"), "{err}");

    assert_eq!(
        bin(&["approximate", "--input", &b, "--delta", "1.0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(bin(&["falpha", "--alpha", "0.4"]).status.code(), Some(2));
    assert_eq!(bin(&["oracle", "--steps", "40"]).status.code(), Some(2));
    assert_eq!(
        bin(&["approximate", "--m", "3", "--mtilde", "2", "--input", &u])
            .status
            .code(),
        Some(2)
    );
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn certify_and_oracle_are_deterministic() {
    let a = bin(&["certify", "--instances", "5", "--seed", "9"]);
    let b = bin(&["certify", "--instances", "5", "--seed", "9"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 7);

    let o = bin(&["oracle", "--seed", "4", "--j0", "1", "--steps", "6"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().next(), Some("# quarklet-sigma v1"));
    assert_eq!(
        o.stdout,
        bin(&["oracle", "--seed", "4", "--j0", "1", "--steps", "6"]).stdout
    );
}

#[test]
fn falpha_csv_has_header() {
    let o = bin(&["falpha", "--alpha", "1.5", "--levels", "2", "--steps", "0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("# quarklet-falpha v1\n"));
    assert_eq!(text.lines().count(), 5);
}
