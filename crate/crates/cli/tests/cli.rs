use std::path::PathBuf;
use std::process::{Command, Output};

fn mlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlab")).args(args).output().expect("binary runs")
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn bound_table() {
    let o = mlab(&["bound", "--family", "triangle", "--n", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("198"));
    let o = mlab(&["bound", "--family", "parabolic", "--n", "2"]);
    assert!(stdout(&o).contains("48"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(mlab(&["bound", "--family", "triangle", "--n", "2"]).status.code(), Some(2));
    assert_eq!(mlab(&["bound", "--family", "square", "--n", "3"]).status.code(), Some(2));
    assert_eq!(mlab(&["integral", "--family", "elliptic", "--lambda", "5/2", "--i", "0", "--j", "0", "--h", "-1"]).status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    let o = mlab(&["verify", "pf", "--family", "parabolic", "--samples", "50", "--tol", "1e-8"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let o = mlab(&["verify", "recurrence", "--family", "triangle", "--samples", "10"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn zero_perturbation_has_no_zeros() {
    let pert = scratch("zero.json", r#"{"n": 3}"#);
    let o = mlab(&["melnikov", "--family", "triangle", "--pert", pert.to_str().unwrap(), "--grid", "200"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("\"count_sign_changes\": 0"), "{out}");
    assert!(out.contains("\"identically_zero\": true"), "{out}");
}

#[test]
fn csv_is_reproducible() {
    let pert = scratch("one.json", r#"{"n": 3, "plus": {"q": [[0, 1, "1"], [0, 0, "-1/3"]]}, "minus": {"q": [[1, 2, "2"]]}}"#);
    let run = |name: &str| {
        let csv = pert.with_file_name(name);
        let o = mlab(&["melnikov", "--family", "elliptic", "--lambda", "1", "--pert", pert.to_str().unwrap(), "--grid", "300", "--csv", csv.to_str().unwrap()]);
        assert!(o.status.success());
        std::fs::read(csv).unwrap()
    };
    let a = run("a.csv");
    assert!(a.starts_with(b"h,M\n"));
    assert_eq!(a, run("b.csv"));
}
