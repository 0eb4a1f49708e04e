use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn fieldcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fieldcheck")).args(args).output().expect("spawn fieldcheck")
}

fn run(cmd: &str, path: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--scenario", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    fieldcheck(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_tmp(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn verify_passes_with_exit_zero() {
    let out = run("verify", &scenario("oscillating-monopole"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["schema"], "fieldcheck/report/v1");
    assert_eq!(report["conditions"].as_array().unwrap().len(), 3);
}

#[test]
fn mismatched_ladder_exits_one() {
    let out = run("verify", &scenario("mismatch"), &["--format", "text"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn coarse_convergence_is_flagged() {
    let out = run("convergence", &scenario("convergence-coarse"), &["--format", "text"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("NOT CONVERGED"));
}

#[test]
fn missing_section_exits_two() {
    let out = run("flux", &scenario("static-charge"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("flux"));
}

#[test]
fn missing_omega_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(
        &dir,
        "bad.json",
        r#"{"schema":"fieldcheck/scenario/v1","name":"bad","theory":"scalar",
            "source":{"kind":"oscillating_monopole","amplitude":1,"radius":0.1},
            "orientation":"retarded","ladder":{"directions":[[0,0,1]]}}"#,
    );
    let out = run("verify", &p, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("`source`") && err.contains("omega"), "{err}");
}

#[test]
fn unknown_key_and_missing_file_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(
        &dir,
        "typo.json",
        r#"{"schema":"fieldcheck/scenario/v1","name":"t","theory":"scalar",
            "source":{"kind":"static_monopole","charge":1,"radius":0.1},
            "orientation":"retarded","ladder":{"directions":[[0,0,1]],"rung":3}}"#,
    );
    let out = run("verify", &p, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ladder.rung"));

    let out = run("verify", &dir.path().join("absent.json"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn inside_support_sample_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(
        &dir,
        "inside.json",
        r#"{"schema":"fieldcheck/scenario/v1","name":"inside","theory":"scalar",
            "source":{"kind":"static_monopole","charge":1,"radius":0.1},
            "orientation":"retarded","ladder":{"directions":[[0,0,1]]},
            "sample":{"what":"gradient","radii":[0.05],"time":0.5}}"#,
    );
    let out = run("sample", &p, &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr(&out);
    assert!(err.contains("inside") && err.contains("t=0.5") && err.contains("z=0.05"), "{err}");
}

#[test]
fn psi_sample_shape() {
    let out = run("sample", &scenario("monopole-psi"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,psi"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.split(',').count() == 2));
}

#[test]
fn sample_rejects_json_format() {
    let out = run("sample", &scenario("monopole-psi"), &["--format", "json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let path = scenario("dipole-plus-charge");
    let a = run("charge", &path, &["--threads", "1"]);
    let b = run("charge", &path, &["--threads", "3"]);
    let c = Command::new(env!("CARGO_BIN_EXE_fieldcheck"))
        .args(["charge", "--scenario", path.to_str().unwrap()])
        .env("FIELDCHECK_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("charge.csv");
    let out = run("charge", &scenario("static-charge"), &["--format", "csv", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(target).unwrap();
    assert_eq!(text.lines().next(), Some("radius,time,charge"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn large_source_warns_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(
        &dir,
        "big.json",
        r#"{"schema":"fieldcheck/scenario/v1","name":"big","theory":"scalar",
            "source":{"kind":"oscillating_monopole","amplitude":1,"omega":10,"radius":0.1},
            "orientation":"retarded","ladder":{"directions":[[0,0,1]],"r0":20,"rungs":5,"u0":0.1},
            "quadrature":{"radial":8,"polar":8,"azimuthal":16}}"#,
    );
    let out = run("verify", &p, &[]);
    assert!(stderr(&out).contains("omega*a = 1"), "{}", stderr(&out));
}
