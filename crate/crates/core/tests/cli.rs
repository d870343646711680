use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fejerquant(args: &[&str], config: Option<&str>, dir: &Path) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fejerquant"));
    cmd.args(args).env("FEJERQUANT_OUT", dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.json");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_jsonl() {
    let dir = tempfile::tempdir().unwrap();
    let o = fejerquant(
        &["run", "--horizon", "100", "--csv"],
        Some(r#"{"problem": "dc-abs-1d"}"#),
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(dir.path().join("out/trace.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 101);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["x"], serde_json::json!([2.0]));
    assert!(dir.path().join("out/trace.csv").exists());
}

#[test]
fn moduli_eval_prints_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let o = fejerquant(
        &["moduli-eval"],
        Some(r#"{"modulus": "kappa", "k": 0, "M": 1, "B": 1}"#),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "71");
}

#[test]
fn check_lemmas_is_sound() {
    let dir = tempfile::tempdir().unwrap();
    let o = fejerquant(
        &["check-lemmas"],
        Some(r#"{"problem": "dc-abs-1d"}"#),
        dir.path(),
    );
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    for name in [
        "quasi-fejer",
        "approx-error",
        "uniform-closedness",
        "conversion-F1",
    ] {
        assert!(
            out.lines()
                .any(|l| l.starts_with(name) && l.contains(" yes ")),
            "{name}: {out}"
        );
    }
    let certs: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("out/certificates.json")).unwrap(),
    )
    .unwrap();
    assert!(certs
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["certificate"]["sound"] == true));
}

#[test]
fn failures_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fejerquant(&["run"], Some(r#"{"problem": "nonexistent"}"#), dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = fejerquant(
        &["run"],
        Some(r#"{"problem": "dc-abs-1d", "horizn": 3}"#),
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = fejerquant(&["unknown-task"], None, dir.path());
    assert_eq!(o.status.code(), Some(2));

    // phi = 0 gives Psi = 0, but from x0 = 0.7 the first metastable window starts at 1
    let o = fejerquant(
        &["certify-metastability"],
        Some(
            r#"{"problem": "dc-abs-1d", "x0": [0.7], "horizon": 50, "k": 3, "phi_search": {"kind": "affine", "ck": 0, "cn": 0, "c": 0}}"#,
        ),
        dir.path(),
    );
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}{}",
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn dumped_config_reproduces_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"problem": "dc-abs-1d", "x0": [0.7], "horizon": 2000, "ks": [0, 1]}"#;
    let first = fejerquant(&["certify-metastability"], Some(cfg), dir.path());
    assert_eq!(first.status.code(), Some(0), "{}", stdout(&first));
    let a = fs::read_to_string(dir.path().join("out/certificates.json")).unwrap();

    let dump = fejerquant(
        &["certify-metastability", "--dump-config"],
        Some(cfg),
        dir.path(),
    );
    assert_eq!(dump.status.code(), Some(0));
    let again = fejerquant(&["certify-metastability"], Some(&stdout(&dump)), dir.path());
    assert_eq!(again.status.code(), Some(0));
    let b = fs::read_to_string(dir.path().join("out/certificates.json")).unwrap();
    assert_eq!(a, b);
}
