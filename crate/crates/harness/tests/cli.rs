use std::path::Path;
use std::process::Command;

use labeling_harness::exit;

fn labeling(out: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_labeling"))
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.display().to_string()
}

const TABLE: &str = r#"{"n": 256, "m": "2n", "adversary": {"name": "table-prefix", "profile": "desk"}, "algorithm": "pma"}"#;

#[test]
fn run_writes_artifacts_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "table.json", TABLE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = labeling(out, &["run", "--config", &cfg, "--seed", "5"]);
        assert_eq!(o.status.code(), Some(exit::OK), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["steps.csv", "record.csv", "record.json", "audit.json", "summary.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty(), "{f} is empty");
        assert_eq!(x, std::fs::read(b.join(f)).unwrap(), "{f} differs between identical runs");
    }
    let steps = std::fs::read_to_string(a.join("steps.csv")).unwrap();
    assert_eq!(steps.lines().next().unwrap(), "t,y_t,num_relocated,busy_lo,busy_hi,disconnected,chi_t");
    assert_eq!(steps.lines().count(), 257);
}

#[test]
fn audit_reproduces_the_run_audit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "table.json", TABLE);
    let run = dir.path().join("run");
    assert_eq!(labeling(&run, &["run", "--config", &cfg]).status.code(), Some(0));
    let again = dir.path().join("again");
    let record = run.join("record.csv").display().to_string();
    let o = labeling(&again, &["audit", "--record", &record]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(run.join("audit.json")).unwrap(), std::fs::read(again.join("audit.json")).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let bad = write(dir.path(), "bad.json", r#"{"n": 10, "m": 5, "adversary": {"name": "bisect"}, "algorithm": "pma"}"#);
    assert_eq!(labeling(&out, &["run", "--config", &bad]).status.code(), Some(exit::CONFIG));

    let table = write(dir.path(), "table.json", TABLE);
    let paper = labeling(&out, &["--profile", "paper", "run", "--config", &table]);
    assert_eq!(paper.status.code(), Some(exit::CONFIG));

    // Adjacent preloaded keys leave no gap to bisect.
    let stuck = write(
        dir.path(),
        "stuck.json",
        r#"{"n": 1, "m": 8, "initial_keys": {"count": 3, "spacing": 1}, "adversary": {"name": "bisect"}, "algorithm": "pma"}"#,
    );
    assert_eq!(labeling(&out, &["run", "--config", &stuck]).status.code(), Some(exit::STUCK));

    let full = write(dir.path(), "full.json", r#"{"n": 6, "m": 24, "r": "2^40", "adversary": {"name": "densest-gap"}, "algorithm": "ak:k=1"}"#);
    assert_eq!(labeling(&out, &["run", "--config", &full]).status.code(), Some(exit::CAPACITY));

    let missing = dir.path().join("nope.json").display().to_string();
    assert_eq!(labeling(&out, &["run", "--config", &missing]).status.code(), Some(exit::OTHER));
}

#[test]
fn sweep_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"n": 1, "m": "2n", "adversary": {"name": "table-prefix", "profile": "desk"}, "algorithm": "pma", "repetitions": 2}"#,
    );
    let out = dir.path().join("out");
    let o = labeling(&out, &["sweep", "--grid", "2^7,2^8,2^9", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    let input = out.join("sweep.csv").display().to_string();
    let f = labeling(&out, &["fit", "--input", &input]);
    assert_eq!(f.status.code(), Some(0), "{}", String::from_utf8_lossy(&f.stderr));
    let fit: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(fit["points"].as_array().unwrap().len(), 6);

    let single = labeling(&out, &["sweep", "--grid", "128", "--config", &cfg]);
    assert_eq!(single.status.code(), Some(exit::CONFIG));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "direct.json", r#"{"n": 20, "m": 20, "r": 20, "adversary": {"name": "random"}, "algorithm": "direct"}"#);
    let env_out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_labeling"))
        .env("LABELING_OUT_DIR", &env_out)
        .args(["run", "--config", &cfg])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env_out.join("summary.json").exists());
}
