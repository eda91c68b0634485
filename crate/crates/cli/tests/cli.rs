use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_semiprop"));
    c.env_remove("SEMIPROP_THREADS");
    c
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, v: &serde_json::Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

#[test]
fn run_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().arg("run").arg(scenario("harmonic_oscillator.json")).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("harmonic_oscillator.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,Ksc_re,Ksc_im,Kex_re,Kex_im,abs_err,rel_err,n_traj,config_hash");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!(f.len(), 9);
        assert!(f[6].parse::<f64>().unwrap() < 1e-8);
        assert_eq!(f[8].len(), 64);
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("harmonic_oscillator.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 20);
    assert_eq!(json["rows"][3]["trajectories"].as_array().unwrap().len(), 1);
}

#[test]
fn reruns_are_bit_identical() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "family": { "kind": "spin", "J": [2.0] },
        "hamiltonian": [{ "coeff": [1.0, 0.0], "ops": "Jz Jz" }, { "coeff": [0.3, 0.0], "ops": "J+" }, { "coeff": [0.3, 0.0], "ops": "J-" }],
        "run": { "z_i": [[0.3, 0.2]], "z_f": [[0.1, -0.3]], "t_i": 0.0, "t_f": 0.3, "samples": 4,
                 "seeds": { "strategy": "cloud", "count": 6, "radius": 0.5, "rng_seed": 11 } }
    });
    let p = write_config(cfg_dir.path(), "twist.json", &cfg);
    for dir in [a.path(), b.path()] {
        let o = bin().env("SEMIPROP_THREADS", "2").arg("run").arg(&p).arg("--out-dir").arg(dir).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let x = std::fs::read(a.path().join("twist.csv")).unwrap();
    let y = std::fs::read(b.path().join("twist.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = serde_json::json!({
        "family": { "kind": "canonical", "d": 1, "cutoff": 20 },
        "hamiltonian": [{ "coeff": [1.0, 0.0], "ops": "a† a" }],
        "run": { "z_i": [[0.1, 0.0]], "z_f": [[0.2, 0.0]], "t_i": 0.0, "t_f": 1.0, "samples": 0 }
    });
    let p = write_config(dir.path(), "empty.json", &cfg);
    let o = bin().arg("run").arg(&p).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty time grid"));

    cfg["run"]["samples"] = 2.into();
    cfg["run"]["bogus"] = true.into();
    let p = write_config(dir.path(), "bogus.json", &cfg);
    let o = bin().arg("run").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let o = bin().arg("run").arg(dir.path().join("missing.json")).output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let o = bin().env("SEMIPROP_THREADS", "zero").arg("check").arg("--family").arg("canonical").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn failed_samples_exit_two_with_partial_output() {
    let cfg_dir = tempfile::tempdir().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "family": { "kind": "spin", "J": [5.0] },
        "hamiltonian": [{ "coeff": [1.0, 0.0], "ops": "Jz Jz" }],
        "run": { "z_i": [[0.7, 0.3]], "z_f": [[-0.2, 0.5]], "t_i": 0.0, "t_f": 0.2, "samples": 2,
                 "max_iterations": 1, "seeds": { "strategy": "conjugate", "count": 1, "radius": 0.0, "rng_seed": 0 } }
    });
    let p = write_config(cfg_dir.path(), "hard.json", &cfg);
    let o = bin().arg("run").arg(&p).arg("--out-dir").arg(dir.path()).arg("--tol").arg("1e-14").output().unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("hard.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    // t = 0 needs no iterations; the later sample fails but is still reported.
    assert!(!rows[0].contains("NaN"));
    assert!(rows[1].split(',').nth(1).unwrap() == "NaN");
}

#[test]
fn check_reports_kappa_and_properties() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        let o = bin().arg("check").args(args).arg("--out-dir").arg(dir.path()).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
        stdout(&o)
    };
    let out = run(&["--family", "canonical"]);
    assert!(out.contains("kappa = 1 "), "{out}");
    let out = run(&["--family", "sun", "--n", "3", "--N", "2"]);
    assert!(out.contains("kappa = 3 "), "{out}");
    let out = run(&["--family", "spin", "--J", "1.5"]);
    assert!(out.contains("kappa = 4/3"), "{out}");
    let line = out.lines().find(|l| l.contains("identity resolution")).unwrap();
    assert!(line.starts_with("PASS"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("check_spin.json")).unwrap()).unwrap();
    let ident = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "identity resolution").unwrap();
    assert!(ident["measured"].as_f64().unwrap() < 1e-6);
}
