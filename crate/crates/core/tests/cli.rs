use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feynparts"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = "[run]\ngrid = 64\npaths = 4000\n\n[verify]\nconfigs = 3\n";

#[test]
fn help_and_version_exit_zero() {
    let h = run(&["--help"]);
    assert_eq!(h.status.code(), Some(0));
    let text = String::from_utf8(h.stdout).unwrap();
    for cmd in ["covariance", "feynman", "gfft", "verify"] {
        assert!(text.contains(cmd), "{text}");
    }
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn covariance_csv_has_a_row_per_time_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = run(&["covariance", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,t,empirical,expected,se,pass"));
    assert_eq!(lines.count(), 16);
}

#[test]
fn out_dir_receives_named_documents() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out_dir = dir.path().join("reports");
    let od = out_dir.to_str().unwrap();
    for (cmd, file) in [
        ("feynman", "feynman.json"),
        ("gfft", "gfft.json"),
        ("verify", "verify.csv"),
    ] {
        let mut args = vec![cmd, "--config", &cfg, "--out", od];
        if file.ends_with(".csv") {
            args.push("--csv");
        }
        let o = run(&args);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(o.stdout.is_empty(), "{cmd} wrote to stdout with --out");
        assert!(!o.stderr.is_empty());
        let body = std::fs::read_to_string(out_dir.join(file)).unwrap();
        if file.ends_with(".json") {
            serde_json::from_str::<serde_json::Value>(&body).unwrap();
        } else {
            assert!(body.starts_with("name,lhs_re,lhs_im,rhs_re,rhs_im,abs_gap,rel_gap,tol,pass,seed\n"));
        }
    }
}

#[test]
fn feynman_report_contains_the_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let out = run(&["feynman", "--config", &cfg, "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let examples = v["examples"].as_array().unwrap();
    assert!(!examples.is_empty());
    for e in examples {
        match e["name"].as_str().unwrap() {
            "gaussian_q1" => assert!(e["rel_gap"].as_f64().unwrap() <= 1e-12),
            "epsilon_approach" => assert!(e["rel_gap"].as_f64().unwrap() <= 1e-8),
            "sign_invariance" => assert_eq!(e["equal"], true),
            other => panic!("unexpected example {other}"),
        }
    }
    assert!(!v["closed_form"].as_array().unwrap().is_empty());
}

#[test]
fn seed_flag_overrides_config_and_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    let a = run(&["covariance", "--config", &cfg, "--seed", "3"]);
    let b = run(&["covariance", "--config", &cfg, "--seed", "3"]);
    let c = run(&["covariance", "--config", &cfg, "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.toml", SMALL);
    assert_eq!(run(&["verify", "--config", &cfg]).status.code(), Some(0));
    assert_eq!(
        run(&["verify", "--config", &cfg, "--corrupt", "swapped-weight"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["feynman", "--corrupt"]).status.code(), Some(1));
    assert_eq!(
        run(&["verify", "--config", "/nonexistent/run.toml"]).status.code(),
        Some(1)
    );
    let unknown = write(dir.path(), "u.toml", "[verify]\nonly = [\"nope\"]\n");
    assert_eq!(run(&["verify", "--config", &unknown]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    let bad_kernel = write(
        dir.path(),
        "k.toml",
        "[functional]\nkernel = \"term(1, [1; -1; 0], [1; 0; 0])\"\n",
    );
    assert_eq!(run(&["gfft", "--config", &bad_kernel]).status.code(), Some(1));
}

#[test]
fn covariance_can_dump_the_ensemble() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("paths.bin");
    let body = format!(
        "[run]\ngrid = 8\npaths = 5\nseed = 9\ndump = {:?}\n",
        dump.to_str().unwrap()
    );
    let cfg = write(dir.path(), "d.toml", &body);
    let out = run(&["covariance", "--config", &cfg]);
    assert!(
        out.status.code().is_some_and(|c| c != 1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let bytes = std::fs::read(&dump).unwrap();
    assert_eq!(bytes.len(), 32 + 5 * 9 * 8);
    assert_eq!(&bytes[..8], b"FPPATHS1");
    let ens = feynparts::paths::PathEnsemble::read_dump(&bytes[..], 1.0).unwrap();
    let again = feynparts::paths::sample_brownian(feynparts::paths::Grid::new(8, 1.0).unwrap(), 5, 9).unwrap();
    for m in 0..5 {
        assert_eq!(ens.values(m), again.values(m));
    }
}
