//! End-to-end tests of the binary: exit codes, byte-deterministic
//! outputs across runs and thread counts, and the table merge.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ubmlab")
}

fn base_config(out_dir: &Path) -> String {
    format!(
        r#"
n_dim = 2
paths = 400
t_max = 1.0
step = 0.002
scheme = "geometric"
master_seed = 7
out_dir = "{}"

[fixture]
r_plus = 1
s_plus = 1

[[moments]]
quantity = "f"
orders = [1, 2]
times = [0.25, 0.5]

[[moments]]
quantity = "mu"
orders = [1]
times = [0.5]

[[checks]]
kind = "jacobi-binomial"
k = 1
t = 0.5

[[checks]]
kind = "moment-ode"
n = 2
t = 0.5
"#,
        out_dir.display()
    )
}

struct Setup {
    _dir: tempfile::TempDir,
    config: PathBuf,
    out: PathBuf,
}

fn setup() -> Setup {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = dir.path().join("suite.toml");
    std::fs::write(&config, base_config(&out)).unwrap();
    Setup {
        config,
        out,
        _dir: dir,
    }
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

#[test]
fn simulate_is_byte_deterministic_across_runs_and_threads() {
    let s = setup();
    let cfg = s.config.to_str().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        for _ in 0..2 {
            let out = run(
                &["simulate", "--config", cfg],
                &[("RAYON_NUM_THREADS", threads)],
            );
            assert!(out.status.success(), "{out:?}");
            outputs.push(std::fs::read(s.out.join("moments.csv")).unwrap());
        }
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let text = String::from_utf8(outputs.pop().unwrap()).unwrap();
    assert!(text.starts_with("quantity,n,N,t,"));
    assert!(!text.contains('\r'), "LF line endings only");
    assert_eq!(text.lines().count(), 1 + 5);
}

#[test]
fn simulate_seed_override_changes_output() {
    let s = setup();
    let cfg = s.config.to_str().unwrap();
    assert!(run(&["simulate", "--config", cfg], &[]).status.success());
    let a = std::fs::read(s.out.join("moments.csv")).unwrap();
    assert!(run(&["simulate", "--config", cfg, "--seed", "8"], &[])
        .status
        .success());
    let b = std::fs::read(s.out.join("moments.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn empty_moment_request_gives_header_only_csv() {
    let s = setup();
    let text = std::fs::read_to_string(&s.config).unwrap();
    let stripped: String = text
        .split("[[moments]]")
        .next()
        .unwrap()
        .to_string();
    std::fs::write(&s.config, stripped).unwrap();
    let out = run(&["simulate", "--config", s.config.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{out:?}");
    let csv = std::fs::read_to_string(s.out.join("moments.csv")).unwrap();
    assert_eq!(csv, "quantity,n,N,t,mean_re,mean_im,se,M,seed\n");
}

#[test]
fn verify_writes_deterministic_report_and_exit_codes() {
    let s = setup();
    let cfg = s.config.to_str().unwrap();
    let out = run(
        &["verify", "--config", cfg, "--paths", "2000"],
        &[("RAYON_NUM_THREADS", "1")],
    );
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let a = std::fs::read(s.out.join("report.json")).unwrap();
    let out = run(
        &["verify", "--config", cfg, "--paths", "2000"],
        &[("RAYON_NUM_THREADS", "4")],
    );
    assert_eq!(out.status.code(), Some(0));
    let b = std::fs::read(s.out.join("report.json")).unwrap();
    assert_eq!(a, b, "report bytes differ across thread counts");
    let json: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(json["pass"], serde_json::Value::Bool(true));
    assert!(json["verdicts"].as_array().unwrap().len() >= 2);

    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS"), "{stdout}");
}

#[test]
fn corrupted_parity_constant_fails_with_exit_1() {
    let s = setup();
    // the corruption swaps the odd/even constants, which only differ on
    // fixtures with α² + β² ≠ 2αβ — use α = 1, β = 0
    let text = std::fs::read_to_string(&s.config)
        .unwrap()
        .replace("r_plus = 1", "r_plus = 2");
    std::fs::write(&s.config, text).unwrap();
    let out = run(
        &[
            "verify",
            "--config",
            s.config.to_str().unwrap(),
            "--paths",
            "2000",
            "--corrupt-parity-constant",
        ],
        &[],
    );
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(s.out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["pass"], serde_json::Value::Bool(false));
}

#[test]
fn bad_config_exits_2() {
    let s = setup();
    std::fs::write(&s.config, "not valid = [toml").unwrap();
    let out = run(&["simulate", "--config", s.config.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    let out = run(&["simulate", "--config", "/nonexistent/x.toml"], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn outdir_env_var_overrides_config() {
    let s = setup();
    let alt = s.out.parent().unwrap().join("alt");
    let out = run(
        &["simulate", "--config", s.config.to_str().unwrap()],
        &[("UBMLAB_OUTDIR", alt.to_str().unwrap())],
    );
    assert!(out.status.success(), "{out:?}");
    assert!(alt.join("moments.csv").exists());
    assert!(!s.out.join("moments.csv").exists());
}

#[test]
fn table_merges_and_appends_analytic_curves() {
    let s = setup();
    let cfg = s.config.to_str().unwrap();
    assert!(run(&["simulate", "--config", cfg], &[]).status.success());
    let moments = s.out.join("moments.csv");
    let out = run(
        &[
            "table",
            "--config",
            cfg,
            "--inputs",
            moments.to_str().unwrap(),
            "--curve-points",
            "5",
        ],
        &[],
    );
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(s.out.join("table.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "quantity,n,N,t,mean_re,mean_im,se,M,seed,analytic_mu,analytic_f1"
    );
    // 5 MC rows + 5 dense mu points + 5 dense f1 points
    assert_eq!(lines.len(), 1 + 5 + 5 + 5);

    // the mu analytic column must equal e^{-t/2} for n = 1
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        if f[0] == "mu" || f[0] == "mu-analytic" {
            let t: f64 = f[3].parse().unwrap();
            let v: f64 = f[9].parse().unwrap();
            assert!((v - (-t / 2.0).exp()).abs() < 1e-12, "{line}");
        }
        // the traceless fixture has ξ = 1, so the f1 curve starts at 1
        if f[0] == "f1-analytic" {
            let t: f64 = f[3].parse().unwrap();
            let v: f64 = f[10].parse().unwrap();
            assert!((v - (-t).exp()).abs() < 1e-12, "{line}");
        }
    }

    // parse diagnostics carry file and line
    let broken = s.out.join("broken.csv");
    std::fs::write(
        &broken,
        "quantity,n,N,t,mean_re,mean_im,se,M,seed\nf,notanumber,2,0,0,0,0,1,7\n",
    )
    .unwrap();
    let out = run(
        &["table", "--config", cfg, "--inputs", broken.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("broken.csv:2"), "{err}");
}
