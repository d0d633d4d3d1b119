use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ebclab::dtn::{dtn_mode_multiplier, DtnKind, Height};
use ebclab::{ball_l2_norm, build_mesh, solve_full};
use ebclab_cli::RunConfig;
use tempfile::TempDir;

fn ebclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ebclab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn repo_config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).to_string_lossy().into_owned()
}

#[test]
fn committed_configs_parse() {
    for name in ["classify.json", "classify_limits.json", "dtn.json", "solve_full.json", "solve_ebc.json", "converge.json", "selftest.json"] {
        RunConfig::load(Path::new(&repo_config(name))).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn classify_reports_family_and_feasibility() {
    let o = ebclab(&["classify", "--config", &repo_config("classify.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["family"]["family"], "DecoupledNeumann");
    assert_eq!(v["feasible"], true);
    assert_eq!(v["case_id"], 1);
}

#[test]
fn classify_infeasible_limits_exits_2_with_reason() {
    let o = ebclab(&["classify", "--config", &repo_config("classify_limits.json")]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["feasible"], false);
    assert!(v["reason"].as_str().unwrap().contains("β = γ²/b"));
}

#[test]
fn malformed_configs_exit_1() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("missing_version.json", r#"{"law": {"scaling": {"c_sigma": 1, "p_sigma": 1, "c_mu": 1, "p_mu": 1}}}"#),
        ("missing_field.json", r#"{"schema_version": 1, "law": {"scaling": {"c_sigma": 1, "p_sigma": 1, "c_mu": 1}}}"#),
        ("unknown_key.json", r#"{"schema_version": 1, "colour": "red"}"#),
        ("nested_unknown.json", r#"{"schema_version": 1, "initial": {"preset": "zero", "x": 1}}"#),
        ("bad_version.json", r#"{"schema_version": 7}"#),
        ("not_json.json", "law = 1"),
    ];
    for (name, text) in cases {
        let p = write_config(&dir, name, text);
        let o = ebclab(&["classify", "--config", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1), "{name}");
    }
    let no_law = write_config(&dir, "no_law.json", r#"{"schema_version": 1}"#);
    assert_eq!(ebclab(&["classify", "--config", no_law.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(ebclab(&["classify"]).status.code(), Some(1));
    assert_eq!(ebclab(&["no-such-command"]).status.code(), Some(1));
}

fn parse_rows(csv: &str) -> Vec<Vec<f64>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("l,lambda,j_combined,j1,j2"));
    lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn dtn_table_rows() {
    let o = ebclab(&["dtn", "--lmax", "0", "--height", "2"]);
    assert_eq!(o.status.code(), Some(0));
    // combined multiplier of the constant mode is 0 (see README)
    assert_eq!(parse_rows(&stdout(&o)), vec![vec![0.0, 0.0, 0.0, -0.5, -0.5]]);

    let o = ebclab(&["dtn", "--lmax", "1", "--height", "inf", "--r1", "1"]);
    let rows = parse_rows(&stdout(&o));
    assert_eq!(rows[1][3], -(2f64.sqrt()));
    assert_eq!(rows[1][4], 0.0);

    let o = ebclab(&["dtn", "--lmax", "6", "--height", "0.7", "--r1", "1.3"]);
    for row in parse_rows(&stdout(&o)) {
        let lam = row[1];
        for (k, col) in [(DtnKind::Combined, 2), (DtnKind::FirstKind, 3), (DtnKind::SecondKind, 4)] {
            let want = dtn_mode_multiplier(k, lam, Height::Finite(0.7)).unwrap() + 0.0;
            assert_eq!(row[col].to_bits(), want.to_bits());
        }
    }

    for h in ["0", "-1", "abc"] {
        assert_eq!(ebclab(&["dtn", "--lmax", "2", "--height", h]).status.code(), Some(1), "{h}");
    }
}

#[test]
fn dtn_reads_config_and_writes_file() {
    let dir = TempDir::new().unwrap();
    let o = ebclab(&["dtn", "--config", &repo_config("dtn.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let file = std::fs::read_to_string(dir.path().join("dtn.csv")).unwrap();
    assert_eq!(file, stdout(&o));
    assert_eq!(parse_rows(&file).len(), 9);
}

const SMALL_FULL: &str = r#"{
  "schema_version": 1,
  "law": {"scaling": {"c_sigma": 2.0, "p_sigma": 1.0, "c_mu": 1.0, "p_mu": 1.0}},
  "k2": 2.0,
  "lmax": 2,
  "time": {"t_final": 0.05, "dt": 0.005, "snapshot_stride": 5},
  "full": {"delta": 0.1}
}"#;

#[test]
fn solve_full_writes_snapshots_and_consistent_summary() {
    let dir = TempDir::new().unwrap();
    let cfg_path = write_config(&dir, "full.json", SMALL_FULL);
    let run = |out: &str| {
        let out = dir.path().join(out);
        let o = ebclab(&["solve-full", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        (out, serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap())
    };
    let (a, summary) = run("a");
    assert_eq!(summary["steps"], 10);
    assert_eq!(summary["modes"], 9);

    let cfg = RunConfig::load(&cfg_path).unwrap();
    let layer = cfg.layer().unwrap();
    let mesh = build_mesh(1.0, 0.1, 2.0, &cfg.mesh).unwrap();
    let u0 = cfg.initial.build(cfg.lmax, 2.0).unwrap();
    let f = cfg.forcing.build(2.0).unwrap();
    let set = solve_full(&layer, &mesh, u0.as_ref(), f.as_ref(), &cfg.time).unwrap();
    assert_eq!(summary["final_l2_norm"].as_f64().unwrap(), ball_l2_norm(&set, 0.05).unwrap());

    // determinism: identical snapshot files on a re-run
    let (b, _) = run("b");
    let mut names: Vec<_> = std::fs::read_dir(a.join("snapshots")).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 9);
    for n in names {
        let x = std::fs::read(a.join("snapshots").join(&n)).unwrap();
        let y = std::fs::read(b.join("snapshots").join(&n)).unwrap();
        assert_eq!(x, y, "{n:?}");
    }
    assert!(a.join("summary.json").exists());
}

#[test]
fn zero_data_gives_zero_snapshots() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "zero.json",
        r#"{"schema_version": 1, "lmax": 1, "initial": {"preset": "single_mode", "l": 1, "m": 0, "amplitude": 0.0},
            "forcing": {"preset": "zero"}, "time": {"t_final": 0.02, "dt": 0.01},
            "ebc": {"family": "RobinContact", "b": 2.0}}"#,
    );
    let out = dir.path().join("out");
    for cmd in ["solve-ebc"] {
        let o = ebclab(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let csv = std::fs::read_to_string(out.join("snapshots/mode_l1_m0.csv")).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("l,m,t,r,value"));
        for line in lines {
            let v: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
            assert_eq!(v, 0.0);
        }
    }
}

#[test]
fn solve_ebc_derives_family_from_law() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = ebclab(&["solve-ebc", "--config", write_config(&dir, "f.json", SMALL_FULL).to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["problem"]["family"], "RobinContact");
    assert_eq!(v["problem"]["b"], 2.0);
}

#[test]
fn converge_writes_requested_formats() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"schema_version": 1,
            "law": {"scaling": {"c_sigma": 2.0, "p_sigma": 1.0, "c_mu": 1.0, "p_mu": 1.0}},
            "deltas": [0.1, 0.05, 0.025, 0.0125], "k2": 2.0, "lmax": 2,
            "time": {"t_final": 0.1, "dt": 0.002, "snapshot_stride": 5},
            "mesh": {"n_inner": 32, "n_layer": 16, "n_outer": 32}}"#,
    );
    let out = dir.path().join("out");
    let o = ebclab(&["converge", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--json", "--csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    let errors: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(errors.len(), 4);
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(out.join("convergence.json").exists());
    assert!(std::fs::read_to_string(out.join("convergence.gp")).unwrap().contains("convergence.csv"));
}

#[test]
fn converge_infeasible_exits_2_before_solving() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = ebclab(&["converge", "--config", &repo_config("classify_limits.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn selftest_passes_and_detects_perturbed_dtn_sign() {
    let o = ebclab(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).matches("[PASS]").count(), 6);

    let o = ebclab(&["selftest", "--inject-fault", "dtn-sign"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("[FAIL] dtn symmetry"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dtn symmetry"));
}
