use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rcds_sim::harness::{run_experiment, sweep, SweepParam};
use rcds_sim::{ExperimentConfig, Table};

const SMALL: &[&str] = &["--n", "60", "--k", "6", "--trials", "3", "--eta_grid", "1.5,2.0"];

fn rcds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcds")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = rcds(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (c1, c2, g1, g2) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("a.svg"), dir.path().join("b.svg"));
    for (csv, svg) in [(&c1, &g1), (&c2, &g2)] {
        let mut args = vec!["run", "--csv", s(csv), "--svg", s(svg)];
        args.extend_from_slice(SMALL);
        ok(&args);
    }
    assert_eq!(fs::read(&c1).unwrap(), fs::read(&c2).unwrap());
    assert_eq!(fs::read(&g1).unwrap(), fs::read(&g2).unwrap());
    let csv = fs::read_to_string(&c1).unwrap();
    assert!(fs::read_to_string(&g1).unwrap().starts_with("<svg"));

    // A different seed changes the numbers.
    let mut args = vec!["run", "--seed", "2"];
    args.extend_from_slice(SMALL);
    assert_ne!(ok(&args), csv);

    // The echoed configuration reproduces the table.
    let table = Table::from_csv(&csv).unwrap();
    assert_eq!(table.rows.len(), 2);
    let cfg_path = dir.path().join("echo.cfg");
    let echoed: String = table.config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    fs::write(&cfg_path, echoed).unwrap();
    assert_eq!(ok(&["run", "--config", s(&cfg_path)]), csv);

    // Charts can be re-rendered from the CSV alone.
    let g3 = dir.path().join("c.svg");
    ok(&["chart", "--input", s(&c1), "--output", s(&g3)]);
    assert_eq!(fs::read(&g1).unwrap(), fs::read(&g3).unwrap());
}

#[test]
fn library_and_binary_agree() {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text("n = 60\nk = 6\ntrials = 3\neta_grid = 1.5,2.0\n").unwrap();
    let mut args = vec!["run"];
    args.extend_from_slice(SMALL);
    assert_eq!(ok(&args), run_experiment(&cfg).unwrap().to_csv().unwrap());
}

#[test]
fn sweeps_emit_one_row_per_value_and_eta() {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text("n = 60\nk = 6\ntrials = 2\neta_grid = 1.5,2.0\n").unwrap();
    let table = sweep(&cfg, SweepParam::C2, &[10.0, 40.0]).unwrap();
    assert_eq!(table.rows.len(), 4);
    assert_eq!(table.rows.iter().map(|r| r.c2).collect::<Vec<_>>(), [10, 10, 40, 40]);
    assert_eq!(table.config_value("sweep"), Some("c2"));
    for r in &table.rows {
        assert!(r.ps_lo <= r.ps && r.ps <= r.ps_hi);
        assert!(r.successes <= r.samples);
    }
    let eta = sweep(&cfg, SweepParam::Eta, &[1.0, 1.25, 1.5]).unwrap();
    assert_eq!(eta.rows.iter().map(|r| r.eta).collect::<Vec<_>>(), [1.0, 1.25, 1.5]);

    let mut args = vec!["sweep", "--param", "c1", "--values", "3,5"];
    args.extend_from_slice(&["--n", "60", "--k", "6", "--trials", "2", "--eta_grid", "2"]);
    let csv = ok(&args);
    assert_eq!(Table::from_csv(&csv).unwrap().rows.len(), 2);
}

#[test]
fn topology_storage_and_trace_commands() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("g.txt");
    ok(&["topology", "dump", "--n", "60", "--output", s(&topo)]);
    let summary = ok(&["topology", "load", "--input", s(&topo)]);
    assert!(summary.starts_with("n=60 ") && summary.contains("connected=true"), "{summary}");

    let store = dir.path().join("s.txt");
    ok(&["storage", "-q", "--n", "60", "--k", "6", "--trial", "2", "--output", s(&store)]);
    let text = fs::read_to_string(&store).unwrap();
    let out = rcds_sim::formats::storage::read_storage(&text).unwrap();
    assert!(out.audit().unwrap());
    assert_eq!(out.storage.len(), 60);

    let trace = dir.path().join("t.txt");
    ok(&["trace", "record", "-q", "--n", "60", "--k", "6", "--output", s(&trace)]);
    // C1 = 5 at n = 60: ceil(5 * 60 * ln 60) = 1229.
    let report = ok(&["trace", "replay", "--input", s(&trace), "--threshold", "1229"]);
    assert!(report.contains("violations=0"), "{report}");
    assert!(!rcds(&["trace", "replay", "--input", s(&trace), "--threshold", "100000"]).status.success());
}

#[test]
fn exit_codes() {
    // Configuration errors.
    assert_eq!(rcds(&["run", "--k", "0"]).status.code(), Some(2));
    assert_eq!(rcds(&["run", "--n", "30", "--k", "29"]).status.code(), Some(2));
    assert_eq!(rcds(&["run", "--epsilon", "1.5"]).status.code(), Some(2));
    assert_eq!(rcds(&["run", "--radius", "0.01", "--n", "30", "--k", "2"]).status.code(), Some(2));
    assert_eq!(rcds(&["sweep", "--param", "zeta", "--values", "1"]).status.code(), Some(2));
    // Usage errors come from the argument parser.
    assert_eq!(rcds(&["run", "--bogus"]).status.code(), Some(2));
    // Missing files.
    assert_eq!(rcds(&["chart", "--input", "/nonexistent.csv", "--output", "/tmp/x.svg"]).status.code(), Some(1));
    // Malformed config file.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "n = 40\nk = 4\nnot a pair\n").unwrap();
    assert_eq!(rcds(&["run", "--config", s(&cfg)]).status.code(), Some(2));
    // The abort guard maps to its own code.
    let aborted = rcds_sim::SimError::Core(rcds_core::Error::Aborted {
        phase: "precoding",
        rounds: 1,
    });
    assert_eq!(aborted.exit_code(), 3);
}
