use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pst::export::read_trace_csv;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn network(name: &str) -> String {
    root().join("networks").join(name).display().to_string()
}

fn recipe(name: &str) -> String {
    root().join("recipes").join(name).display().to_string()
}

fn pst(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pst")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn peak_value(text: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with("peak P(")).unwrap();
    line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn two_spin_simulate_reaches_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = pst(&["run", "--recipe", &recipe("two_spin.toml"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(peak_value(&stdout(&o)) >= 1.0 - 1e-6);
    let table = read_trace_csv(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(table.times.len(), 40);
    for row in &table.rows {
        let total: f64 = row.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(row.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
    }
}

#[test]
fn missing_network_is_validation_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = pst(&[
        "--network",
        "/nonexistent/net.toml",
        "simulate",
        "--pair",
        "A,B",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read"));
    assert!(!out.exists());
}

#[test]
fn validation_errors_exit_one() {
    let net = network("chain3.toml");
    for args in [
        vec!["--network", &net, "simulate", "--pair", "A,C"],
        vec!["--network", &net, "simulate", "--pair", "A,Q"],
        vec!["--network", &net, "simulate", "--pair", "A,B", "--tau-mix", "-1"],
        vec!["--network", &net, "relay", "--path", "A"],
        vec!["--network", &net, "relay", "--path", "A,C"],
        vec!["--network", &net, "simulate", "--pair", "A,B", "--out", "/nonexistent/dir/x.csv"],
        vec!["simulate", "--pair", "A,B"],
        vec!["--network", &net, "bogus"],
    ] {
        let o = pst(&args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn baseline_zero_duration_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.csv");
    let net = network("two_spin.toml");
    let o = pst(&["--network", &net, "baseline", "--start", "A", "--duration", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().nth(1), Some("time_s,site_0,site_1"));
}

#[test]
fn two_spin_baseline_equals_filtered() {
    // With one pair there is nothing to filter: sampled at the cycle ends,
    // the mix/free trace is the XY trace at the accumulated mixing time.
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let net = network("two_spin.toml");
    let o = pst(&["--network", &net, "simulate", "--pair", "A,B", "--tau-mix", "2.5e-4", "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = pst(&[
        "--network", &net, "baseline", "--start", "A", "--duration", "0.01", "--dt", "2.5e-4", "--out",
        b.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let ta = read_trace_csv(&std::fs::read_to_string(a).unwrap()).unwrap();
    let tb = read_trace_csv(&std::fs::read_to_string(b).unwrap()).unwrap();
    assert_eq!(ta.rows.len(), tb.rows.len());
    for (x, y) in ta.rows.iter().flatten().zip(tb.rows.iter().flatten()) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn relay_on_chain_reports_product() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let sched = dir.path().join("r.toml");
    let net = network("chain3.toml");
    let o = pst(&[
        "--network", &net, "relay", "--path", "A,B,C", "--tau-mix", "1e-3", "--out",
        out.to_str().unwrap(), "--schedule-out", sched.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = stdout(&o);
    let value = |key: &str| -> f64 {
        let l = text.lines().find(|l| l.starts_with(key)).unwrap();
        l.rsplit('=').next().unwrap().trim().parse().unwrap()
    };
    assert_eq!(text.lines().filter(|l| l.contains(" -> ")).count(), 2);
    assert!((value("end-to-end fidelity") - value("product of hop fidelities")).abs() < 1e-6);
    let dump = std::fs::read_to_string(sched).unwrap();
    assert_eq!(dump.matches("[[hops]]").count(), 2);
}

#[test]
fn schedule_dump_parses() {
    let o = pst(&["run", "--recipe", &recipe("timing_3_88ms.toml")]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("tau_free = 3.879728e-3 s (n = 8)"), "{text}");
    let toml_part = &text[text.find("repetitions").unwrap()..];
    let s = pst::export::parse_schedule(toml_part).unwrap();
    assert_eq!(s.segments.len(), 2);
}

#[test]
fn dump_operator_writes_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("ops.txt");
    let net = network("chain3.toml");
    let o = pst(&["--network", &net, "--dump-operator", dump.to_str().unwrap(), "average-hamiltonian"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = std::fs::read_to_string(dump).unwrap();
    assert!(text.starts_with("# operator average; basis=full; dim=8"));
    assert!(stdout(&o).contains("max |H_avg - 0.5 H_XY|"));
}

#[test]
fn optimize_prefers_first_harmonic_on_pair() {
    let net = network("two_spin.toml");
    let o = pst(&["--network", &net, "optimize", "--pair", "A,B", "--n-max", "3", "--tau-mix", "2.5e-4"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = stdout(&o);
    assert!(text.contains("best: n = 1,"), "{text}");
}

#[test]
fn triad_recipe_finds_double_resonance() {
    let o = pst(&["run", "--recipe", &recipe("triad_cb_cg_cd2.toml")]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("(n = 8,1)"));
}

#[test]
fn help_exits_zero() {
    let o = pst(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("simulate"));
}
