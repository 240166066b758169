use std::path::Path;
use std::process::{Command, Output};

fn qecsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qecsim"))
        .args(args)
        .current_dir(dir)
        .env("QECSIM_WORKERS", "2")
        .output()
        .expect("spawn qecsim")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate",
        "--code",
        "surface17",
        "--values",
        "0.002,0.004",
        "--trials",
        "300",
    ];
    let a = qecsim(dir.path(), &[&args[..], &["-o", "a.csv"]].concat());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = qecsim(dir.path(), &[&args[..], &["-o", "b.csv"]].concat());
    assert!(b.status.success());
    let ta = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let tb = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(ta, tb);
    let lines: Vec<&str> = ta.lines().collect();
    assert_eq!(
        lines[0],
        "p,p_logical,stderr,trials,rounds,code,seed,param,comparator,digest"
    );
    assert_eq!(lines.len(), 3);
    let digest = lines[1].rsplit(',').next().unwrap();
    assert_eq!(digest.len(), 16);
    assert!(lines[2].ends_with(digest));
    assert!(lines[1].starts_with("0.002,"));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str| {
        Command::new(env!("CARGO_BIN_EXE_qecsim"))
            .args([
                "simulate",
                "--values",
                "0.003",
                "--trials",
                "200",
                "--sampler",
                "direct",
            ])
            .current_dir(dir.path())
            .env("QECSIM_WORKERS", workers)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn empty_sweep_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"sweep": {"values": []}}"#).unwrap();
    let o = qecsim(dir.path(), &["--config", "cfg.json", "simulate", "-o", "out.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.values is empty"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.json"), r#"{"code": "surface17", "typo": 1}"#).unwrap();
    assert_eq!(
        qecsim(dir.path(), &["--config", "bad.json", "simulate"]).status.code(),
        Some(1)
    );
    assert_eq!(
        qecsim(dir.path(), &["--config", "missing.json", "simulate"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        qecsim(dir.path(), &["simulate", "--code", "steane"]).status.code(),
        Some(1)
    );
    assert_eq!(
        qecsim(dir.path(), &["simulate", "--values", "2"]).status.code(),
        Some(1)
    );
    assert_eq!(qecsim(dir.path(), &["simulate", "--bogus"]).status.code(), Some(1));
    assert_eq!(qecsim(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"code": "surface17", "sampler": {"trials": 200}, "sweep": {"values": [0.001]}}"#,
    )
    .unwrap();
    let o = qecsim(dir.path(), &["--config", "cfg.json", "simulate", "--values", "0.005"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!(row.starts_with("0.005,"));
    assert!(row.contains(",surface17,"));
}

#[test]
fn sweep_log_spaced() {
    let dir = tempfile::tempdir().unwrap();
    let o = qecsim(
        dir.path(),
        &[
            "sweep", "--from", "0.001", "--to", "0.01", "--points", "3", "--trials", "100",
        ],
    );
    assert!(o.status.success());
    let out = stdout(&o);
    let ps: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ps.len(), 3);
    assert!((ps[1] - 10f64.powf(-2.5)).abs() < 1e-12);
    let o = qecsim(
        dir.path(),
        &["sweep", "--from", "0.001", "--to", "0.01", "--points", "0"],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn ftcheck_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = qecsim(dir.path(), &["ftcheck", "--tables", "tables.txt"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).contains("baconshor13 order=gauge basis=z"));
    assert!(stdout(&ok).lines().all(|l| l.ends_with("failures=0")));
    let tables = std::fs::read_to_string(dir.path().join("tables.txt")).unwrap();
    assert!(tables.starts_with("# code baconshor13"));

    let s17 = qecsim(dir.path(), &["ftcheck", "--code", "surface17"]);
    assert_eq!(s17.status.code(), Some(0));

    let bad = qecsim(dir.path(), &["ftcheck", "--naive"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("fail location="));

    let big = qecsim(dir.path(), &["ftcheck", "--code", "baconshor5"]);
    assert_eq!(big.status.code(), Some(1));
}

#[test]
fn times_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = qecsim(dir.path(), &["times", "--all"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0][2], "serial");
        assert_eq!(pair[1][2], "parallel");
        let total = |r: &Vec<&str>| r[6].parse::<f64>().unwrap();
        assert!(total(&pair[1]) <= total(&pair[0]));
        assert_eq!(pair[0][9], "100.0");
    }
}

#[test]
fn timed_circuit_file_feeds_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let o = qecsim(
        dir.path(),
        &["times", "--code", "surface17", "--circuit-out", "s17.circ"],
    );
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("s17.circ")).unwrap();
    assert!(text.starts_with("qubits 17\n"));
    assert!(text.contains(" xx "));
    let o = qecsim(
        dir.path(),
        &[
            "simulate",
            "--code",
            "surface17",
            "--circuit",
            "s17.circ",
            "--model",
            "iontrap",
            "--param",
            "p_xx",
            "--values",
            "0.01",
            "--trials",
            "100",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);

    std::fs::write(dir.path().join("broken.circ"), "qubits 17\n0 xx 3\n").unwrap();
    let o = qecsim(
        dir.path(),
        &["simulate", "--code", "surface17", "--circuit", "broken.circ"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn anneal_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "anneal",
        "--objective",
        "SA",
        "--anneal-seed",
        "5",
        "--proposals",
        "3000",
    ];
    let a = qecsim(
        dir.path(),
        &[&args[..], &["-o", "a.txt", "--trace", "trace.csv"]].concat(),
    );
    assert!(a.status.success());
    let b = qecsim(dir.path(), &[&args[..], &["-o", "b.txt"]].concat());
    assert!(b.status.success());
    let arr = std::fs::read_to_string(dir.path().join("a.txt")).unwrap();
    assert_eq!(arr, std::fs::read_to_string(dir.path().join("b.txt")).unwrap());
    let order: Vec<usize> = arr.split_whitespace().map(|w| w.parse().unwrap()).collect();
    assert_eq!(order.len(), 13);
    // SA keeps data and ancilla ions in contiguous groups.
    assert!(order[..9].iter().all(|&q| q < 9) && order[9..].iter().all(|&q| q >= 9));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("proposal,current,best\n"));
    assert!(trace.lines().count() > 10);
}

#[test]
fn sidecar_log_only() {
    let dir = tempfile::tempdir().unwrap();
    let o = qecsim(dir.path(), &["--log", "run.log", "times"]);
    assert!(o.status.success());
    assert!(!stdout(&o).contains("unix="));
    let log = std::fs::read_to_string(dir.path().join("run.log")).unwrap();
    assert!(log.starts_with("unix=") && log.contains("cmd=times") && log.contains("status=ok"));
}
