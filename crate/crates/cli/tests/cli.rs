use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gwrm_core::GwrmConfig;
use serde_json::Value;

fn gwrm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gwrm")).args(args).output().expect("spawn gwrm")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn modes_estimate() {
    let out = gwrm(&["modes", "--extrema", "2", "--epsilon", "0.001"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["k_a"], 8);
}

#[test]
fn lle_at_robertson_start_is_neutral() {
    let out = gwrm(&["lle", "--problem", "robertson", "--at", "0", "--state", "1,0,0"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let eigs: Vec<(f64, f64)> = v["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|z| (z[0].as_f64().unwrap(), z[1].as_f64().unwrap()))
        .collect();
    assert_eq!(eigs, vec![(0.0, 0.0), (0.0, 0.0), (-0.04, 0.0)]);
    assert_eq!(v["classification"], "neutral");
}

#[test]
fn steepness_of_a_sampled_line_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("line.csv");
    let rows: String = (0..=20).map(|i| format!("{},{}\n", 0.1 * i as f64, 3.0 - 0.25 * i as f64)).collect();
    fs::write(&csv, format!("t,u\n{rows}")).unwrap();
    let out = gwrm(&["steepness", "--input", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let s = stdout_json(&out)["s"].as_f64().unwrap();
    assert!((s - 1.0).abs() < 1e-12, "S = {s}");
}

#[test]
fn usage_errors_exit_one() {
    let out = gwrm(&["solve", "--problem", "vanderpol"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["robertson", "lorenz84", "linear"] {
        assert!(err.contains(name), "registry listing missing {name}: {err}");
    }
    assert_eq!(code(&gwrm(&["solve"])), 1);
    assert_eq!(code(&gwrm(&["solve", "--problem", "linear", "--K", "x"])), 1);
    assert_eq!(code(&gwrm(&["solve", "--problem", "linear", "--no-such-flag"])), 1);
    assert_eq!(code(&gwrm(&["solve", "--problem", "linear", "--smoothing", "ta"])), 1);
    assert_eq!(code(&gwrm(&["solve", "--problem", "linear", "--K", "0"])), 1);
    assert_eq!(code(&gwrm(&["compare", "--problem", "linear", "--methods", "gwrm"])), 1);
    assert_eq!(code(&gwrm(&["--help"])), 0);
    assert_eq!(code(&gwrm(&["--version"])), 0);
}

#[test]
fn robertson_gwrm_solve_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwrm(&[
        "solve", "--problem", "robertson", "--method", "gwrm", "--K", "6", "--epsilon", "1e-3", "--t-end", "1e6",
        "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let run = read_json(&dir.path().join("run.json"));
    assert_eq!(run["completed"], true);
    assert_eq!(run["method"], "gwrm");
    let intervals = run["stats"]["interval_count"].as_u64().unwrap();
    assert!((25..=100).contains(&intervals), "{intervals} intervals");
    assert_eq!(run["outputs"].as_array().unwrap().len(), 3);

    let coeffs = read_json(&dir.path().join("coeffs.json"));
    assert_eq!(coeffs["pieces"].as_array().unwrap().len() as u64, intervals);

    let series = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = series.lines();
    assert_eq!(lines.next(), Some("t,x,y,z,y_scaled"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 1000);
    assert_eq!((rows[0][0], rows[999][0]), (0.0, 1e6));
    for r in &rows {
        assert_eq!(r[4], r[2] * 1e4);
        assert!((r[1] + r[2] + r[3] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn lorenz_gwrm_solve_completes() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwrm(&[
        "solve", "--problem", "lorenz84", "--method", "gwrm", "--K", "8", "--epsilon", "1e-3", "--t-end", "30",
        "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    let run = read_json(&dir.path().join("run.json"));
    assert_eq!(run["completed"], true);
    assert_eq!(run["problem"]["span"][1], 30.0);
}

#[test]
fn robertson_rk4_exhausts_its_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwrm(&[
        "solve", "--problem", "robertson", "--method", "rk4", "--max-steps", "100000", "--out", &out_arg(dir.path()),
    ]);
    assert_eq!(code(&out), 2);
    let run = read_json(&dir.path().join("run.json"));
    assert_eq!(run["completed"], false);
    assert_eq!(run["status"], "stagnated");
    assert!(run["stats"]["last_time"].as_f64().unwrap() < 1e6);
    assert!(dir.path().join("trajectory.csv").exists());
}

#[test]
fn smoothing_runs_write_transformed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let ti = dir.path().join("ti");
    let out = gwrm(&[
        "solve", "--problem", "lorenz84", "--t-end", "5", "--smoothing", "ti", "--ti-A", "auto", "--samples", "50",
        "--out", &out_arg(&ti),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let header = fs::read_to_string(ti.join("series.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "t,X,Y,Z,W_X,W_Y,W_Z");
    assert_eq!(read_json(&ti.join("run.json"))["smoothing"]["kind"], "ti");

    let ta = dir.path().join("ta");
    let out = gwrm(&[
        "solve", "--problem", "lorenz84", "--t-end", "5", "--smoothing", "ta", "--ta-delta", "0.5", "--samples",
        "50", "--out", &out_arg(&ta),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let header = fs::read_to_string(ta.join("series.csv")).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "t,U_X,U_Y,U_Z");
}

struct Row {
    method: String,
    completed: bool,
    status: String,
    work: u64,
    modes: Option<u64>,
    wall_time: f64,
    max_error: Option<f64>,
}

fn compare_rows(dir: &Path) -> Vec<Row> {
    let text = fs::read_to_string(dir.join("compare.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,completed,status,steps_or_intervals,modes,wall_time_s,max_error"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                method: f[0].into(),
                completed: f[1].parse().unwrap(),
                status: f[2].into(),
                work: f[3].parse().unwrap(),
                modes: (!f[4].is_empty()).then(|| f[4].parse().unwrap()),
                wall_time: f[5].parse().unwrap(),
                max_error: (!f[6].is_empty()).then(|| f[6].parse().unwrap()),
            }
        })
        .collect()
}

fn compare_in(dir: &Path, args: &[&str]) -> Vec<Row> {
    let mut all = vec!["compare"];
    all.extend_from_slice(args);
    let o = out_arg(dir);
    all.extend(["--out", &o]);
    let out = gwrm(&all);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = compare_rows(dir);
    // Every row can be rebuilt from its run record.
    for r in &rows {
        let rec = read_json(&dir.join(&r.method).join("run.json"));
        assert_eq!(rec["label"], r.method.as_str());
        assert_eq!(rec["completed"], r.completed);
        assert_eq!(rec["status"], r.status.as_str());
        let stats = &rec["stats"];
        let work = stats.get("interval_count").or(stats.get("steps_taken")).unwrap();
        assert_eq!(work.as_u64(), Some(r.work));
        assert_eq!(stats["total_modes"].as_u64(), r.modes);
        assert_eq!(rec["wall_time"].as_f64(), Some(r.wall_time));
        assert_eq!(rec["max_error"].as_f64(), r.max_error);
    }
    rows
}

fn row<'a>(rows: &'a [Row], method: &str) -> &'a Row {
    rows.iter().find(|r| r.method == method).unwrap()
}

#[test]
fn compare_robertson_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let rows = compare_in(dir.path(), &["--problem", "robertson", "--tol", "1e-3", "--spacing", "log"]);
    assert_eq!(rows.len(), 3);
    assert!(row(&rows, "gwrm").completed && row(&rows, "trapezoid").completed);
    let rk4 = row(&rows, "rk4");
    assert!(!rk4.completed);
    assert_eq!(rk4.status, "stagnated");
    assert!(row(&rows, "gwrm").max_error.unwrap() <= 1e-3);
    let table = fs::read_to_string(dir.path().join("compare.txt")).unwrap();
    assert!(table.contains("stagnated"));
}

#[test]
fn compare_linear_errors_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let tol = 1e-3;
    let rows = compare_in(dir.path(), &["--problem", "linear", "--tol", "1e-3"]);
    for r in &rows {
        assert!(r.completed, "{}", r.method);
    }
    assert!(row(&rows, "gwrm").max_error.unwrap() <= tol);
    assert!(row(&rows, "rk4").max_error.unwrap() <= tol);
    // Local control: global error of a contractive one-step method is at most
    // the sum of the accepted local errors.
    let trap = row(&rows, "trapezoid");
    assert!(trap.max_error.unwrap() <= tol * trap.work as f64);
}

#[test]
fn compare_lorenz_with_smoothing_rows() {
    let dir = tempfile::tempdir().unwrap();
    let rows = compare_in(
        dir.path(),
        &["--problem", "lorenz84", "--tol", "1e-3", "--methods", "gwrm,rk4", "--with-ti", "--with-ta"],
    );
    let labels: Vec<&str> = rows.iter().map(|r| r.method.as_str()).collect();
    assert_eq!(labels, ["gwrm", "rk4", "gwrm-ti", "gwrm-ta"]);
    assert!(rows.iter().all(|r| r.completed));
    assert!(row(&rows, "gwrm-ta").max_error.is_none());
    assert!(row(&rows, "gwrm-ti").modes.is_some());
}

fn strip_wall_time(v: &mut Value) {
    if let Some(m) = v.as_object_mut() {
        m.remove("wall_time");
    }
}

#[test]
fn identical_flags_give_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(code(&gwrm(&["solve", "--problem", "robertson", "--out", &out_arg(d.path())])), 0);
        compare_in(&d.path().join("cmp"), &["--problem", "linear", "--samples", "100"]);
    }
    for f in ["series.csv", "coeffs.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let strip_runs = |d: &Path| {
        let mut v = read_json(&d.join("run.json"));
        strip_wall_time(&mut v);
        // Output paths name the (different) temp directories.
        v.as_object_mut().unwrap().remove("outputs");
        v
    };
    assert_eq!(strip_runs(a.path()), strip_runs(b.path()));
    for m in ["gwrm", "rk4", "trapezoid"] {
        assert_eq!(strip_runs(&a.path().join("cmp").join(m)), strip_runs(&b.path().join("cmp").join(m)));
    }
    let csv_without_time = |d: &Path| -> Vec<String> {
        fs::read_to_string(d.join("cmp/compare.csv"))
            .unwrap()
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(5);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(csv_without_time(a.path()), csv_without_time(b.path()));

    let cal = |seed: &str| gwrm(&["modes", "--calibrate", "--per-bucket", "3", "--seed", seed]).stdout;
    assert_eq!(cal("11"), cal("11"));
    assert_ne!(cal("11"), cal("12"));
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# solver settings\nK = 6\nepsilon = 1e-2\nparam = lambda=-3\nsamples = 10\n").unwrap();
    let run = |extra: &[&str]| {
        let out_dir = dir.path().join("out");
        let mut args = vec!["solve", "--problem", "linear", "--out", out_dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = gwrm(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        read_json(&out_dir.join("run.json"))
    };
    let plain = run(&[]);
    let d = GwrmConfig::default();
    assert_eq!(plain["config"]["order"].as_u64(), Some(d.order as u64));
    assert_eq!(plain["problem"]["params"]["lambda"], -1.0);

    let from_file = run(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file["config"]["order"], 6);
    assert_eq!(from_file["config"]["epsilon"], 1e-2);
    assert_eq!(from_file["problem"]["params"]["lambda"], -3.0);

    let flagged = run(&["--config", cfg.to_str().unwrap(), "--epsilon", "1e-4", "--param", "lambda=-5"]);
    assert_eq!(flagged["config"]["order"], 6);
    assert_eq!(flagged["config"]["epsilon"], 1e-4);
    assert_eq!(flagged["problem"]["params"]["lambda"], -5.0);

    fs::write(&cfg, "bogus_key = 1\n").unwrap();
    assert_eq!(code(&gwrm(&["solve", "--problem", "linear", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn run_record_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = gwrm(&["solve", "--problem", "lorenz84", "--t-end", "1", "--K", "7", "--out", &out_arg(dir.path())]);
    assert_eq!(code(&out), 0);
    let mut config = read_json(&dir.path().join("run.json"))["config"].clone();
    assert_eq!(config.as_object_mut().unwrap().remove("kind"), Some(Value::from("gwrm")));
    let parsed: GwrmConfig = serde_json::from_value(config.clone()).unwrap();
    assert_eq!(parsed.order, 7);
    assert!(parsed.max_dt.is_infinite());
    assert_eq!(serde_json::to_value(parsed).unwrap(), config);
}
