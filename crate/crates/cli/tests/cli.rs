//! End-to-end checks of the binary: exit codes, config handling, CSV shape,
//! and byte-level reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn qswalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qswalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn evolve_reproduces_two_site_closed_form() {
    let out = qswalk(&[
        "evolve",
        "--n",
        "2",
        "--l",
        "1",
        "--omega",
        "1.0",
        "--dissipator",
        "global",
        "--t-max",
        "2",
        "--t-steps",
        "1",
    ]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,vertex,probability,purity");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "1");
    let p: f64 = row[2].parse().unwrap();
    assert!((p - 0.6839397205857212).abs() < 1e-9, "p = {p}");
}

#[test]
fn evolve_rows_sum_to_one_per_time() {
    let out = qswalk(&[
        "evolve",
        "--n",
        "6",
        "--l",
        "2",
        "--omega",
        "0.4",
        "--dissipator",
        "local",
        "--t-min",
        "0",
        "--t-max",
        "3",
        "--t-steps",
        "4",
    ]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    let mut by_time: std::collections::BTreeMap<String, f64> = Default::default();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        *by_time.entry(cols[0].to_string()).or_default() += cols[2].parse::<f64>().unwrap();
    }
    assert_eq!(by_time.len(), 4);
    for (t, sum) in by_time {
        assert!((sum - 1.0).abs() < 1e-8, "t={t}: sum={sum}");
    }
    // At t = 0 the distribution is a delta at the start vertex.
    let first_rows: Vec<&str> = text.lines().skip(1).take(6).collect();
    for row in first_rows {
        let cols: Vec<&str> = row.split(',').collect();
        let expect = if cols[1] == "2" { 1.0 } else { 0.0 };
        let p: f64 = cols[2].parse().unwrap();
        assert!((p - expect).abs() < 1e-12);
    }
}

#[test]
fn analytic_asymptotic_matches_closed_form() {
    let out = qswalk(&[
        "analytic",
        "--mode",
        "segment_asymptotic",
        "--n",
        "5",
        "--l",
        "3",
    ]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    let probs: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let expect = [1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
    for (p, e) in probs.iter().zip(expect) {
        assert!((p - e).abs() < 1e-15);
    }
    for line in text.lines().skip(1) {
        assert!(line.starts_with("inf,"), "{line}");
    }
}

#[test]
fn analytic_line_quadrature_short_time_value() {
    let out = qswalk(&[
        "analytic",
        "--mode",
        "line_quadrature",
        "--omega",
        "1.0",
        "--k-max",
        "0",
        "--t-min",
        "0.1",
        "--t-max",
        "0.1",
        "--t-steps",
        "1",
    ]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    let row = text.lines().nth(1).unwrap();
    let p: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((p - 0.9526871191).abs() < 1e-9, "p = {p}");
}

#[test]
fn alpha_classifies_interpolated_global_walk_as_ballistic() {
    let out = qswalk(&[
        "alpha",
        "--omegas",
        "0.5",
        "--dissipator",
        "global",
        "--t-min",
        "1",
        "--t-max",
        "30",
        "--t-steps",
        "30",
    ]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let text = stdout_str(&out);
    let row = text.lines().last().unwrap();
    assert!(row.ends_with("ballistic"), "{row}");
}

#[test]
fn unknown_config_key_exits_2_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 4\nl = 1\nomega = 0.5\ndissipater = \"global\"\n").unwrap();
    let out = qswalk(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--dissipator",
        "global",
        "--t-max",
        "1",
        "--t-steps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_str(&out).contains("dissipater"),
        "{}",
        stderr_str(&out)
    );
}

#[test]
fn invalid_values_exit_2_and_name_the_key() {
    let out = qswalk(&[
        "evolve",
        "--n",
        "4",
        "--l",
        "1",
        "--omega",
        "1.5",
        "--dissipator",
        "global",
        "--t-max",
        "1",
        "--t-steps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("omega"));

    let out = qswalk(&[
        "evolve",
        "--n",
        "4",
        "--l",
        "9",
        "--omega",
        "0.5",
        "--dissipator",
        "global",
        "--t-max",
        "1",
        "--t-steps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = qswalk(&[
        "evolve",
        "--n",
        "4",
        "--omega",
        "0.5",
        "--dissipator",
        "global",
        "--t-max",
        "1",
        "--t-steps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains('l'));
}

#[test]
fn truncation_guard_exits_3() {
    let out = qswalk(&[
        "evolve",
        "--graph",
        "line",
        "--n",
        "7",
        "--omega",
        "0.1",
        "--dissipator",
        "global",
        "--t-max",
        "8",
        "--t-steps",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_str(&out).contains("enlarge"), "{}", stderr_str(&out));
}

#[test]
fn series_out_of_window_exits_4() {
    let out = qswalk(&[
        "analytic",
        "--mode",
        "line_series",
        "--omega",
        "1.0",
        "--k-max",
        "1",
        "--t-max",
        "9",
        "--t-steps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr_str(&out).contains("series"), "{}", stderr_str(&out));
}

#[test]
fn csv_output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |path: &Path, threads: &str| {
        let out = qswalk(&[
            "alpha",
            "--threads",
            threads,
            "--omegas",
            "0.3,0.7,1.0",
            "--dissipator",
            "global",
            "--t-min",
            "1",
            "--t-max",
            "10",
            "--t-steps",
            "10",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr_str(&out));
        std::fs::read(path).unwrap()
    };
    let a = run(&dir.path().join("a.csv"), "1");
    let b = run(&dir.path().join("b.csv"), "1");
    let c = run(&dir.path().join("c.csv"), "3");
    assert_eq!(a, b, "identical runs must produce identical bytes");
    assert_eq!(a, c, "thread count must not change output bytes");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("omega,alpha,r_squared,window_lo,window_hi,regime\n"));
    // omega = 1 is purely dissipative normal diffusion.
    let last = text.lines().last().unwrap();
    assert!(last.ends_with("normal"), "{last}");
}

#[test]
fn purity_sweep_is_monotone_for_global_dissipator() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let svg = dir.path().join("p.svg");
    let out = qswalk(&[
        "purity-sweep",
        "--n",
        "12",
        "--l",
        "6",
        "--t",
        "3",
        "--dissipator",
        "global",
        "--omega-steps",
        "7",
        "--svg",
        svg.to_str().unwrap(),
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_str(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let purities: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(purities.len(), 7);
    assert!(
        (purities[0] - 1.0).abs() < 1e-9,
        "omega=0 keeps a pure state pure"
    );
    for pair in purities.windows(2) {
        assert!(
            pair[1] <= pair[0] + 1e-10,
            "purity must not increase with omega"
        );
    }
    let svg_text = std::fs::read_to_string(&svg).unwrap();
    assert!(svg_text.starts_with("<svg"));
    assert!(svg_text.contains("polyline"));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "n = 5\nl = 3\nomega = 0.25\ndissipator = \"global\"\nt_max = 1.0\nt_steps = 2\n",
    )
    .unwrap();
    let base = qswalk(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert!(base.status.success(), "{}", stderr_str(&base));
    // Override omega on the command line; outputs must differ.
    let over = qswalk(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--omega",
        "0.75",
    ]);
    assert!(over.status.success());
    assert_ne!(stdout_str(&base), stdout_str(&over));
}

#[test]
fn alpha_records_failed_cells_as_nan_rows() {
    // Undersized lattice trips the light-cone guard per cell; the sweep still
    // exits 0 and records the cells as NaN.
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("alpha.csv");
    let out = qswalk(&[
        "alpha",
        "--omegas",
        "0.2",
        "--dissipator",
        "global",
        "--n",
        "9",
        "--t-min",
        "1",
        "--t-max",
        "12",
        "--t-steps",
        "6",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stderr_str(&out).contains("warning"), "{}", stderr_str(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains("NaN"), "{row}");
    assert!(row.ends_with("error"), "{row}");
}
