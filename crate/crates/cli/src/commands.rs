//! The four subcommands: evolve, analytic, alpha, purity-sweep.
//!
//! Each command validates its full configuration up front (bad values exit
//! with code 2 naming the key), computes with the core library, and writes
//! one CSV. Sweep cells run on a rayon pool but results are written in
//! sorted-cell order, so output bytes never depend on scheduling.

use std::path::Path;

use rayon::prelude::*;

use qswalk_core::evolution::{self, walk, WalkMethod, WalkParams};
use qswalk_core::lattice::{self, AdjacencySpec, DissipatorSpec};
use qswalk_core::{analytic, moments};

use crate::config::{parse_spacing, required, time_grid, ConfigMap, Spacing};
use crate::output::{fmt_float, write_csv, write_svg_line_plot};
use crate::CliError;

fn check_range(key: &str, value: f64, lo: f64, hi: f64) -> Result<f64, CliError> {
    if !value.is_finite() || value < lo || value > hi {
        return Err(CliError::Config(format!(
            "config key `{key}`: must lie in [{lo}, {hi}], got {value}"
        )));
    }
    Ok(value)
}

fn parse_dissipator(adj: &AdjacencySpec, kind: &str) -> Result<DissipatorSpec, CliError> {
    match kind {
        "global" => Ok(lattice::build_global_dissipator(adj)),
        "local" => Ok(lattice::build_local_dissipators(adj)),
        other => Err(CliError::Config(format!(
            "config key `dissipator`: expected \"global\" or \"local\", got \"{other}\""
        ))),
    }
}

fn parse_method(method: &str) -> Result<WalkMethod, CliError> {
    match method {
        "auto" => Ok(WalkMethod::Auto),
        "dense" => Ok(WalkMethod::DenseExpm),
        "eigen" => Ok(WalkMethod::EigenBasis),
        "taylor" => Ok(WalkMethod::TaylorAction),
        other => Err(CliError::Config(format!(
            "config key `method`: expected auto|dense|eigen|taylor, got \"{other}\""
        ))),
    }
}

fn build_graph(graph: &str, n: usize) -> Result<AdjacencySpec, CliError> {
    match graph {
        "segment" => {
            lattice::build_segment(n).map_err(|e| CliError::Config(format!("config key `n`: {e}")))
        }
        "line" => {
            if n.is_multiple_of(2) {
                return Err(CliError::Config(format!(
                    "config key `n`: a truncated line needs an odd vertex count, got {n}"
                )));
            }
            lattice::build_truncated_line(n / 2)
                .map_err(|e| CliError::Config(format!("config key `n`: {e}")))
        }
        other => Err(CliError::Config(format!(
            "config key `graph`: expected \"segment\" or \"line\", got \"{other}\""
        ))),
    }
}

fn grid_from_config(cfg: &mut ConfigMap, default_t_min: f64) -> Result<Vec<f64>, CliError> {
    let t_min = cfg.take_f64("t_min")?.unwrap_or(default_t_min);
    let t_max = required("t_max", cfg.take_f64("t_max")?)?;
    let steps = required("t_steps", cfg.take_usize("t_steps")?)?;
    let spacing = match cfg.take_string("t_spacing")? {
        Some(s) => parse_spacing(&s)?,
        None => Spacing::Linear,
    };
    time_grid(t_min, t_max, steps, spacing)
}

/// Site occupations and purity over a time grid, one row per (t, vertex).
pub fn cmd_evolve(mut cfg: ConfigMap, out: Option<&Path>) -> Result<(), CliError> {
    let graph = cfg
        .take_string("graph")?
        .unwrap_or_else(|| "segment".into());
    let n = required("n", cfg.take_usize("n")?)?;
    let adj = build_graph(&graph, n)?;
    let default_l = if graph == "line" { Some(0) } else { None };
    let l = match cfg.take_i64("l")? {
        Some(l) => l,
        None => required("l", default_l)?,
    };
    let omega = check_range(
        "omega",
        required("omega", cfg.take_f64("omega")?)?,
        0.0,
        1.0,
    )?;
    let dissipator = required("dissipator", cfg.take_string("dissipator")?)?;
    let diss = parse_dissipator(&adj, &dissipator)?;
    let method = parse_method(&cfg.take_string("method")?.unwrap_or_else(|| "auto".into()))?;
    let times = grid_from_config(&mut cfg, 0.0)?;
    cfg.finish()?;

    let params = WalkParams::new(&adj, omega, times, l).map_err(config_or_compute)?;
    let output = walk(&adj, &diss, &params, method)?;

    let mut rows = Vec::new();
    for snap in &output.snapshots {
        for (pos, p) in output.positions.iter().zip(&snap.distribution) {
            rows.push(format!(
                "{},{},{},{}",
                fmt_float(snap.time),
                pos,
                fmt_float(*p),
                fmt_float(snap.purity)
            ));
        }
    }
    write_csv(out, "t,vertex,probability,purity", &rows)?;
    Ok(())
}

/// Closed-form distributions: segment, its long-time limit, and the infinite
/// line by quadrature or series.
pub fn cmd_analytic(mut cfg: ConfigMap, out: Option<&Path>) -> Result<(), CliError> {
    let mode = required("mode", cfg.take_string("mode")?)?;
    let mut rows = Vec::new();
    match mode.as_str() {
        "segment" => {
            let n = required("n", cfg.take_usize("n")?)?;
            let l = required("l", cfg.take_i64("l")?)?;
            let omega = check_range(
                "omega",
                required("omega", cfg.take_f64("omega")?)?,
                0.0,
                1.0,
            )?;
            let times = grid_from_config(&mut cfg, 0.0)?;
            cfg.finish()?;
            if l < 1 || l as usize > n {
                return Err(CliError::Config(format!(
                    "config key `l`: must lie in [1, {n}], got {l}"
                )));
            }
            for &t in &times {
                let dist = analytic::segment_distribution(n, l as usize, omega, t)?;
                for (k, p) in dist.iter().enumerate() {
                    rows.push(format!(
                        "{},{},{},segment",
                        fmt_float(t),
                        k + 1,
                        fmt_float(*p)
                    ));
                }
            }
        }
        "segment_asymptotic" => {
            let n = required("n", cfg.take_usize("n")?)?;
            let l = required("l", cfg.take_i64("l")?)?;
            cfg.finish()?;
            if l < 1 || l as usize > n {
                return Err(CliError::Config(format!(
                    "config key `l`: must lie in [1, {n}], got {l}"
                )));
            }
            let dist = analytic::asymptotic_distribution(n, l as usize)?;
            for (k, p) in dist.iter().enumerate() {
                rows.push(format!(
                    "inf,{},{},segment_asymptotic",
                    k + 1,
                    fmt_float(*p)
                ));
            }
        }
        "line_quadrature" => {
            let omega = check_range(
                "omega",
                required("omega", cfg.take_f64("omega")?)?,
                0.0,
                1.0,
            )?;
            let k_max = required("k_max", cfg.take_i64("k_max")?)?;
            let nodes = cfg.take_usize("quadrature_nodes")?;
            let times = grid_from_config(&mut cfg, 0.0)?;
            cfg.finish()?;
            for &t in &times {
                let n_nodes = nodes.unwrap_or_else(|| analytic::default_line_nodes(t));
                for k in -k_max..=k_max {
                    let p = analytic::line_distribution(k, omega, t, n_nodes)?;
                    rows.push(format!(
                        "{},{},{},line_quadrature",
                        fmt_float(t),
                        k,
                        fmt_float(p)
                    ));
                }
            }
        }
        "line_series" => {
            let omega = check_range(
                "omega",
                required("omega", cfg.take_f64("omega")?)?,
                0.0,
                1.0,
            )?;
            let k_max = required("k_max", cfg.take_i64("k_max")?)?;
            let tol = cfg.take_f64("series_tol")?.unwrap_or(1e-10);
            let max_time = cfg.take_f64("series_max_t")?;
            let times = grid_from_config(&mut cfg, 0.0)?;
            cfg.finish()?;
            let mut opts = analytic::SeriesOptions {
                tolerance: tol,
                ..analytic::SeriesOptions::default()
            };
            if let Some(mt) = max_time {
                opts.max_time = mt;
            }
            for &t in &times {
                for k in -k_max..=k_max {
                    let p = analytic::line_distribution_series_with(k, omega, t, &opts)?;
                    rows.push(format!(
                        "{},{},{},line_series",
                        fmt_float(t),
                        k,
                        fmt_float(p)
                    ));
                }
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "config key `mode`: expected segment|segment_asymptotic|line_quadrature|line_series, \
                 got \"{other}\""
            )));
        }
    }
    write_csv(out, "t,k,probability,method", &rows)?;
    Ok(())
}

/// Fit the scaling exponent of the second moment for each omega in a sweep.
pub fn cmd_alpha(mut cfg: ConfigMap, out: Option<&Path>) -> Result<(), CliError> {
    let omegas = required("omegas", cfg.take_f64_array("omegas")?)?;
    if omegas.is_empty() {
        return Err(CliError::Config(
            "config key `omegas`: list is empty".into(),
        ));
    }
    for &w in &omegas {
        check_range("omegas", w, 0.0, 1.0)?;
    }
    let dissipator = required("dissipator", cfg.take_string("dissipator")?)?;
    let l = cfg.take_i64("l")?.unwrap_or(0);
    let method = parse_method(&cfg.take_string("method")?.unwrap_or_else(|| "auto".into()))?;
    let regime_tol = cfg.take_f64("regime_tol")?.unwrap_or(0.05);
    let times = grid_from_config(&mut cfg, 1.0)?;
    let t_max = *times.last().expect("grid non-empty");
    // The fit window defaults to the latter half of the grid so the linear
    // transient of the second moment is subdominant; both bounds land in the
    // output so the choice is always visible.
    let window_lo = cfg.take_f64("window_lo")?.unwrap_or(times[times.len() / 2]);
    let window_hi = cfg.take_f64("window_hi")?.unwrap_or(t_max);
    let n_override = cfg.take_usize("n")?;
    cfg.finish()?;

    if times[0] <= 0.0 {
        return Err(CliError::Config(
            "config key `t_min`: the log-log fit needs strictly positive times".into(),
        ));
    }
    let half_width = match n_override {
        Some(n) if !n.is_multiple_of(2) => n / 2,
        Some(n) => {
            return Err(CliError::Config(format!(
                "config key `n`: a truncated line needs an odd vertex count, got {n}"
            )));
        }
        None => evolution::walk::light_cone_half_width(t_max),
    };
    let adj = lattice::build_truncated_line(half_width)
        .map_err(|e| CliError::Config(format!("config key `n`: {e}")))?;
    let diss = parse_dissipator(&adj, &dissipator)?;
    adj.index_of(l)
        .map_err(|e| CliError::Config(format!("config key `l`: {e}")))?;

    type AlphaCell = (
        f64,
        Result<(moments::ScalingFit, moments::Regime), qswalk_core::Error>,
    );
    // One cell per omega; cells are independent pure computations.
    let cells: Vec<AlphaCell> = omegas
        .par_iter()
        .map(|&omega| {
            let result = (|| {
                let params = WalkParams::new(&adj, omega, times.clone(), l)?;
                let output = walk(&adj, &diss, &params, method)?;
                let series = moments::moment_series_from_walk(&output, 2)?;
                let fit = moments::fit_alpha(&series, (window_lo, window_hi))?;
                let regime = moments::classify_regime(fit.alpha, regime_tol)?;
                Ok((fit, regime))
            })();
            (omega, result)
        })
        .collect();

    let mut warnings = 0usize;
    let mut rows = Vec::with_capacity(cells.len());
    for (omega, result) in &cells {
        match result {
            Ok((fit, regime)) => {
                println!(
                    "omega={omega}: alpha={:.6} r2={:.8} window=[{window_lo}, {window_hi}] regime={regime}",
                    fit.alpha, fit.r_squared
                );
                rows.push(format!(
                    "{},{},{},{},{},{}",
                    fmt_float(*omega),
                    fmt_float(fit.alpha),
                    fmt_float(fit.r_squared),
                    fmt_float(window_lo),
                    fmt_float(window_hi),
                    regime
                ));
            }
            Err(e) => {
                warnings += 1;
                eprintln!("warning: omega={omega}: {e}");
                rows.push(format!(
                    "{},NaN,NaN,{},{},error",
                    fmt_float(*omega),
                    fmt_float(window_lo),
                    fmt_float(window_hi)
                ));
            }
        }
    }
    write_csv(
        out,
        "omega,alpha,r_squared,window_lo,window_hi,regime",
        &rows,
    )?;
    if warnings > 0 {
        eprintln!("{warnings} cell(s) failed; recorded as NaN rows");
    }
    Ok(())
}

/// Purity of the final state as a function of omega.
pub fn cmd_purity_sweep(mut cfg: ConfigMap, out: Option<&Path>) -> Result<(), CliError> {
    let n = required("n", cfg.take_usize("n")?)?;
    let adj = build_graph(
        &cfg.take_string("graph")?
            .unwrap_or_else(|| "segment".into()),
        n,
    )?;
    let l = required("l", cfg.take_i64("l")?)?;
    let t = required("t", cfg.take_f64("t")?)?;
    if !t.is_finite() || t < 0.0 {
        return Err(CliError::Config(format!(
            "config key `t`: must be finite and non-negative, got {t}"
        )));
    }
    let dissipator = required("dissipator", cfg.take_string("dissipator")?)?;
    let diss = parse_dissipator(&adj, &dissipator)?;
    let method = parse_method(&cfg.take_string("method")?.unwrap_or_else(|| "auto".into()))?;
    let omega_min = check_range(
        "omega_min",
        cfg.take_f64("omega_min")?.unwrap_or(0.0),
        0.0,
        1.0,
    )?;
    let omega_max = check_range(
        "omega_max",
        cfg.take_f64("omega_max")?.unwrap_or(1.0),
        0.0,
        1.0,
    )?;
    let omega_steps = cfg.take_usize("omega_steps")?.unwrap_or(11);
    let svg = cfg.take_string("svg")?;
    cfg.finish()?;
    if omega_steps < 2 || omega_max <= omega_min {
        return Err(CliError::Config(
            "config keys `omega_min`/`omega_max`/`omega_steps`: need at least 2 steps over a \
             non-empty range"
                .into(),
        ));
    }
    adj.index_of(l)
        .map_err(|e| CliError::Config(format!("config key `l`: {e}")))?;

    let omegas: Vec<f64> = (0..omega_steps)
        .map(|i| omega_min + (omega_max - omega_min) * i as f64 / (omega_steps - 1) as f64)
        .collect();

    let purities: Vec<Result<f64, qswalk_core::Error>> = omegas
        .par_iter()
        .map(|&omega| {
            let params = WalkParams::new(&adj, omega, vec![t.max(f64::MIN_POSITIVE)], l)?;
            let output = walk(&adj, &diss, &params, method)?;
            Ok(output.snapshots[0].purity)
        })
        .collect();

    let mut rows = Vec::with_capacity(omegas.len());
    let mut points = Vec::with_capacity(omegas.len());
    for (omega, purity) in omegas.iter().zip(&purities) {
        let p = purity.as_ref().map_err(|e| CliError::from(e.clone()))?;
        rows.push(format!("{},{}", fmt_float(*omega), fmt_float(*p)));
        points.push((*omega, *p));
    }
    write_csv(out, "omega,purity", &rows)?;
    if let Some(svg_path) = svg {
        write_svg_line_plot(Path::new(&svg_path), &points, "omega", "purity")?;
    }
    Ok(())
}

/// Errors raised by core validation of CLI-assembled values are still
/// configuration mistakes from the user's point of view.
fn config_or_compute(e: qswalk_core::Error) -> CliError {
    use qswalk_core::Error as E;
    match &e {
        E::InvalidParameter { .. } | E::InvalidSize(_) | E::VertexOutOfRange { .. } => {
            CliError::Config(e.to_string())
        }
        _ => CliError::from(e),
    }
}
