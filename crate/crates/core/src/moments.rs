//! Central moments of walker distributions and the scaling-exponent fit.
//!
//! The headline quantity is the exponent alpha in `mu_2(t) ~ t^alpha`,
//! extracted as the least-squares slope of log mu_2 against log t over a
//! caller-chosen window. The window matters: the closed-form second moment
//! carries a linear transient that must be subdominant before the fit reads
//! off the asymptotic exponent, so the default window is the latter half of
//! the grid and both bounds are reported alongside the fit.

use crate::error::{Error, Result};
use crate::evolution::WalkOutput;

/// Where a moment series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentSource {
    /// Numerical evolution of the vectorized master equation.
    Expm,
    /// Closed-form segment distribution.
    AnalyticSegment,
    /// Closed-form line distribution (quadrature or series).
    AnalyticLine,
}

/// A moment of fixed order sampled on a time grid.
#[derive(Debug, Clone)]
pub struct MomentSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    order: u32,
    source: MomentSource,
}

impl MomentSeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        order: u32,
        source: MomentSource,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if order.is_multiple_of(2) {
            if let Some(v) = values.iter().find(|v| **v < 0.0) {
                return Err(Error::InvalidParameter {
                    name: "values",
                    message: format!("even moment cannot be negative, got {v}"),
                });
            }
        }
        Ok(Self {
            times,
            values,
            order,
            source,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }
}

/// m-th central moment of a distribution on integer positions.
///
/// For the symmetric line walks the mean vanishes and this coincides with the
/// moment about the origin.
pub fn central_moment(positions: &[i64], probabilities: &[f64], order: u32) -> Result<f64> {
    if positions.len() != probabilities.len() {
        return Err(Error::DimensionMismatch {
            expected: positions.len(),
            got: probabilities.len(),
        });
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { sum: total });
    }
    let mean: f64 = positions
        .iter()
        .zip(probabilities)
        .map(|(&k, &p)| k as f64 * p)
        .sum();
    Ok(positions
        .iter()
        .zip(probabilities)
        .map(|(&k, &p)| (k as f64 - mean).powi(order as i32) * p)
        .sum())
}

/// Moment series of one order extracted from a walk run.
pub fn moment_series_from_walk(output: &WalkOutput, order: u32) -> Result<MomentSeries> {
    let mut times = Vec::with_capacity(output.snapshots.len());
    let mut values = Vec::with_capacity(output.snapshots.len());
    for snap in &output.snapshots {
        times.push(snap.time);
        values.push(central_moment(
            &output.positions,
            &snap.distribution,
            order,
        )?);
    }
    MomentSeries::new(times, values, order, MomentSource::Expm)
}

/// Result of the log-log regression.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub alpha: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
}

/// Least-squares slope of `log value` against `log t` over `window`.
///
/// Requires at least three usable points; any non-positive value inside the
/// window is an error since its logarithm would poison the fit.
pub fn fit_alpha(series: &MomentSeries, window: (f64, f64)) -> Result<ScalingFit> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi || lo <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "window",
            message: format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        });
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in series.times().iter().zip(series.values()) {
        if t < lo || t > hi {
            continue;
        }
        if v <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "series",
                message: format!("non-positive moment {v} at t = {t} inside the window"),
            });
        }
        xs.push(t.ln());
        ys.push(v.ln());
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: xs.len(),
        });
    }

    let n = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / n;
    let mean_y: f64 = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let alpha = sxy / sxx;
    let intercept = mean_y - alpha * mean_x;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let fit = intercept + alpha * x;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };

    Ok(ScalingFit {
        alpha,
        intercept,
        window,
        r_squared,
    })
}

/// Discrete running exponent `d log mu / d log t` between consecutive grid
/// points inside `window`, reported at the pair midpoints.
pub fn running_exponent(series: &MomentSeries, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = window;
    let pts: Vec<(f64, f64)> = series
        .times()
        .iter()
        .zip(series.values())
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(&t, &v)| (t, v))
        .collect();
    if pts.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: pts.len(),
        });
    }
    let mut out = Vec::with_capacity(pts.len() - 1);
    for pair in pts.windows(2) {
        let (t0, v0) = pair[0];
        let (t1, v1) = pair[1];
        if v0 <= 0.0 || v1 <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "series",
                message: format!("non-positive moment in window near t = {t0}"),
            });
        }
        let slope = (v1.ln() - v0.ln()) / (t1.ln() - t0.ln());
        out.push((0.5 * (t0 + t1), slope));
    }
    Ok(out)
}

/// Diffusion regime classified from the scaling exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    SubDiffusive,
    Normal,
    SuperDiffusive,
    Ballistic,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::SubDiffusive => "sub_diffusive",
            Regime::Normal => "normal",
            Regime::SuperDiffusive => "super_diffusive",
            Regime::Ballistic => "ballistic",
        };
        f.write_str(s)
    }
}

/// Classify a fitted exponent: below 1 is sub-diffusive, 1 is normal
/// diffusion, 2 is ballistic, in between is super-diffusive (all up to
/// `tol`). Values outside `[0, 2 + tol]` are outside the model.
pub fn classify_regime(alpha: f64, tol: f64) -> Result<Regime> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidParameter {
            name: "tol",
            message: format!("must be positive and finite, got {tol}"),
        });
    }
    if !alpha.is_finite() || alpha < 0.0 || alpha > 2.0 + tol {
        return Err(Error::OutOfModel { alpha });
    }
    if (alpha - 1.0).abs() <= tol {
        Ok(Regime::Normal)
    } else if (alpha - 2.0).abs() <= tol || alpha > 2.0 {
        Ok(Regime::Ballistic)
    } else if alpha < 1.0 {
        Ok(Regime::SubDiffusive)
    } else {
        Ok(Regime::SuperDiffusive)
    }
}
