//! Closed-form results for the global-dissipator walk.
//!
//! For the single position-measurement dissipator the Hamiltonian and the
//! jump operator commute (the jump operator is half the adjacency matrix),
//! so the whole superoperator diagonalizes in the eigenbasis of a tridiagonal
//! Toeplitz matrix. That yields:
//!
//! * the exact site distribution on a segment as a double spectral sum,
//! * its t -> infinity limit,
//! * the infinite-line distribution as a double integral over quasimomenta,
//! * short-time Taylor coefficients of the line distribution, and
//! * closed forms for the central moments and their leading large-t terms.
//!
//! Everything here is independent of the superoperator-exponential path in
//! [`crate::evolution`]; the two routes cross-check each other in the test
//! suites.

use ndarray::Array2;

use crate::combinatorics::{binomial_u128, factorial, ln_binomial};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::quadrature::GaussLegendre;

/// Largest series order computed with exact integer binomials; higher orders
/// switch to log-space magnitudes. Chosen so products of two binomials stay
/// below 2^53 and remain exact in `f64`.
const EXACT_SERIES_ORDER: usize = 14;

/// Residual imaginary parts above this are treated as numerical failures
/// rather than silently discarded.
const IMAG_TOL: f64 = 1e-10;

/// Closed-form eigensystem of the tridiagonal Toeplitz hopping operator with
/// 1/2 on the off-diagonals.
///
/// Eigenvalues are `cos(i pi / (n+1))` and the eigenvector matrix
/// `sqrt(2/(n+1)) sin(i j pi / (n+1))` is symmetric, orthogonal, and its own
/// inverse.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    n: usize,
    eigenvalues: Vec<f64>,
    vectors: Array2<f64>,
}

impl EigenSystem {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("eigensystem needs n >= 1".into()));
        }
        let denom = (n + 1) as f64;
        let eigenvalues = (1..=n)
            .map(|i| (i as f64 * std::f64::consts::PI / denom).cos())
            .collect();
        let norm = (2.0 / denom).sqrt();
        let vectors = Array2::from_shape_fn((n, n), |(j, i)| {
            norm * (((i + 1) * (j + 1)) as f64 * std::f64::consts::PI / denom).sin()
        });
        Ok(Self {
            n,
            eigenvalues,
            vectors,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvector matrix; entry `[j, i]` is component `j` of eigenvector `i`.
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }
}

/// Site distribution at time `t` for the global-dissipator walk on a segment
/// of `n` vertices started at vertex `l` (1-based).
///
/// Evaluates the spectral double sum: amplitudes between eigenvector pairs
/// decay like `exp(-(t/2) w (lambda_i - lambda_j)^2)` and rotate with
/// frequency `2 (1 - w) (lambda_i - lambda_j)`.
pub fn segment_distribution(n: usize, l: usize, omega: f64, t: f64) -> Result<Vec<f64>> {
    if l < 1 || l > n {
        return Err(Error::VertexOutOfRange {
            label: l as i64,
            min: 1,
            max: n as i64,
        });
    }
    check_unit_interval("omega", omega)?;
    check_non_negative("t", t)?;
    let eig = EigenSystem::new(n)?;
    let v = eig.vectors();
    let lam = eig.eigenvalues();

    // In the eigenbasis the initial projector is rank one, and each entry
    // just picks up its decay/rotation factor.
    let mut modes = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let gap = lam[i] - lam[j];
            let damping = (-0.5 * t * omega * gap * gap).exp();
            let phase = 2.0 * t * (1.0 - omega) * gap;
            let weight = v[[l - 1, i]] * v[[l - 1, j]];
            modes[[i, j]] = C64::from_polar(damping * weight, phase);
        }
    }

    // p_k = (V M V^T)_{kk}; V is real so only one complex product is needed.
    let mut probs = Vec::with_capacity(n);
    let mut sum = 0.0;
    for k in 0..n {
        let mut acc = C64::ZERO;
        for i in 0..n {
            let vki = v[[k, i]];
            if vki == 0.0 {
                continue;
            }
            let mut inner = C64::ZERO;
            for j in 0..n {
                inner += modes[[i, j]] * v[[k, j]];
            }
            acc += inner * vki;
        }
        if acc.im.abs() > IMAG_TOL {
            return Err(Error::Accuracy {
                context: "segment_distribution",
                details: format!("residual imaginary part {:.3e} at site {k}", acc.im),
            });
        }
        sum += acc.re;
        probs.push(acc.re);
    }
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { sum });
    }
    Ok(probs)
}

/// Limit distribution of the segment walk as t -> infinity, which exists for
/// any nonzero dissipation strength and is independent of it.
///
/// A walker started at the midpoint keeps weight `2/(n+1)` there; otherwise
/// the start site and its mirror image each keep `3/(2(n+1))`. All remaining
/// sites flatten to `1/(n+1)`.
pub fn asymptotic_distribution(n: usize, l: usize) -> Result<Vec<f64>> {
    if l < 1 || l > n {
        return Err(Error::VertexOutOfRange {
            label: l as i64,
            min: 1,
            max: n as i64,
        });
    }
    let denom = (n + 1) as f64;
    let mirror = n + 1 - l;
    let probs = (1..=n)
        .map(|k| {
            if 2 * l == n + 1 {
                if k == l {
                    2.0 / denom
                } else {
                    1.0 / denom
                }
            } else if k == l || k == mirror {
                1.5 / denom
            } else {
                1.0 / denom
            }
        })
        .collect();
    Ok(probs)
}

/// Node count needed to resolve the line-distribution integrand at time `t`.
pub fn required_line_nodes(t: f64) -> usize {
    (8.0 * (1.0 + t)).ceil() as usize
}

/// Default node count for [`line_distribution`]: never below 64, growing
/// linearly with `t` to track the oscillation frequency.
pub fn default_line_nodes(t: f64) -> usize {
    required_line_nodes(t).max(64)
}

/// Occupation probability of site `k` for the walk on the infinite line
/// started at the origin, by tensor-product Gauss-Legendre quadrature of the
/// quasimomentum double integral.
pub fn line_distribution(k: i64, omega: f64, t: f64, nodes: usize) -> Result<f64> {
    check_unit_interval("omega", omega)?;
    check_non_negative("t", t)?;
    if nodes < 8 {
        return Err(Error::InvalidParameter {
            name: "nodes",
            message: format!("need at least 8 quadrature nodes, got {nodes}"),
        });
    }
    let needed = required_line_nodes(t);
    if nodes < needed {
        return Err(Error::Accuracy {
            context: "line_distribution",
            details: format!("{nodes} nodes cannot resolve t = {t}; need at least {needed}"),
        });
    }
    let gl = GaussLegendre::new(nodes)?;
    let kf = k as f64;
    let pi = std::f64::consts::PI;
    let integral = gl.integrate_square(-pi, pi, |x, y| {
        let gap = x.cos() - y.cos();
        let damping = (-0.5 * omega * t * gap * gap).exp();
        let modulus = (kf * x).cos() * (kf * y).cos() * damping;
        C64::from_polar(modulus, 2.0 * t * (1.0 - omega) * gap)
    });
    let value = integral / (4.0 * pi * pi);
    if value.im.abs() > IMAG_TOL {
        return Err(Error::Accuracy {
            context: "line_distribution",
            details: format!("residual imaginary part {:.3e}", value.im),
        });
    }
    if !(-1e-8..=1.0 + 1e-8).contains(&value.re) {
        return Err(Error::Accuracy {
            context: "line_distribution",
            details: format!(
                "value {:.6e} outside [0, 1] beyond quadrature error",
                value.re
            ),
        });
    }
    Ok(value.re)
}

/// Taylor coefficient of the purely dissipative line distribution:
/// `rho_kk(t) = sum_n a(n, k) t^n / n!`.
///
/// Vanishes for `|k| > n`; even in `k`.
pub fn series_coefficient_a(order: usize, position: i64) -> f64 {
    let k = position.unsigned_abs() as usize;
    if k > order {
        return 0.0;
    }
    if order <= EXACT_SERIES_ORDER {
        a_core_exact(order, k)
    } else {
        let n = order as u64;
        let ln_mag = ln_binomial(2 * n, n) + ln_binomial(2 * n, n + k as u64) - order as f64 * LN_8;
        sign(order + k) * ln_mag.exp()
    }
}

const LN_8: f64 = 3.0 * std::f64::consts::LN_2;

fn sign(parity: usize) -> f64 {
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Exact-arithmetic core shared by the A coefficients and the l = 0 term of
/// the B coefficients, so the two agree bitwise at omega = 1.
fn a_core_exact(n: usize, k: usize) -> f64 {
    let c = binomial_u128(2 * n as u64, n as u64) as f64
        * binomial_u128(2 * n as u64, (n + k) as u64) as f64;
    sign(n + k) * c / 8f64.powi(n as i32)
}

/// Taylor coefficient of the line distribution at interpolation `omega`,
/// reducing to [`series_coefficient_a`] at `omega = 1` (exactly, including in
/// floating point).
pub fn series_coefficient_b(order: usize, position: i64, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            message: format!("series coefficients need omega in (0, 1], got {omega}"),
        });
    }
    let k = position.unsigned_abs() as usize;
    if k > order {
        return Ok(0.0);
    }
    let n = order;
    let l_max = (n / 2).min(n - k);
    let mut total = 0.0f64;
    if n <= EXACT_SERIES_ORDER {
        for l in 0..=l_max {
            if l == 0 {
                total += omega.powi(n as i32) * a_core_exact(n, k);
            } else {
                if omega == 1.0 {
                    continue;
                }
                let combinatorial = binomial_u128(n as u64, 2 * l as u64) as f64
                    * binomial_u128(2 * (n - l) as u64, (n - l) as u64) as f64
                    * binomial_u128(2 * (n - l) as u64, (n - l + k) as u64) as f64;
                let weight = 64f64.powi(l as i32)
                    * omega.powi((n - 2 * l) as i32)
                    * (1.0 - omega).powi(2 * l as i32);
                total += sign(n + k + l) * combinatorial * weight / 8f64.powi(n as i32);
            }
        }
    } else {
        // Magnitudes overflow f64 well before order 300; combine in logs.
        for l in 0..=l_max {
            if l > 0 && omega == 1.0 {
                continue;
            }
            let nu = n as u64;
            let lu = l as u64;
            let mut ln_mag = ln_binomial(nu, 2 * lu)
                + ln_binomial(2 * (nu - lu), nu - lu)
                + ln_binomial(2 * (nu - lu), nu - lu + k as u64)
                + (2 * l) as f64 * LN_8
                - n as f64 * LN_8
                + (n - 2 * l) as f64 * omega.ln();
            if l > 0 {
                ln_mag += (2 * l) as f64 * (1.0 - omega).ln();
            }
            total += sign(n + k + l) * ln_mag.exp();
        }
    }
    Ok(total)
}

/// Tuning knobs for [`line_distribution_series_with`].
#[derive(Debug, Clone)]
pub struct SeriesOptions {
    /// Relative truncation tolerance.
    pub tolerance: f64,
    /// Refuse times beyond this: the alternating coefficients grow before the
    /// factorial wins, and in 64-bit arithmetic cancellation destroys the sum
    /// near t ~ 10. The quadrature path covers large times.
    pub max_time: f64,
    /// Hard cap on the series order.
    pub max_order: usize,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_time: 5.0,
            max_order: 300,
        }
    }
}

/// Line distribution by Taylor series in `t`, valid for short times.
pub fn line_distribution_series(k: i64, omega: f64, t: f64, tol: f64) -> Result<f64> {
    let opts = SeriesOptions {
        tolerance: tol,
        ..SeriesOptions::default()
    };
    line_distribution_series_with(k, omega, t, &opts)
}

/// [`line_distribution_series`] with an explicit validity window and order cap.
pub fn line_distribution_series_with(
    k: i64,
    omega: f64,
    t: f64,
    opts: &SeriesOptions,
) -> Result<f64> {
    check_non_negative("t", t)?;
    if opts.tolerance <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "tol",
            message: "tolerance must be positive".into(),
        });
    }
    if t > opts.max_time {
        return Err(Error::Accuracy {
            context: "line_distribution_series",
            details: format!(
                "t = {t} beyond the series validity window (max {}); use quadrature",
                opts.max_time
            ),
        });
    }

    let mut sum = 0.0f64;
    let mut max_partial = 0.0f64;
    let mut t_pow_over_fact = 1.0f64; // t^order / order!
    let mut quiet_orders = 0;
    let mut converged = false;
    let mut last_order = 0;
    for order in 0..=opts.max_order {
        let b = series_coefficient_b(order, k, omega)?;
        sum += b * t_pow_over_fact;
        max_partial = max_partial.max(sum.abs());
        let term = (b * t_pow_over_fact).abs();
        if order >= k.unsigned_abs() as usize {
            if term <= opts.tolerance * sum.abs().max(f64::MIN_POSITIVE) {
                quiet_orders += 1;
                if quiet_orders >= 3 {
                    converged = true;
                    last_order = order;
                    break;
                }
            } else {
                quiet_orders = 0;
            }
        }
        t_pow_over_fact *= t / (order + 1) as f64;
        last_order = order;
    }
    if !converged && t > 0.0 {
        return Err(Error::Accuracy {
            context: "line_distribution_series",
            details: format!("no convergence within order cap {}", opts.max_order),
        });
    }
    // Cancellation guard: if intermediate sums dwarfed the result, the digits
    // that survived are noise.
    if max_partial > 1e6 * sum.abs() && max_partial > 0.0 {
        return Err(Error::SeriesDivergence {
            order: last_order,
            max_partial,
            result: sum,
        });
    }
    Ok(sum)
}

/// Exact second central moment of the global-dissipator line walk:
/// `2 (omega - 1)^2 t^2 + (omega / 2) t`.
pub fn closed_form_second_moment(omega: f64, t: f64) -> Result<f64> {
    if !(omega > 0.0 && omega <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "omega",
            message: format!("closed-form moment needs omega in (0, 1], got {omega}"),
        });
    }
    check_non_negative("t", t)?;
    Ok(2.0 * (omega - 1.0) * (omega - 1.0) * t * t + 0.5 * omega * t)
}

/// Leading large-t term of an even central moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentLeadingTerm {
    /// Coefficient of the leading power.
    pub coefficient: f64,
    /// The power of `t`: `m` with a coherent component, `m/2` without one.
    pub power: u32,
}

/// Leading large-t behavior of the m-th central moment of the line walk.
///
/// Odd moments vanish identically by symmetry and are rejected.
pub fn moment_leading_term(m: u32, omega: f64) -> Result<MomentLeadingTerm> {
    if m == 0 || !m.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "m",
            message: format!(
                "moment order must be even and positive, got {m} (odd central moments vanish)"
            ),
        });
    }
    check_unit_interval("omega", omega)?;
    let half = (m / 2) as u64;
    let central = binomial_u128(m as u64, half) as f64;
    if omega < 1.0 {
        Ok(MomentLeadingTerm {
            coefficient: central * (omega - 1.0).powi(m as i32),
            power: m,
        })
    } else {
        Ok(MomentLeadingTerm {
            coefficient: factorial(m as u64) / (factorial(half) * 8f64.powi(half as i32)) * central,
            power: m / 2,
        })
    }
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            message: format!("must lie in [0, 1], got {value}"),
        });
    }
    Ok(())
}

fn check_non_negative(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            message: format!("must be finite and non-negative, got {value}"),
        });
    }
    Ok(())
}
