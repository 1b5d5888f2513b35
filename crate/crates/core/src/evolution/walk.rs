//! Grid-evolution driver with the light-cone guard.
//!
//! Runs a walk over a time grid with one of the three propagation routes and
//! collects site distributions and purities. On a truncated line the driver
//! asserts after every grid point that the probability on the two outermost
//! vertices stays below [`GUARD_LIMIT`]; only then can the finite lattice
//! stand in for the infinite line. The rule of thumb for sizing is
//! `half_width >= 2 t_max + 10`, since the hopping band reaches group
//! velocity 2.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::lattice::{AdjacencySpec, DissipatorKind, DissipatorSpec, GraphKind};
use crate::linalg::C64;

use super::eigenbasis::EigenPropagator;
use super::sparse::build_sparse_generator;
use super::{build_generator, devectorize, evolve_grid, vectorize, DensityMatrix, WalkParams};

/// Boundary-probability threshold of the light-cone guard.
pub const GUARD_LIMIT: f64 = 1e-8;

/// Propagation route selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMethod {
    /// Pick a route from the dissipator kind and problem size.
    Auto,
    /// Dense matrix exponential of the full superoperator.
    DenseExpm,
    /// Spectral fast path (global dissipator only).
    EigenBasis,
    /// Sparse exponential action (any dissipator, large lattices).
    TaylorAction,
}

/// State summary at one grid time.
#[derive(Debug, Clone)]
pub struct WalkSnapshot {
    pub time: f64,
    pub distribution: Vec<f64>,
    pub purity: f64,
}

/// Full walk output: vertex labels plus one snapshot per grid time.
#[derive(Debug, Clone)]
pub struct WalkOutput {
    pub positions: Vec<i64>,
    pub snapshots: Vec<WalkSnapshot>,
}

impl WalkOutput {
    /// Probability vector at grid index `i`.
    pub fn distribution(&self, i: usize) -> &[f64] {
        &self.snapshots[i].distribution
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }
}

fn resolve_method(method: WalkMethod, diss: &DissipatorSpec, n: usize) -> WalkMethod {
    match method {
        WalkMethod::Auto => {
            if diss.kind() == DissipatorKind::GlobalSum && n > 24 {
                WalkMethod::EigenBasis
            } else if n > 24 {
                WalkMethod::TaylorAction
            } else {
                WalkMethod::DenseExpm
            }
        }
        explicit => explicit,
    }
}

/// Evolve from `|l><l|` over the grid in `params` and collect snapshots.
pub fn walk(
    adj: &AdjacencySpec,
    diss: &DissipatorSpec,
    params: &WalkParams,
    method: WalkMethod,
) -> Result<WalkOutput> {
    let n = adj.len();
    let start = adj.index_of(params.initial_vertex())?;
    let rho0 = DensityMatrix::basis_state(n, start);
    let positions: Vec<i64> = (0..n).map(|i| adj.label_of(i)).collect();
    let times = params.times();
    // Amortize the O(n^3) positivity check over the grid; Hermiticity and
    // trace stay checked at every point, and the final state is always fully
    // validated.
    let psd_stride = (times.len() / 8).max(1);

    let resolved = resolve_method(method, diss, n);
    let snapshots = match resolved {
        WalkMethod::DenseExpm => {
            let gen = build_generator(adj, diss, params.omega())?;
            let states = evolve_grid(&gen, &rho0, times)?;
            times
                .iter()
                .zip(&states)
                .map(|(&time, state)| WalkSnapshot {
                    time,
                    distribution: state.diagonal(),
                    purity: super::purity(state),
                })
                .collect()
        }
        WalkMethod::EigenBasis => {
            let prop = EigenPropagator::new(adj, diss, params.omega())?;
            let mut out = Vec::with_capacity(times.len());
            for (i, &time) in times.iter().enumerate() {
                if i % psd_stride == 0 || i + 1 == times.len() {
                    let state = prop.evolve(&rho0, time)?;
                    out.push(WalkSnapshot {
                        time,
                        distribution: state.diagonal(),
                        purity: super::purity(&state),
                    });
                } else {
                    let snap = prop.snapshot(&rho0, time)?;
                    out.push(WalkSnapshot {
                        time,
                        distribution: snap.distribution,
                        purity: snap.purity,
                    });
                }
            }
            out
        }
        WalkMethod::TaylorAction => {
            let gen = build_sparse_generator(adj, diss, params.omega())?;
            let mut v = vectorize(&rho0);
            let mut prev = 0.0f64;
            let mut out = Vec::with_capacity(times.len());
            for (i, &time) in times.iter().enumerate() {
                v = gen.expm_action(time - prev, &v)?;
                prev = time;
                let rho = devectorize(&v.view(), n)?;
                let check_psd = i % psd_stride == 0 || i + 1 == times.len();
                let state = DensityMatrix::try_new_psd_checked(rho, check_psd)?;
                out.push(WalkSnapshot {
                    time,
                    distribution: state.diagonal(),
                    purity: super::purity(&state),
                });
            }
            out
        }
        WalkMethod::Auto => unreachable!("resolved above"),
    };

    if adj.kind() == GraphKind::TruncatedLine {
        for snap in &snapshots {
            let boundary = snap.distribution[0] + snap.distribution[n - 1];
            if boundary >= GUARD_LIMIT {
                return Err(Error::TruncationGuard {
                    time: snap.time,
                    boundary_probability: boundary,
                    limit: GUARD_LIMIT,
                });
            }
        }
    }

    Ok(WalkOutput {
        positions,
        snapshots,
    })
}

/// Half-width such that the light cone of a run to `t_max` stays well inside
/// the lattice: `ceil(2 t_max) + 10`.
pub fn light_cone_half_width(t_max: f64) -> usize {
    (2.0 * t_max).ceil() as usize + 10
}

/// Evolve an arbitrary (already validated) state over a grid with the dense
/// route, returning full density matrices. Convenience wrapper used by the
/// purity sweeps, where the initial state is reused across many omegas.
pub fn evolve_states_dense(
    adj: &AdjacencySpec,
    diss: &DissipatorSpec,
    omega: f64,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let gen = build_generator(adj, diss, omega)?;
    evolve_grid(&gen, rho0, times)
}

/// Checked reconstruction of a density matrix from a raw vectorized state.
#[allow(dead_code)]
pub(crate) fn state_from_vec(v: &[C64], n: usize) -> Result<DensityMatrix> {
    let m = Array2::from_shape_fn((n, n), |(i, j)| v[i * n + j]);
    DensityMatrix::try_new(m)
}
