//! Time evolution of the walker's density matrix.
//!
//! The master equation is turned into a linear ODE by vectorization,
//! `vec(|i><j|) = |i> (x) |j>`, under which
//!
//! ```text
//! d/dt vec(rho) = G vec(rho),
//! G = -i (1-w) (H (x) 1 - 1 (x) H^T)
//!     + w sum_k [ L_k (x) conj(L_k)
//!                 - 1/2 (L_k^dag L_k) (x) 1
//!                 - 1/2 1 (x) (L_k^T conj(L_k)) ].
//! ```
//!
//! Three propagation routes are provided and cross-checked against each
//! other: the dense matrix exponential of `G` ([`evolve`]), a spectral fast
//! path for the global dissipator ([`eigenbasis::EigenPropagator`]), and a
//! sparse exponential-action path for lattices too large to form `G` densely
//! ([`sparse::SparseGenerator`]).

pub mod eigenbasis;
pub mod sparse;
pub mod walk;

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::expm;
use crate::lattice::{AdjacencySpec, DissipatorSpec};
use crate::linalg::{self, C64};

pub use eigenbasis::EigenPropagator;
pub use sparse::{build_sparse_generator, SparseGenerator};
pub use walk::{walk, WalkMethod, WalkOutput, WalkSnapshot};

/// Entrywise Hermiticity tolerance for a valid state.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Trace-deviation tolerance for a valid state.
pub const TRACE_TOL: f64 = 1e-12;
/// A state may dip this far below positive semidefiniteness before the
/// round-off explanation stops being credible and an error is raised.
pub const PSD_TOL: f64 = 1e-10;

/// All jump rates are fixed to one.
pub const GAMMA: f64 = 1.0;

/// A Hermitian, unit-trace, positive-semidefinite matrix.
///
/// Construction validates all three properties (within [`HERMITICITY_TOL`],
/// [`TRACE_TOL`], and [`PSD_TOL`]); violations are reported as errors rather
/// than clipped away.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    data: Array2<C64>,
}

impl DensityMatrix {
    pub fn try_new(data: Array2<C64>) -> Result<Self> {
        Self::validate(&data, true)?;
        Ok(Self { data })
    }

    /// Internal constructor for evolution drivers that amortize the O(n^3)
    /// positivity check across a grid; Hermiticity and trace are still
    /// enforced on every state.
    pub(crate) fn try_new_psd_checked(data: Array2<C64>, check_psd: bool) -> Result<Self> {
        Self::validate(&data, check_psd)?;
        Ok(Self { data })
    }

    fn validate(data: &Array2<C64>, check_psd: bool) -> Result<()> {
        let n = data.nrows();
        if n == 0 || data.ncols() != n {
            return Err(Error::InvalidSize(format!(
                "density matrix must be square and non-empty, got {}x{}",
                n,
                data.ncols()
            )));
        }
        let mut herm_dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                herm_dev = herm_dev.max((data[[i, j]] - data[[j, i]].conj()).norm());
            }
        }
        if herm_dev > HERMITICITY_TOL {
            return Err(Error::NumericalFailure {
                context: "density matrix",
                details: format!("Hermiticity violated by {herm_dev:.3e}"),
            });
        }
        let trace: C64 = (0..n).map(|i| data[[i, i]]).sum();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::NumericalFailure {
                context: "density matrix",
                details: format!("trace {trace} deviates from 1 beyond {TRACE_TOL:.1e}"),
            });
        }
        if check_psd && !linalg::is_positive_semidefinite_within(&data.view(), PSD_TOL) {
            return Err(Error::NumericalFailure {
                context: "density matrix",
                details: format!("eigenvalue below -{PSD_TOL:.1e}; state is not positive"),
            });
        }
        Ok(())
    }

    /// The pure state `|index><index|`.
    pub fn basis_state(n: usize, index: usize) -> Self {
        assert!(index < n, "basis index out of range");
        let mut data = Array2::zeros((n, n));
        data[[index, index]] = C64::ONE;
        Self { data }
    }

    /// The maximally mixed state `1/n`.
    pub fn maximally_mixed(n: usize) -> Self {
        assert!(n > 0);
        Self {
            data: Array2::from_diag_elem(n, C64::new(1.0 / n as f64, 0.0)),
        }
    }

    /// Pure state from (not necessarily normalized) amplitudes.
    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "amplitudes",
                message: "cannot normalize the zero vector".into(),
            });
        }
        let n = amplitudes.len();
        let data = Array2::from_shape_fn((n, n), |(i, j)| {
            amplitudes[i] * amplitudes[j].conj() / norm_sq
        });
        Self::try_new(data)
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.data
    }

    /// Site probabilities (the real diagonal).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[[i, i]].re).collect()
    }

    /// Smallest eigenvalue, for positivity diagnostics.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = linalg::hermitian_eigenvalues(&self.data.view())?;
        Ok(eig[0])
    }
}

/// Purity `Tr rho^2`; equals the squared Frobenius norm for Hermitian input.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Stack a density matrix row by row: component `i n + j` is `rho_{ij}`.
pub fn vectorize(rho: &DensityMatrix) -> Array1<C64> {
    vectorize_matrix(&rho.data)
}

pub(crate) fn vectorize_matrix(m: &Array2<C64>) -> Array1<C64> {
    Array1::from_iter(m.iter().copied())
}

/// Inverse of [`vectorize`]: reshape a length-n^2 vector back to a matrix.
pub fn devectorize(v: &ArrayView1<C64>, n: usize) -> Result<Array2<C64>> {
    if v.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: v.len(),
        });
    }
    Ok(Array2::from_shape_fn((n, n), |(i, j)| v[i * n + j]))
}

/// Walk configuration: interpolation parameter, time grid, and start vertex.
#[derive(Debug, Clone)]
pub struct WalkParams {
    omega: f64,
    times: Vec<f64>,
    initial_vertex: i64,
    gamma: f64,
}

impl WalkParams {
    /// Validates `omega` in [0, 1], a strictly increasing non-negative time
    /// grid, and a start label that exists on the graph.
    pub fn new(
        adj: &AdjacencySpec,
        omega: f64,
        times: Vec<f64>,
        initial_vertex: i64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega) {
            return Err(Error::InvalidParameter {
                name: "omega",
                message: format!("must lie in [0, 1], got {omega}"),
            });
        }
        if times.is_empty() {
            return Err(Error::InvalidParameter {
                name: "time_grid",
                message: "time grid is empty".into(),
            });
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "time_grid",
                    message: format!("time {t} at position {i} is not a finite non-negative value"),
                });
            }
            if i > 0 && t <= times[i - 1] {
                return Err(Error::InvalidParameter {
                    name: "time_grid",
                    message: format!("grid must be strictly increasing, violated at position {i}"),
                });
            }
        }
        adj.index_of(initial_vertex)?;
        Ok(Self {
            omega,
            times,
            initial_vertex,
            gamma: GAMMA,
        })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn initial_vertex(&self) -> i64 {
        self.initial_vertex
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The vectorized GKSL generator as a dense `n^2 x n^2` matrix.
#[derive(Debug, Clone)]
pub struct Generator {
    sites: usize,
    matrix: Array2<C64>,
}

impl Generator {
    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.sites * self.sites
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }
}

/// Assemble the dense generator for Hamiltonian `adj` (the adjacency matrix),
/// jump operators `diss`, and interpolation `omega`.
pub fn build_generator(
    adj: &AdjacencySpec,
    diss: &DissipatorSpec,
    omega: f64,
) -> Result<Generator> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::InvalidParameter {
            name: "omega",
            message: format!("must lie in [0, 1], got {omega}"),
        });
    }
    let n = adj.len();
    for op in diss.operators() {
        if op.nrows() != n || op.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: op.nrows(),
            });
        }
    }
    let n2 = n * n;
    let mut g = Array2::<C64>::zeros((n2, n2));
    let h = adj.matrix();

    // Coherent part: -i (1-w) (H (x) 1 - 1 (x) H^T); H is real symmetric.
    if omega < 1.0 {
        let c = C64::new(0.0, -(1.0 - omega) * GAMMA);
        for i in 0..n {
            for p in 0..n {
                let hip = h[[i, p]];
                if hip == 0.0 {
                    continue;
                }
                for r in 0..n {
                    g[[i * n + r, p * n + r]] += c * hip;
                    g[[r * n + i, r * n + p]] -= c * hip;
                }
            }
        }
    }

    // Dissipative part; jump operators are real here, so conjugates and
    // plain transposes coincide.
    if omega > 0.0 {
        for l_op in diss.operators() {
            let w = C64::new(omega * GAMMA, 0.0);
            for i in 0..n {
                for p in 0..n {
                    let lip = l_op[[i, p]];
                    if lip == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        for q in 0..n {
                            let ljq = l_op[[j, q]];
                            if ljq == 0.0 {
                                continue;
                            }
                            g[[i * n + j, p * n + q]] += w * lip * ljq;
                        }
                    }
                }
            }
            // L^T L is shared by both anticommutator halves.
            let ltl = l_op.t().dot(l_op);
            for i in 0..n {
                for p in 0..n {
                    let v = ltl[[i, p]];
                    if v == 0.0 {
                        continue;
                    }
                    let hw = C64::new(-0.5 * omega * GAMMA * v, 0.0);
                    for r in 0..n {
                        g[[i * n + r, p * n + r]] += hw;
                        g[[r * n + i, r * n + p]] += hw;
                    }
                }
            }
        }
    }

    Ok(Generator {
        sites: n,
        matrix: g,
    })
}

/// Propagate `rho0` to time `t` with the dense matrix exponential of `t G`.
pub fn evolve(gen: &Generator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t",
            message: format!("must be finite and non-negative, got {t}"),
        });
    }
    if rho0.dim() != gen.sites {
        return Err(Error::DimensionMismatch {
            expected: gen.sites,
            got: rho0.dim(),
        });
    }
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let tg = gen.matrix.mapv(|z| z * t);
    let propagator = expm::expm(&tg.view())?;
    let v = propagator.dot(&vectorize(rho0));
    let rho = devectorize(&v.view(), gen.sites)?;
    DensityMatrix::try_new(rho)
}

/// Propagate over a strictly increasing grid, reusing the step propagator
/// whenever consecutive gaps repeat (the common uniform-grid case). The
/// accumulated error stays bounded by the per-step tolerance times the step
/// count.
pub fn evolve_grid(
    gen: &Generator,
    rho0: &DensityMatrix,
    times: &[f64],
) -> Result<Vec<DensityMatrix>> {
    let mut cache: std::collections::HashMap<u64, Array2<C64>> = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(times.len());
    let mut v = vectorize(rho0);
    let mut prev = 0.0f64;
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() || t < prev || (i > 0 && t == prev) {
            return Err(Error::InvalidParameter {
                name: "time_grid",
                message: format!(
                    "grid must be strictly increasing and non-negative at position {i}"
                ),
            });
        }
        let dt = t - prev;
        if dt > 0.0 {
            let step = match cache.entry(dt.to_bits()) {
                std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
                std::collections::hash_map::Entry::Vacant(e) => {
                    let tg = gen.matrix.mapv(|z| z * dt);
                    e.insert(expm::expm(&tg.view())?)
                }
            };
            v = step.dot(&v);
        }
        prev = t;
        let rho = devectorize(&v.view(), gen.sites)?;
        out.push(DensityMatrix::try_new(rho)?);
    }
    Ok(out)
}

/// Whether the spectrum of `rho_out` is majorized by the spectrum of
/// `rho_in`: every partial sum of the descending eigenvalues of `rho_out`
/// stays at or below the corresponding sum for `rho_in` (within 1e-10), with
/// equal totals. This is the ordering unital channels impose.
pub fn check_majorization(rho_out: &DensityMatrix, rho_in: &DensityMatrix) -> Result<bool> {
    if rho_out.dim() != rho_in.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho_in.dim(),
            got: rho_out.dim(),
        });
    }
    let slack = 1e-10;
    let mut out_eig = linalg::hermitian_eigenvalues(&rho_out.matrix().view())?;
    let mut in_eig = linalg::hermitian_eigenvalues(&rho_in.matrix().view())?;
    out_eig.reverse();
    in_eig.reverse();
    let mut out_acc = 0.0;
    let mut in_acc = 0.0;
    for (o, i) in out_eig.iter().zip(&in_eig) {
        out_acc += o;
        in_acc += i;
        if out_acc > in_acc + slack {
            return Ok(false);
        }
    }
    Ok((out_acc - in_acc).abs() <= slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice;
    use approx::assert_abs_diff_eq;

    fn n2_global_generator(omega: f64) -> Generator {
        let adj = lattice::build_segment(2).unwrap();
        let diss = lattice::build_global_dissipator(&adj);
        build_generator(&adj, &diss, omega).unwrap()
    }

    #[test]
    fn vectorize_follows_row_major_convention() {
        // |0><1| on two sites lands at component 0*2 + 1 = 1.
        let mut m = Array2::<C64>::zeros((2, 2));
        m[[0, 1]] = C64::ONE;
        let v = vectorize_matrix(&m);
        assert_eq!(v[1], C64::ONE);
        assert_eq!(v[0], C64::ZERO);

        let mixed = DensityMatrix::maximally_mixed(2);
        let vm = vectorize(&mixed);
        assert_eq!(
            vm.to_vec(),
            vec![C64::new(0.5, 0.0), C64::ZERO, C64::ZERO, C64::new(0.5, 0.0)]
        );
    }

    #[test]
    fn devectorize_inverts_vectorize() {
        let rho = DensityMatrix::from_pure(&[
            C64::new(0.6, 0.1),
            C64::new(0.0, -0.4),
            C64::new(0.5, 0.0),
        ])
        .unwrap();
        let v = vectorize(&rho);
        let back = devectorize(&v.view(), 3).unwrap();
        assert_eq!(&back, rho.matrix());
        assert!(devectorize(&v.view(), 2).is_err());
    }

    #[test]
    fn generator_limits() {
        let adj = lattice::build_segment(3).unwrap();
        let diss = lattice::build_global_dissipator(&adj);
        // At omega = 0 only the commutator part survives: G = -i(H x 1 - 1 x H).
        let g0 = build_generator(&adj, &diss, 0.0).unwrap();
        let h = adj.matrix();
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                for p in 0..n {
                    for q in 0..n {
                        let mut expect = C64::ZERO;
                        if j == q {
                            expect += C64::new(0.0, -1.0) * h[[i, p]];
                        }
                        if i == p {
                            expect -= C64::new(0.0, -1.0) * h[[q, j]];
                        }
                        assert_abs_diff_eq!(
                            (g0.matrix()[[i * n + j, p * n + q]] - expect).norm(),
                            0.0,
                            epsilon = 1e-15
                        );
                    }
                }
            }
        }
        // At omega = 1 the Hamiltonian term is absent entirely: the generator
        // of the purely dissipative walk is real.
        let g1 = build_generator(&adj, &diss, 1.0).unwrap();
        for z in g1.matrix().iter() {
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn evolve_preserves_initial_state_at_zero_time() {
        let gen = n2_global_generator(0.5);
        let rho0 = DensityMatrix::basis_state(2, 0);
        let rho = evolve(&gen, &rho0, 0.0).unwrap();
        assert_eq!(rho.matrix(), rho0.matrix());
    }

    #[test]
    fn fully_dissipative_two_site_closed_form() {
        // diag(exp(tG) vec(|0><0|)) = (1/2 (1 + e^{-t/2}), 1/2 (1 - e^{-t/2})).
        let gen = n2_global_generator(1.0);
        let rho0 = DensityMatrix::basis_state(2, 0);
        for t in [0.3, 1.0, 2.0, 7.5] {
            let rho = evolve(&gen, &rho0, t).unwrap();
            let d = rho.diagonal();
            assert_abs_diff_eq!(d[0], 0.5 * (1.0 + (-t / 2.0).exp()), epsilon = 1e-12);
            assert_abs_diff_eq!(d[1], 0.5 * (1.0 - (-t / 2.0).exp()), epsilon = 1e-12);
        }
        let rho = evolve(&gen, &rho0, 2.0).unwrap();
        assert_abs_diff_eq!(rho.diagonal()[0], 0.6839397205857212, epsilon = 1e-12);
    }

    #[test]
    fn coherent_evolution_keeps_purity() {
        let adj = lattice::build_segment(5).unwrap();
        let diss = lattice::build_global_dissipator(&adj);
        let gen = build_generator(&adj, &diss, 0.0).unwrap();
        let rho0 = DensityMatrix::basis_state(5, 2);
        for t in [0.5, 2.0, 11.0] {
            let rho = evolve(&gen, &rho0, t).unwrap();
            assert_abs_diff_eq!(purity(&rho), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn purity_limits() {
        assert_abs_diff_eq!(
            purity(&DensityMatrix::basis_state(7, 3)),
            1.0,
            epsilon = 0.0
        );
        assert_abs_diff_eq!(
            purity(&DensityMatrix::maximally_mixed(4)),
            0.25,
            epsilon = 1e-15
        );
        // Long-time two-site dissipative walk approaches the maximally mixed
        // state, purity 1/2.
        let gen = n2_global_generator(1.0);
        let rho = evolve(&gen, &DensityMatrix::basis_state(2, 0), 60.0).unwrap();
        assert_abs_diff_eq!(purity(&rho), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn majorization_basics() {
        let pure = DensityMatrix::basis_state(3, 1);
        let mixed = DensityMatrix::maximally_mixed(3);
        // Reflexive.
        assert!(check_majorization(&pure, &pure).unwrap());
        // The maximally mixed state is majorized by everything...
        assert!(check_majorization(&mixed, &pure).unwrap());
        // ...and a pure state majorizes but is not majorized by a mixed one.
        assert!(!check_majorization(&pure, &mixed).unwrap());
        assert!(check_majorization(&pure, &DensityMatrix::basis_state(2, 0)).is_err());
    }

    #[test]
    fn walk_params_validation() {
        let adj = lattice::build_segment(4).unwrap();
        assert!(WalkParams::new(&adj, 0.5, vec![0.0, 1.0, 2.0], 1).is_ok());
        assert!(WalkParams::new(&adj, 1.5, vec![1.0], 1).is_err());
        assert!(WalkParams::new(&adj, 0.5, vec![1.0, 1.0], 1).is_err());
        assert!(WalkParams::new(&adj, 0.5, vec![-1.0], 1).is_err());
        assert!(WalkParams::new(&adj, 0.5, vec![], 1).is_err());
        assert!(WalkParams::new(&adj, 0.5, vec![1.0], 5).is_err());
        let p = WalkParams::new(&adj, 0.5, vec![1.0], 2).unwrap();
        assert_eq!(p.gamma(), 1.0);
    }

    #[test]
    fn density_matrix_rejects_bad_states() {
        // Non-Hermitian.
        let mut m = Array2::<C64>::zeros((2, 2));
        m[[0, 0]] = C64::ONE;
        m[[0, 1]] = C64::new(0.1, 0.0);
        assert!(DensityMatrix::try_new(m).is_err());
        // Wrong trace.
        let m = Array2::from_diag_elem(2, C64::new(1.0, 0.0));
        assert!(DensityMatrix::try_new(m).is_err());
        // Not positive.
        let mut m = Array2::<C64>::zeros((2, 2));
        m[[0, 0]] = C64::new(1.5, 0.0);
        m[[1, 1]] = C64::new(-0.5, 0.0);
        assert!(DensityMatrix::try_new(m).is_err());
    }

    #[test]
    fn generator_annihilates_trace_component() {
        // Trace of devec(G vec(rho)) must vanish for arbitrary Hermitian rho:
        // the semigroup is trace preserving.
        let adj = lattice::build_segment(4).unwrap();
        for (diss, omega) in [
            (lattice::build_global_dissipator(&adj), 0.7),
            (lattice::build_local_dissipators(&adj), 0.7),
            (lattice::build_local_dissipators(&adj), 1.0),
        ] {
            let gen = build_generator(&adj, &diss, omega).unwrap();
            let rho = DensityMatrix::from_pure(&[
                C64::new(0.3, 0.2),
                C64::new(-0.1, 0.5),
                C64::new(0.4, 0.0),
                C64::new(0.0, -0.6),
            ])
            .unwrap();
            let dv = gen.matrix().dot(&vectorize(&rho));
            let drho = devectorize(&dv.view(), 4).unwrap();
            let trace: C64 = (0..4).map(|i| drho[[i, i]]).sum();
            assert_abs_diff_eq!(trace.norm(), 0.0, epsilon = 1e-13);
        }
    }
}
