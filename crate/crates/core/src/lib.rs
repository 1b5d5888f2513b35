//! Quantum stochastic walks on a line under the GKSL master equation.
//!
//! The crate provides three mutually cross-checking routes to the walker's
//! probability distribution:
//!
//! 1. numerical evolution of the vectorized density matrix under the
//!    interpolated coherent/dissipative generator ([`evolution`]),
//! 2. closed-form spectral and integral expressions for the global-dissipator
//!    walk on segments and on the infinite line ([`analytic`]), and
//! 3. short-time Taylor series for the line distribution ([`analytic`]).
//!
//! On top of the distributions, [`moments`] measures central moments and fits
//! the asymptotic scaling exponent of the mean squared displacement, which
//! classifies the walk as diffusive, super-diffusive, or ballistic.

pub mod analytic;
pub mod combinatorics;
pub mod error;
pub mod evolution;
pub mod expm;
pub mod lattice;
pub mod linalg;
pub mod moments;
pub mod quadrature;

pub use error::{Error, Result};
pub use evolution::{DensityMatrix, Generator, WalkParams};
pub use lattice::{AdjacencySpec, DissipatorKind, DissipatorSpec, GraphKind};
pub use linalg::C64;
pub use moments::{MomentSeries, Regime, ScalingFit};
