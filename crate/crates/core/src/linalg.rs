//! Dense complex linear-algebra kernels.
//!
//! Everything here works on `ndarray` matrices of [`C64`] at desk scale
//! (dimensions up to a few thousand). The kernels are deterministic: identical
//! inputs produce bit-identical outputs regardless of thread count, which the
//! CSV-reproducibility contract of the CLI relies on.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Conjugate transpose of a matrix.
pub fn dagger(a: &ArrayView2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Maximum absolute column sum (the induced 1-norm).
pub fn one_norm(a: &ArrayView2<C64>) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

/// Largest entrywise absolute value.
pub fn max_abs(a: &ArrayView2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Dense matrix product. Row-major accumulation order is fixed, so results
/// are reproducible.
pub fn matmul(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Array2<C64> {
    let (m, ka) = a.dim();
    let (kb, n) = b.dim();
    assert_eq!(ka, kb, "inner dimensions must agree");
    let mut out = Array2::<C64>::zeros((m, n));
    // i-k-j loop order keeps the inner accesses contiguous for row-major data.
    for i in 0..m {
        let mut out_row = out.row_mut(i);
        let out_slice = out_row.as_slice_mut().expect("row-major output");
        for k in 0..ka {
            let aik = a[[i, k]];
            if aik == C64::ZERO {
                continue;
            }
            let b_row = b.row(k);
            let b_slice = b_row.to_slice().expect("row-major rhs");
            for (o, &bkj) in out_slice.iter_mut().zip(b_slice) {
                *o += aik * bkj;
            }
        }
    }
    out
}

/// Identity matrix of dimension `n`.
pub fn eye(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::ONE)
}

/// LU decomposition with partial pivoting, stored packed.
pub struct LuFactors {
    lu: Array2<C64>,
    pivots: Vec<usize>,
}

/// Factor a square matrix, failing on (numerical) singularity.
pub fn lu_factor(a: &ArrayView2<C64>) -> Result<LuFactors> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "LU requires a square matrix");
    let mut lu = a.to_owned();
    let mut pivots = vec![0usize; n];
    let scale = max_abs(&a.view()).max(1.0);

    for k in 0..n {
        // Partial pivot: largest magnitude in column k at or below the diagonal.
        let mut p = k;
        let mut best = lu[[k, k]].norm();
        for i in (k + 1)..n {
            let v = lu[[i, k]].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best < 1e-300 * scale.max(1.0) {
            return Err(Error::NumericalFailure {
                context: "lu_factor",
                details: format!(
                    "pivot {best:.3e} too small at step {k} (matrix scale {scale:.3e})"
                ),
            });
        }
        if p != k {
            for j in 0..n {
                lu.swap([k, j], [p, j]);
            }
        }
        pivots[k] = p;

        let inv_pivot = C64::ONE / lu[[k, k]];
        for i in (k + 1)..n {
            let factor = lu[[i, k]] * inv_pivot;
            lu[[i, k]] = factor;
            if factor == C64::ZERO {
                continue;
            }
            let (above, mut below) = lu.view_mut().split_at(ndarray::Axis(0), i);
            let pivot_row = above.row(k);
            let pivot_slice = pivot_row.to_slice().expect("row-major");
            let mut row_i = below.row_mut(0);
            let row_slice = row_i.as_slice_mut().expect("row-major");
            for j in (k + 1)..n {
                row_slice[j] -= factor * pivot_slice[j];
            }
        }
    }
    Ok(LuFactors { lu, pivots })
}

impl LuFactors {
    /// Solve `A X = B` for a matrix right-hand side.
    pub fn solve_matrix(&self, b: &ArrayView2<C64>) -> Array2<C64> {
        let n = self.lu.nrows();
        assert_eq!(b.nrows(), n, "rhs rows must match");
        let mut x = b.to_owned();
        // Apply row swaps.
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                for j in 0..x.ncols() {
                    x.swap([k, j], [p, j]);
                }
            }
        }
        // Forward substitution with unit lower triangle.
        for i in 1..n {
            for k in 0..i {
                let l = self.lu[[i, k]];
                if l == C64::ZERO {
                    continue;
                }
                let (upper, mut lower) = x.view_mut().split_at(ndarray::Axis(0), i);
                let xk = upper.row(k);
                let mut xi = lower.row_mut(0);
                xi.zip_mut_with(&xk, |a, &b| *a -= l * b);
            }
        }
        // Back substitution.
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let u = self.lu[[i, k]];
                if u == C64::ZERO {
                    continue;
                }
                let (mut upper, lower) = x.view_mut().split_at(ndarray::Axis(0), k);
                let xk = lower.row(0).to_owned();
                let mut xi = upper.row_mut(i);
                xi.zip_mut_with(&xk, |a, &b| *a -= u * b);
            }
            let inv = C64::ONE / self.lu[[i, i]];
            x.row_mut(i).mapv_inplace(|v| v * inv);
        }
        x
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
///
/// Only the spectrum is accumulated; this is enough for positivity and
/// majorization checks and avoids carrying the rotation product.
pub fn hermitian_eigenvalues(a: &ArrayView2<C64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalues require a square matrix");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut m = a.to_owned();
    let scale = max_abs(&a.view());
    if scale == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let tol = 1e-14 * scale;

    let max_sweeps = 40;
    for _ in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]].norm_sqr();
            }
        }
        if off.sqrt() <= tol * (n as f64) {
            let mut eig: Vec<f64> = (0..n).map(|i| m[[i, i]].re).collect();
            eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
            return Ok(eig);
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                let mag = apq.norm();
                if mag <= tol * 1e-2 {
                    continue;
                }
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let phase = apq / mag;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Columns p and q: A <- A R with R mixing (p, q).
                for r in 0..n {
                    let arp = m[[r, p]];
                    let arq = m[[r, q]];
                    m[[r, p]] = c * arp - s * phase.conj() * arq;
                    m[[r, q]] = s * phase * arp + c * arq;
                }
                // Rows p and q: A <- R^dagger A.
                for r in 0..n {
                    let apr = m[[p, r]];
                    let aqr = m[[q, r]];
                    m[[p, r]] = c * apr - s * phase * aqr;
                    m[[q, r]] = s * phase.conj() * apr + c * aqr;
                }
                // Clean the rotated pair to keep the matrix Hermitian to
                // working precision.
                m[[p, q]] = C64::ZERO;
                m[[q, p]] = C64::ZERO;
                m[[p, p]] = C64::new(m[[p, p]].re, 0.0);
                m[[q, q]] = C64::new(m[[q, q]].re, 0.0);
            }
        }
    }
    Err(Error::NumericalFailure {
        context: "hermitian_eigenvalues",
        details: format!("Jacobi sweep limit ({max_sweeps}) exceeded at dimension {n}"),
    })
}

/// Whether a Hermitian matrix has all eigenvalues at or above `-tol`,
/// decided by attempting a Cholesky factorization of `A + tol * I`.
pub fn is_positive_semidefinite_within(a: &ArrayView2<C64>, tol: f64) -> bool {
    let n = a.nrows();
    let mut l = a.to_owned();
    for i in 0..n {
        l[[i, i]] += C64::new(tol, 0.0);
    }
    for j in 0..n {
        let mut d = l[[j, j]].re;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let djj = d.sqrt();
        l[[j, j]] = C64::new(djj, 0.0);
        for i in (j + 1)..n {
            let mut v = l[[i, j]];
            for k in 0..j {
                v -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = v / djj;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn random_complex(n: usize, seed: u64) -> Array2<C64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, n), |_| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn matmul_matches_by_hand() {
        let a = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(2.0, 0.0), C64::new(0.0, 0.0)]
        ];
        let b = array![
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, -1.0)]
        ];
        let c = matmul(&a.view(), &b.view());
        assert_eq!(c[[0, 0]], C64::new(0.0, 1.0));
        assert_eq!(c[[0, 1]], C64::new(2.0, 0.0));
        assert_eq!(c[[1, 0]], C64::new(0.0, 0.0));
        assert_eq!(c[[1, 1]], C64::new(2.0, 0.0));
    }

    #[test]
    fn lu_solves_random_system() {
        let a = random_complex(24, 7);
        let b = random_complex(24, 8);
        let lu = lu_factor(&a.view()).unwrap();
        let x = lu.solve_matrix(&b.view());
        let residual = &matmul(&a.view(), &x.view()) - &b;
        assert!(max_abs(&residual.view()) < 1e-11);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = Array2::<C64>::zeros((3, 3));
        assert!(lu_factor(&a.view()).is_err());
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        // Tridiagonal Toeplitz with 1/2 off-diagonals has spectrum
        // cos(i pi / (n + 1)).
        let n = 9;
        let mut a = Array2::<C64>::zeros((n, n));
        for i in 0..n - 1 {
            a[[i, i + 1]] = C64::new(0.5, 0.0);
            a[[i + 1, i]] = C64::new(0.5, 0.0);
        }
        let mut expected: Vec<f64> = (1..=n)
            .map(|i| (i as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let eig = hermitian_eigenvalues(&a.view()).unwrap();
        for (e, x) in eig.iter().zip(&expected) {
            assert_abs_diff_eq!(e, x, epsilon = 1e-12);
        }
    }

    #[test]
    fn jacobi_handles_complex_offdiagonals() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let a = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            [C64::new(0.0, -1.0), C64::new(1.0, 0.0)]
        ];
        let eig = hermitian_eigenvalues(&a.view()).unwrap();
        assert_abs_diff_eq!(eig[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn psd_check_accepts_and_rejects() {
        let a = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, 0.0)]
        ];
        assert!(is_positive_semidefinite_within(&a.view(), 1e-10));
        let b = array![
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1e-6, 0.0)]
        ];
        assert!(!is_positive_semidefinite_within(&b.view(), 1e-10));
    }
}
