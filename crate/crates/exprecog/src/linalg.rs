//! Dense complex linear algebra kernels: partially pivoted LU determinants,
//! SVD-based numerical rank and least squares (backed by nalgebra), and
//! eigenvalues of complex upper-Hessenberg matrices by shifted QR, used for
//! companion-matrix polynomial root finding.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn all_finite(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn lu_determinant(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant needs a square matrix");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let mut a = m.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let (pivot_row, pivot_mag) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("non-empty column");
        if pivot_mag == 0.0 {
            return ZERO;
        }
        if pivot_row != k {
            a.swap_rows(pivot_row, k);
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in (k + 1)..n {
            let factor = a[(i, k)] / pivot;
            if factor.norm() == 0.0 {
                continue;
            }
            for j in (k + 1)..n {
                let upper = a[(k, j)];
                a[(i, j)] -= factor * upper;
            }
        }
    }
    det
}

/// Singular values, largest first.
pub fn singular_values(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if !all_finite(m) {
        return Err(Error::NonFiniteInput("matrix has NaN or infinite entries".into()));
    }
    let svd = m.clone().svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Count of singular values above `rel_tol` × the largest one; 0 for the
/// zero matrix.
pub fn numerical_rank(m: &DMatrix<Complex64>, rel_tol: f64) -> Result<usize> {
    if rel_tol <= 0.0 {
        return Err(Error::invalid("rel_tol must be positive"));
    }
    let sv = singular_values(m)?;
    let Some(&smax) = sv.first() else { return Ok(0) };
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > rel_tol * smax).count())
}

/// Minimum-norm least squares via SVD with a relative truncation cutoff.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: Vec<Complex64>,
    /// ‖A·x − b‖₂.
    pub residual_norm: f64,
    /// σ_max / σ_min over all singular values (∞ if σ_min = 0).
    pub condition: f64,
    /// Numerical rank at the truncation cutoff.
    pub rank: usize,
}

pub fn lstsq(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    rank_rel_tol: f64,
) -> Result<LeastSquares> {
    if !all_finite(a) || b.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFiniteInput("least-squares system has non-finite entries".into()));
    }
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.len() });
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let smin = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    let cutoff = rank_rel_tol * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    let x = svd
        .solve(b, cutoff)
        .map_err(|e| Error::invalid(format!("svd solve failed: {e}")))?;
    let residual_norm = (a * &x - b).norm();
    Ok(LeastSquares {
        solution: x.iter().copied().collect(),
        residual_norm,
        condition,
        rank,
    })
}

/// All roots (with repetitions) of the monic polynomial
/// z^n + c_{n−1} z^{n−1} + ⋯ + c_0, as eigenvalues of its companion matrix.
///
/// `low_coeffs` holds c_0, …, c_{n−1}; the leading 1 is implied.
pub fn companion_roots(low_coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = low_coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let mut c = DMatrix::from_element(n, n, ZERO);
    for i in 1..n {
        c[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        c[(i, n - 1)] = -low_coeffs[i];
    }
    hessenberg_eigenvalues(c)
}

/// Eigenvalues of a complex upper-Hessenberg matrix by explicitly shifted QR
/// with Wilkinson shifts and bottom deflation.
pub fn hessenberg_eigenvalues(mut h: DMatrix<Complex64>) -> Vec<Complex64> {
    let n = h.nrows();
    assert_eq!(n, h.ncols());
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n;
    let mut stagnation = 0usize;
    let scale = h.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);

    let negligible = |h: &DMatrix<Complex64>, i: usize| -> bool {
        let local = h[(i - 1, i - 1)].norm() + h[(i, i)].norm();
        let bound = f64::EPSILON * if local > 0.0 { local } else { scale };
        h[(i, i - 1)].norm() <= bound
    };

    while hi > 0 {
        if hi == 1 {
            eigs.push(h[(0, 0)]);
            break;
        }
        if negligible(&h, hi - 1) {
            eigs.push(h[(hi - 1, hi - 1)]);
            hi -= 1;
            stagnation = 0;
            continue;
        }
        // Start of the unreduced block ending at hi-1.
        let mut lo = hi - 1;
        while lo > 0 && !negligible(&h, lo) {
            lo -= 1;
        }
        if hi - lo == 2 {
            let (e1, e2) = eig_2x2(h[(lo, lo)], h[(lo, lo + 1)], h[(lo + 1, lo)], h[(lo + 1, lo + 1)]);
            eigs.push(e1);
            eigs.push(e2);
            hi -= 2;
            stagnation = 0;
            continue;
        }
        stagnation += 1;
        let shift = if stagnation % 16 == 0 {
            // Exceptional shift to break rare symmetric stalls.
            h[(hi - 1, hi - 1)] + Complex64::new(1.5, 0.5) * h[(hi - 1, hi - 2)].norm()
        } else {
            let (e1, e2) = eig_2x2(
                h[(hi - 2, hi - 2)],
                h[(hi - 2, hi - 1)],
                h[(hi - 1, hi - 2)],
                h[(hi - 1, hi - 1)],
            );
            let target = h[(hi - 1, hi - 1)];
            if (e1 - target).norm() <= (e2 - target).norm() { e1 } else { e2 }
        };
        qr_step(&mut h, lo, hi, shift);
        if stagnation > 200 {
            // Should not happen for the well-scaled monic inputs this
            // library produces; fall back to the diagonal.
            for i in (lo..hi).rev() {
                eigs.push(h[(i, i)]);
            }
            hi = lo;
            stagnation = 0;
        }
    }
    eigs
}

/// Eigenvalues of [[a, b], [c, d]], computed with the product form to avoid
/// cancellation.
fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mean = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (mean * mean - det).sqrt();
    let e1 = if (mean + disc).norm() >= (mean - disc).norm() {
        mean + disc
    } else {
        mean - disc
    };
    if e1.norm() > 0.0 {
        (e1, det / e1)
    } else {
        (e1, e1)
    }
}

/// Complex Givens rotation [[c, s], [-s̄, c]] with real c mapping (f, g) to
/// (r, 0).
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    if g.norm() == 0.0 {
        return (1.0, ZERO);
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let denom = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / denom;
    let phase = f / f.norm();
    let s = phase * g.conj() / denom;
    (c, s)
}

/// One explicitly shifted QR sweep on the block [lo, hi).
fn qr_step(h: &mut DMatrix<Complex64>, lo: usize, hi: usize, shift: Complex64) {
    for i in lo..hi {
        h[(i, i)] -= shift;
    }
    let mut rotations = Vec::with_capacity(hi - lo - 1);
    for k in lo..hi - 1 {
        let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
        for j in k..hi {
            let x = h[(k, j)];
            let y = h[(k + 1, j)];
            h[(k, j)] = c * x + s * y;
            h[(k + 1, j)] = -s.conj() * x + c * y;
        }
        rotations.push((k, c, s));
    }
    for &(k, c, s) in &rotations {
        for i in lo..hi {
            let x = h[(i, k)];
            let y = h[(i, k + 1)];
            h[(i, k)] = c * x + s.conj() * y;
            h[(i, k + 1)] = -s * x + c * y;
        }
    }
    for i in lo..hi {
        h[(i, i)] += shift;
    }
}
