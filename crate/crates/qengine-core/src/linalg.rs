//! Dense complex-matrix kernel sized for small superoperators (at most 9 x 9
//! in this crate): products, Kronecker products, LU solves and determinants,
//! characteristic polynomials, and Newton root refinement.
//!
//! Everything here is a pure function of its inputs; matrices are immutable
//! after construction and freely shareable across threads.

use num_complex::Complex64;
use std::fmt;

/// Relative pivot threshold below which an LU solve reports `SingularMatrix`.
const PIVOT_RTOL: f64 = 1e-14;

/// Maximum matrix dimension accepted by `char_poly`.
const CHAR_POLY_MAX_DIM: usize = 16;

/// Newton iteration cap for `root_near`.
const ROOT_MAX_ITER: usize = 50;

/// Residual tolerance factor for `root_near`: |p(r)| <= 1e-12 * max|c_k|.
const ROOT_RTOL: f64 = 1e-12;

/// Newton step size (relative to 1 + |z|) below which the iteration is
/// considered stationary and stops polishing.
const ROOT_STEP_STAGNATION: f64 = 1e-16;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of the dense kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// A pivot fell below the relative threshold during elimination; the
    /// system has no unique solution at working precision.
    SingularMatrix { pivot: f64, threshold: f64 },
    /// Newton refinement failed to reach the residual tolerance.
    NoConvergence { iterations: usize, residual: f64 },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::SingularMatrix { pivot, threshold } => write!(
                f,
                "singular matrix: pivot magnitude {pivot:.3e} below threshold {threshold:.3e}"
            ),
            LinalgError::NoConvergence { iterations, residual } => write!(
                f,
                "root refinement did not converge after {iterations} iterations \
                 (residual {residual:.3e})"
            ),
        }
    }
}

impl std::error::Error for LinalgError {}

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

/// Dense complex matrix in row-major storage.
///
/// All entries are finite by construction (asserted); operations never
/// introduce NaN/Inf for finite inputs of the sizes used here.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data. Panics on shape mismatch or
    /// non-finite entries (construction-time invariant).
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix must have positive dimensions");
        assert_eq!(data.len(), rows * cols, "data length must equal rows*cols");
        assert!(
            data.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "matrix entries must be finite"
        );
        ComplexMatrix { rows, cols, data }
    }

    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix must have positive dimensions");
        ComplexMatrix { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    /// Identity matrix of dimension `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        self.data[i * self.cols + j] = value;
    }

    /// Row-major slice of all entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Matrix sum; shapes must match.
    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Matrix difference; shapes must match.
    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        let data = self.data.iter().map(|a| a * s).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Matrix product; inner dimensions must match.
    pub fn mul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must match");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "vector length must equal matrix cols");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self.get(i, j) * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Transpose without conjugation.
    pub fn transpose(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> ComplexMatrix {
        let data = self.data.iter().map(|z| z.conj()).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        self.conjugate().transpose()
    }

    /// Trace (sum of diagonal entries); square only.
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).norm()).sum())
            .fold(0.0, f64::max)
    }

    /// Square submatrix with the listed rows *and* columns removed
    /// (principal submatrix). Indices must be strictly increasing.
    pub fn principal_submatrix(&self, drop: &[usize]) -> ComplexMatrix {
        assert!(self.is_square(), "principal submatrix requires a square matrix");
        assert!(drop.windows(2).all(|w| w[0] < w[1]), "drop indices must be increasing");
        assert!(drop.len() < self.rows, "cannot drop all rows");
        let keep: Vec<usize> = (0..self.rows).filter(|i| !drop.contains(i)).collect();
        let n = keep.len();
        let mut out = ComplexMatrix::zeros(n, n);
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                out.set(a, b, self.get(i, j));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Kronecker product
// ---------------------------------------------------------------------------

/// Kronecker product: `kron(A, B)[(i*p+k), (j*q+l)] = A[i,j] * B[k,l]`
/// for `A` m x n and `B` p x q.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.rows(), a.cols());
    let (p, q) = (b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(m * p, n * q);
    for i in 0..m {
        for j in 0..n {
            let aij = a.get(i, j);
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..p {
                for l in 0..q {
                    out.set(i * p + k, j * q + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// LU solve and determinant
// ---------------------------------------------------------------------------

/// Solves `A x = b` by LU decomposition with partial pivoting.
///
/// Returns `SingularMatrix` when a pivot magnitude falls below
/// `1e-14 * max |A_ij|` (relative to the *initial* matrix), which is how
/// exactly singular generators are routed to the null-space path.
pub fn solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>, LinalgError> {
    assert!(a.is_square(), "solve requires a square matrix");
    let n = a.rows();
    assert_eq!(b.len(), n, "right-hand side length must equal matrix dimension");

    let threshold = PIVOT_RTOL * a.max_abs();
    let mut lu = a.data.clone();
    let mut x: Vec<Complex64> = b.to_vec();
    let idx = |i: usize, j: usize| i * n + j;

    for k in 0..n {
        // Partial pivoting: bring the largest remaining entry of column k up.
        let mut pivot_row = k;
        let mut pivot_mag = lu[idx(k, k)].norm();
        for i in (k + 1)..n {
            let mag = lu[idx(i, k)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag <= threshold {
            return Err(LinalgError::SingularMatrix { pivot: pivot_mag, threshold });
        }
        if pivot_row != k {
            for j in 0..n {
                lu.swap(idx(k, j), idx(pivot_row, j));
            }
            x.swap(k, pivot_row);
        }
        let pivot = lu[idx(k, k)];
        for i in (k + 1)..n {
            let factor = lu[idx(i, k)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            lu[idx(i, k)] = Complex64::new(0.0, 0.0);
            for j in (k + 1)..n {
                let v = lu[idx(i, j)] - factor * lu[idx(k, j)];
                lu[idx(i, j)] = v;
            }
            let update = factor * x[k];
            x[i] -= update;
        }
    }

    // Back substitution.
    for k in (0..n).rev() {
        let mut acc = x[k];
        for j in (k + 1)..n {
            acc -= lu[idx(k, j)] * x[j];
        }
        x[k] = acc / lu[idx(k, k)];
    }
    Ok(x)
}

/// Determinant by LU with partial pivoting.
///
/// Unlike `solve`, tiny pivots are *not* an error here: near-singular
/// determinants are meaningful small numbers (they carry the low-order
/// characteristic-polynomial coefficients), so elimination runs to completion
/// and only an exactly zero column short-circuits to 0.
pub fn det(a: &ComplexMatrix) -> Complex64 {
    assert!(a.is_square(), "determinant requires a square matrix");
    let n = a.rows();
    let mut lu = a.data.clone();
    let idx = |i: usize, j: usize| i * n + j;
    let mut result = Complex64::new(1.0, 0.0);

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = lu[idx(k, k)].norm();
        for i in (k + 1)..n {
            let mag = lu[idx(i, k)].norm();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if pivot_mag == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot_row != k {
            for j in 0..n {
                lu.swap(idx(k, j), idx(pivot_row, j));
            }
            result = -result;
        }
        let pivot = lu[idx(k, k)];
        result *= pivot;
        for i in (k + 1)..n {
            let factor = lu[idx(i, k)] / pivot;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in (k + 1)..n {
                let v = lu[idx(i, j)] - factor * lu[idx(k, j)];
                lu[idx(i, j)] = v;
            }
        }
    }
    result
}

// ---------------------------------------------------------------------------
// Characteristic polynomial
// ---------------------------------------------------------------------------

/// Monic polynomial p(lambda) = sum c_k lambda^k with c_n = 1, stored as
/// coefficients `c_0 ..= c_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCoeffs {
    coeffs: Vec<Complex64>,
}

impl PolyCoeffs {
    /// Wraps a monic coefficient vector `c_0 ..= c_n`. Panics unless the
    /// leading coefficient is exactly 1.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        let lead = coeffs[coeffs.len() - 1];
        assert_eq!(lead, Complex64::new(1.0, 0.0), "polynomial must be monic");
        PolyCoeffs { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of lambda^k.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Horner evaluation of p(z).
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Simultaneous Horner evaluation of (p(z), p'(z)).
    pub fn eval_with_deriv(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Largest coefficient magnitude (used for residual scaling).
    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Characteristic polynomial det(lambda I - M) of a square matrix via the
/// Faddeev-LeVerrier trace recursion. Dimension is capped at 16.
pub fn char_poly(m: &ComplexMatrix) -> PolyCoeffs {
    assert!(m.is_square(), "char_poly requires a square matrix");
    let n = m.rows();
    assert!(n <= CHAR_POLY_MAX_DIM, "char_poly dimension capped at {CHAR_POLY_MAX_DIM}");

    let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
    coeffs[n] = Complex64::new(1.0, 0.0);
    let mut b = ComplexMatrix::identity(n);
    for k in 1..=n {
        b = m.mul(&b);
        let ck = -b.trace() / (k as f64);
        coeffs[n - k] = ck;
        for i in 0..n {
            let v = b.get(i, i) + ck;
            b.set(i, i, v);
        }
    }
    PolyCoeffs::new(coeffs)
}

// ---------------------------------------------------------------------------
// Newton root refinement
// ---------------------------------------------------------------------------

/// Refines a root of `p` near `seed` by damped Newton iteration.
///
/// Success means |p(r)| <= 1e-12 * max|c_k| within 50 iterations; each step
/// is halved up to 3 times if it fails to reduce |p|. `NoConvergence`
/// signals the caller that its continuation step was too large.
///
/// The iteration does not stop at the residual gate: it polishes until the
/// Newton step stagnates (or the iteration cap), then returns the iterate
/// with the smallest residual seen. A root much smaller than the coefficient
/// spread passes the residual gate while still carrying orders of magnitude
/// of refinable error (|p| near it scales with the tiny |p'|), and callers
/// differentiate the returned root, so the extra polish is load-bearing.
pub fn root_near(p: &PolyCoeffs, seed: Complex64) -> Result<Complex64, LinalgError> {
    let tol = ROOT_RTOL * p.max_coeff_abs();
    let mut z = seed;
    let mut residual = p.eval(z).norm();
    let mut best_z = z;
    let mut best_residual = residual;
    let mut iterations = 0;

    for iter in 0..ROOT_MAX_ITER {
        iterations = iter + 1;
        let (pz, dpz) = p.eval_with_deriv(z);
        let mut step = pz / dpz;
        if !step.re.is_finite() || !step.im.is_finite() {
            // Stationary derivative: nothing left to refine.
            break;
        }
        let mut z_next = z - step;
        let mut r_next = p.eval(z_next).norm();
        for _ in 0..3 {
            if r_next < residual {
                break;
            }
            step *= Complex64::new(0.5, 0.0);
            z_next = z - step;
            r_next = p.eval(z_next).norm();
        }
        z = z_next;
        residual = r_next;
        if residual < best_residual {
            best_residual = residual;
            best_z = z;
        }
        if step.norm() <= ROOT_STEP_STAGNATION * (1.0 + z.norm()) {
            break;
        }
    }
    if best_residual <= tol {
        Ok(best_z)
    } else {
        Err(LinalgError::NoConvergence { iterations, residual: best_residual })
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
