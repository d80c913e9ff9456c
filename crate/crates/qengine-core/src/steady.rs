//! Steady states (numeric null space and closed forms), energetic coherence,
//! and first-order observables: power, heat currents, efficiency, photon
//! flux, entropy production rate, and the critical drive strength.
//!
//! Sign conventions: power <= 0 means work is extracted; j_hot >= 0 means
//! heat is absorbed from the hot bath; at steady state
//! j_hot + j_cold + power = 0 (first law).

use crate::engine::{
    hamiltonians, liouvillian, occupations, rates, vec_identity, CountingField, EngineKind,
    EngineParams, Rates, Superoperator,
};
use crate::linalg::{char_poly, solve, ComplexMatrix, LinalgError};
use num_complex::Complex64;
use std::fmt;

/// Hermiticity tolerance for density matrices (absolute, entries are O(1)).
const HERMITICITY_TOL: f64 = 1e-12;

/// Unit-trace tolerance for density matrices.
const TRACE_TOL: f64 = 1e-12;

/// Eigenvalue lower bound accepted as "positive semidefinite numerically".
const EIGENVALUE_FLOOR: f64 = 1e-10;

/// Steady-state residual bound: ||L vec(rho)||_inf <= 1e-11 ||L||_inf.
const STEADY_RESIDUAL_RTOL: f64 = 1e-11;

/// Relative tolerance for the two independent power computations.
const POWER_CROSS_CHECK_RTOL: f64 = 1e-11;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of steady-state construction and observables.
#[derive(Debug, Clone, PartialEq)]
pub enum SteadyError {
    /// Matrix is not hermitian within tolerance.
    NotHermitian { deviation: f64 },
    /// Trace differs from 1 beyond tolerance.
    TraceDeviation { deviation: f64 },
    /// An eigenvalue falls below the positivity floor (sign test on the
    /// shifted characteristic polynomial failed by `excess`).
    NotPositive { excess: f64 },
    /// The generator's kernel is not the expected rank-1 steady manifold.
    DegenerateSteadyState { residual: f64 },
    /// All of alpha, n_h, n_c vanish: the closed forms are 0/0.
    ZeroDenominator,
    /// The engine condition beta_h omega_h < beta_c omega_c fails.
    NotAnEngine { x_hot: f64, x_cold: f64 },
}

impl fmt::Display for SteadyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SteadyError::NotHermitian { deviation } => {
                write!(f, "matrix not hermitian: max |m - m^dag| = {deviation:.3e}")
            }
            SteadyError::TraceDeviation { deviation } => {
                write!(f, "trace deviates from 1 by {deviation:.3e}")
            }
            SteadyError::NotPositive { excess } => {
                write!(f, "matrix not positive semidefinite (sign-test excess {excess:.3e})")
            }
            SteadyError::DegenerateSteadyState { residual } => {
                write!(f, "steady state not unique: best residual {residual:.3e}")
            }
            SteadyError::ZeroDenominator => {
                write!(f, "closed-form steady state undefined: alpha = n_h = n_c = 0")
            }
            SteadyError::NotAnEngine { x_hot, x_cold } => write!(
                f,
                "not an engine: beta_h*omega_h = {x_hot} must be below beta_c*omega_c = {x_cold}"
            ),
        }
    }
}

impl std::error::Error for SteadyError {}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

/// Hermitian, unit-trace, positive-semidefinite complex matrix (2 x 2 for
/// the coherent engine's subspace, 3 x 3 for the incoherent qutrit).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace, and positivity (characteristic-
    /// polynomial sign tests, exact for real-rooted polynomials at d <= 3).
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self, SteadyError> {
        assert!(matrix.is_square(), "density matrix must be square");
        let d = matrix.rows();
        assert!(d == 2 || d == 3, "density matrix dimension must be 2 or 3");

        let mut herm_dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                herm_dev = herm_dev.max((matrix.get(i, j) - matrix.get(j, i).conj()).norm());
            }
        }
        if herm_dev > HERMITICITY_TOL {
            return Err(SteadyError::NotHermitian { deviation: herm_dev });
        }

        let trace_dev = (matrix.trace() - Complex64::new(1.0, 0.0)).norm();
        if trace_dev > TRACE_TOL {
            return Err(SteadyError::TraceDeviation { deviation: trace_dev });
        }

        // Positivity: hermitize, shift by the eigenvalue floor, and require
        // the alternating-sign pattern (-1)^(d-k) c_k >= 0 that characterizes
        // non-negative real-rooted characteristic polynomials.
        let mut shifted = matrix.add(&matrix.adjoint()).scale(Complex64::new(0.5, 0.0));
        for i in 0..d {
            let v = shifted.get(i, i) + Complex64::new(EIGENVALUE_FLOOR, 0.0);
            shifted.set(i, i, v);
        }
        let p = char_poly(&shifted);
        let scale = p.max_coeff_abs();
        for k in 0..=d {
            let sign = if (d - k) % 2 == 0 { 1.0 } else { -1.0 };
            let signed = sign * p.coeff(k).re;
            if signed < -1e-13 * scale {
                return Err(SteadyError::NotPositive { excess: -signed });
            }
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    /// Column-stacked vector vec(rho) with vec[i + d*j] = rho[i,j].
    pub fn vectorize(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut v = vec![Complex64::new(0.0, 0.0); d * d];
        for j in 0..d {
            for i in 0..d {
                v[i + d * j] = self.matrix.get(i, j);
            }
        }
        v
    }
}

// ---------------------------------------------------------------------------
// Steady-state solvers
// ---------------------------------------------------------------------------

/// Numeric steady state of an undressed generator: the kernel vector with
/// unit trace, found by replacing one row of L with the trace constraint.
///
/// Every row choice is tried and the candidate with the smallest
/// ||L vec(rho)||_inf residual wins; the generator's kernel has rank 1 at
/// engine-valid parameters, so one of the replacements is always
/// well-conditioned.
pub fn steady_numeric(l: &Superoperator) -> Result<DensityMatrix, SteadyError> {
    assert!(l.is_square(), "generator must be square");
    let n = l.rows();
    let d = match n {
        4 => 2,
        9 => 3,
        _ => panic!("generator dimension must be 4 or 9, got {n}"),
    };

    let trace_row = vec_identity(d);
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for replaced in 0..n {
        let mut a = l.clone();
        for j in 0..n {
            a.set(replaced, j, trace_row[j]);
        }
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        b[replaced] = Complex64::new(1.0, 0.0);
        let x = match solve(&a, &b) {
            Ok(x) => x,
            Err(LinalgError::SingularMatrix { .. }) => continue,
            Err(e) => panic!("unexpected solver failure: {e}"),
        };
        let residual = l
            .apply(&x)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, x));
        }
    }

    let tol = STEADY_RESIDUAL_RTOL * l.norm_inf();
    match best {
        Some((residual, x)) if residual <= tol => {
            let mut m = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                for i in 0..d {
                    m.set(i, j, x[i + d * j]);
                }
            }
            DensityMatrix::from_matrix(m)
        }
        Some((residual, _)) => Err(SteadyError::DegenerateSteadyState { residual }),
        None => Err(SteadyError::DegenerateSteadyState { residual: f64::INFINITY }),
    }
}

/// Closed-form steady state.
///
/// Coherent (on {|0>,|1>}, Gamma = gamma1 + gamma2, D = 8 alpha^2 + Gamma^2):
///
/// ```text
/// sigma_00 = (4 alpha^2 + gamma1 Gamma)/D     sigma_01 = 2 i alpha (gamma1 - gamma2)/D
/// sigma_11 = (4 alpha^2 + gamma2 Gamma)/D     sigma_10 = -sigma_01
/// ```
///
/// Incoherent (qutrit, n_hc = n_h + n_c,
/// D = 4 alpha^2 (3 n_hc + 4) + gamma0^2 n_hc (n_hc + 3 n_h n_c)):
///
/// ```text
/// sigma_00 = [4 alpha^2 (n_hc + 2) + gamma0^2 n_c (n_h + 1) n_hc]/D
/// sigma_11 = [4 alpha^2 (n_hc + 2) + gamma0^2 n_h (n_c + 1) n_hc]/D
/// sigma_22 = [4 alpha^2 + gamma0^2 n_h n_c] n_hc / D
/// sigma_01 = -2 i alpha gamma0 (n_h - n_c)/D = -sigma_10
/// ```
pub fn steady_closed(params: &EngineParams) -> Result<DensityMatrix, SteadyError> {
    match rates(params) {
        Rates::Coherent { gamma1, gamma2, .. } => {
            let a = params.alpha;
            let big_gamma = gamma1 + gamma2;
            let denom = 8.0 * a * a + big_gamma * big_gamma;
            if denom == 0.0 {
                return Err(SteadyError::ZeroDenominator);
            }
            let mut m = ComplexMatrix::zeros(2, 2);
            m.set(0, 0, Complex64::new((4.0 * a * a + gamma1 * big_gamma) / denom, 0.0));
            m.set(1, 1, Complex64::new((4.0 * a * a + gamma2 * big_gamma) / denom, 0.0));
            let off = Complex64::new(0.0, 2.0 * a * (gamma1 - gamma2) / denom);
            m.set(0, 1, off);
            m.set(1, 0, -off);
            DensityMatrix::from_matrix(m)
        }
        Rates::Incoherent { n_h, n_c, .. } => {
            let a = params.alpha;
            let g0 = params.gamma0;
            let n_hc = n_h + n_c;
            let denom = 4.0 * a * a * (3.0 * n_hc + 4.0) + g0 * g0 * n_hc * (n_hc + 3.0 * n_h * n_c);
            if denom == 0.0 {
                return Err(SteadyError::ZeroDenominator);
            }
            let mut m = ComplexMatrix::zeros(3, 3);
            m.set(
                0,
                0,
                Complex64::new(
                    (4.0 * a * a * (n_hc + 2.0) + g0 * g0 * n_c * (n_h + 1.0) * n_hc) / denom,
                    0.0,
                ),
            );
            m.set(
                1,
                1,
                Complex64::new(
                    (4.0 * a * a * (n_hc + 2.0) + g0 * g0 * n_h * (n_c + 1.0) * n_hc) / denom,
                    0.0,
                ),
            );
            m.set(
                2,
                2,
                Complex64::new((4.0 * a * a + g0 * g0 * n_h * n_c) * n_hc / denom, 0.0),
            );
            let off = Complex64::new(0.0, -2.0 * a * g0 * (n_h - n_c) / denom);
            m.set(0, 1, off);
            m.set(1, 0, -off);
            DensityMatrix::from_matrix(m)
        }
    }
}

/// l1 norm of coherence: sum of off-diagonal entry magnitudes.
pub fn coherence_l1(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                total += rho.entry(i, j).norm();
            }
        }
    }
    total
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

/// First-order steady-state observables. `power <= 0` is extracted work;
/// at a degenerate cold bath (n_c = 0) the entropy rate is +inf and
/// `entropy_infinite` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub power: f64,
    pub j_hot: f64,
    pub j_cold: f64,
    pub efficiency: f64,
    pub photon_flux: f64,
    pub entropy_rate: f64,
    pub coherence: f64,
    pub entropy_infinite: bool,
}

fn require_engine(params: &EngineParams) -> Result<(), SteadyError> {
    if params.engine_valid() {
        Ok(())
    } else {
        Err(SteadyError::NotAnEngine { x_hot: params.x_hot(), x_cold: params.x_cold() })
    }
}

/// Entropy flow per emitted photon, ln[n_h(n_c+1)/(n_c(n_h+1))]; +inf when
/// n_c = 0. Algebraically identical to beta_c omega_c - beta_h omega_h.
fn entropy_per_photon(n_h: f64, n_c: f64) -> f64 {
    if n_c == 0.0 {
        f64::INFINITY
    } else {
        (n_h * (n_c + 1.0) / (n_c * (n_h + 1.0))).ln()
    }
}

/// Steady-state observables from the closed-form steady state.
///
/// power = -alpha (omega_h - omega_c) C(sigma) is cross-checked against the
/// mechanical route -i Tr([H_S, H_dR] sigma); the two must agree to 1e-11
/// relative (asserted — the identity is exact up to rounding).
pub fn observables(params: &EngineParams) -> Result<Observables, SteadyError> {
    require_engine(params)?;
    let sigma = steady_closed(params)?;
    let coherence = coherence_l1(&sigma);
    let gap = params.omega_gap();
    let power = -params.alpha * gap * coherence;
    let j_hot = params.alpha * params.omega_h * coherence;
    let j_cold = -params.alpha * params.omega_c * coherence;
    let efficiency = 1.0 - params.omega_c / params.omega_h;
    let photon_flux = power.abs() / gap;

    // Mechanical cross-check through the commutator with the bare splitting.
    let (h_s, h_dr) = hamiltonians(params);
    let d = params.kind.working_dim();
    let mut h_s_d = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        h_s_d.set(i, i, h_s.get(i, i));
    }
    let commutator = h_s_d.mul(&h_dr).sub(&h_dr.mul(&h_s_d));
    let power_mech = (commutator.mul(sigma.matrix()).trace() * Complex64::new(0.0, -1.0)).re;
    if power != 0.0 {
        let rel = (power_mech - power).abs() / power.abs();
        assert!(
            rel <= POWER_CROSS_CHECK_RTOL,
            "power cross-check failed: coherence route {power:.17e} vs mechanical {power_mech:.17e}"
        );
    } else {
        assert!(power_mech.abs() <= 1e-15, "mechanical power nonzero at zero drive");
    }

    let occ = occupations(params);
    let per_photon = entropy_per_photon(occ.n_h, occ.n_c);
    let entropy_infinite = per_photon.is_infinite() && photon_flux > 0.0;
    let entropy_rate = if photon_flux == 0.0 { 0.0 } else { per_photon * photon_flux };

    Ok(Observables {
        power,
        j_hot,
        j_cold,
        efficiency,
        photon_flux,
        entropy_rate,
        coherence,
        entropy_infinite,
    })
}

/// Drive strength where the two engines' steady-state coherences cross:
///
/// ```text
/// alpha_cr = gamma0 sqrt[ (n_h n_c (n_h + n_c) + 4 n_h^2 n_c^2)
///                         / (8 + 12 (n_h + n_c)) ]
/// ```
///
/// Zero when n_c = 0 (the coherent engine dominates at every drive).
pub fn critical_alpha(params: &EngineParams) -> Result<f64, SteadyError> {
    require_engine(params)?;
    let occ = occupations(params);
    let (n_h, n_c) = (occ.n_h, occ.n_c);
    if n_c == 0.0 {
        return Ok(0.0);
    }
    let numerator = n_h * n_c * (n_h + n_c) + 4.0 * n_h * n_h * n_c * n_c;
    let denominator = 8.0 + 12.0 * (n_h + n_c);
    Ok(params.gamma0 * (numerator / denominator).sqrt())
}

/// Convenience: numeric steady state of the undressed generator for the
/// parameter point.
pub fn steady_numeric_for(params: &EngineParams) -> Result<DensityMatrix, SteadyError> {
    steady_numeric(&liouvillian(params, CountingField::zero()))
}

/// Working-space dimension for an engine kind (re-exported convenience).
pub fn working_dim(kind: EngineKind) -> usize {
    kind.working_dim()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
