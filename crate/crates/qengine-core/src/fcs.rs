//! Full counting statistics: steady-state mean and variance of the counted
//! currents (output power, hot/cold heat currents, net photon flux) from the
//! characteristic polynomial of the dressed generator.
//!
//! The scaled cumulant generating function lambda(chi) is the eigenvalue
//! branch of L(chi) that continues lambda(0) = 0. Writing the characteristic
//! polynomial det(lambda I - L(chi)) = sum_k a_k(chi) lambda^k and expanding
//! around chi = 0 gives the steady-state cumulants without ever solving the
//! eigenproblem:
//!
//! ```text
//! mean     = -a0'(0) / a1(0)
//! variance = -[a0''(0) + 2 a1'(0) mean + 2 a2(0) mean^2] / a1(0)
//! ```
//!
//! a1(0) and a2(0) come from the Faddeev-LeVerrier recursion on the
//! undressed generator. The chi-derivatives come from finite differences of
//! a0(chi) = (-1)^n det L(chi) and a1(chi) = (-1)^(n-1) sum_i det M_i(chi)
//! (principal minors), evaluated by LU factorization: determinant noise
//! scales with the backward error of a single factorization, which keeps the
//! second-derivative cancellation benign.
//!
//! Counting is one-parameter per observable: a scalar x is dressed into the
//! two-bath field (chi_h, chi_c) along an observable-specific direction, so
//! a_k(-x) = conj a_k(x) exactly (the generator obeys L(-chi) =
//! S conj(L(chi)) S for a permutation S). The +/-h central differences then
//! fold into
//!
//! ```text
//! D1 f = Im f(h) / h          D2 f = -2 [Re f(h) - Re f(0)] / h^2
//! ```
//!
//! followed by one Richardson step R = (4 D(h) - D(2h)) / 3; the extracted
//! derivatives are real by construction. The spread between R and its two
//! stencils, relative to the overall coefficient scale, gates the result;
//! `cumulants` retries on a three-rung step ladder (h0, h0/4, h0/16) before
//! reporting instability.

use crate::engine::{liouvillian, rates, CountingField, EngineParams, Rates};
use crate::linalg::{char_poly, det, ComplexMatrix};
use crate::steady::{coherence_l1, steady_closed};
use num_complex::Complex64;
use std::fmt;

/// Default finite-difference step: h0 = 1e-3 / max(omega_h, omega_c).
const STEP_NUMERATOR: f64 = 1e-3;

/// Step ladder tried by `cumulants` (multiples of the default step).
const STEP_LADDER: [f64; 3] = [1.0, 0.25, 0.0625];

/// Gate on the Richardson-vs-stencil spread, relative to coefficient scale.
const GATE_TOL: f64 = 1e-7;

/// Residual imaginary parts of a1(0), a2(0), relative to coefficient scale.
const IMAG_RTOL: f64 = 1e-10;

/// Variance sign sanity: the raw value may undershoot zero only by this
/// fraction of the sum of term magnitudes entering the cancellation.
const VARIANCE_SANITY_RTOL: f64 = 1e-6;

/// Base step for the eigenvalue-branch route, scaled per observable.
const LAMBDA_STEP: f64 = 0.02;

/// Dressed fields must stay well inside the first Brillouin-like cell:
/// max(|chi_h| omega_h, |chi_c| omega_c) < 0.5.
const FIELD_BOUND: f64 = 0.5;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of the counting-statistics routines.
#[derive(Debug, Clone, PartialEq)]
pub enum FcsError {
    /// Finite-difference extraction failed its consistency gate at every
    /// ladder step; `gate` is the best (smallest) relative spread seen.
    NumericalInstability { gate: f64 },
    /// The counted mean vanishes (zero drive), so the noise-to-signal ratio
    /// is undefined.
    ZeroMean,
    /// The engine condition beta_h omega_h < beta_c omega_c fails.
    NotAnEngine { x_hot: f64, x_cold: f64 },
    /// The eigenvalue-branch walk failed to converge even after repeated
    /// step halving.
    NoConvergence { halvings: usize },
}

impl fmt::Display for FcsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FcsError::NumericalInstability { gate } => {
                write!(f, "finite-difference gate failed at every step: best spread {gate:.3e}")
            }
            FcsError::ZeroMean => write!(f, "counted mean is zero; noise-to-signal undefined"),
            FcsError::NotAnEngine { x_hot, x_cold } => write!(
                f,
                "not an engine: beta_h*omega_h = {x_hot} must be below beta_c*omega_c = {x_cold}"
            ),
            FcsError::NoConvergence { halvings } => {
                write!(f, "eigenvalue branch walk stalled after {halvings} step halvings")
            }
        }
    }
}

impl std::error::Error for FcsError {}

// ---------------------------------------------------------------------------
// Counted observables
// ---------------------------------------------------------------------------

/// Currents whose full counting statistics the library reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountedObservable {
    /// Work output rate (negative when the engine extracts work).
    Power,
    /// Heat current out of the hot bath.
    HotCurrent,
    /// Heat current out of the cold bath (negative: heat is dumped).
    ColdCurrent,
    /// Net emitted photon flux |power| / (omega_h - omega_c).
    PhotonFlux,
}

impl CountedObservable {
    pub const ALL: [CountedObservable; 4] = [
        CountedObservable::Power,
        CountedObservable::HotCurrent,
        CountedObservable::ColdCurrent,
        CountedObservable::PhotonFlux,
    ];

    /// Stable lowercase label (used for report keys).
    pub fn label(self) -> &'static str {
        match self {
            CountedObservable::Power => "power",
            CountedObservable::HotCurrent => "hot_current",
            CountedObservable::ColdCurrent => "cold_current",
            CountedObservable::PhotonFlux => "photon_flux",
        }
    }

    /// Dress the scalar counting parameter x into the two-bath field along
    /// this observable's direction. `gap` is omega_h - omega_c.
    pub fn field(self, x: f64, gap: f64) -> CountingField {
        match self {
            CountedObservable::Power => CountingField::new(-x, -x),
            CountedObservable::HotCurrent => CountingField::new(x, 0.0),
            CountedObservable::ColdCurrent => CountingField::new(0.0, x),
            CountedObservable::PhotonFlux => CountingField::new(x / gap, x / gap),
        }
    }
}

impl fmt::Display for CountedObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Characteristic-polynomial data entering the cumulant formulas: the
/// lambda-coefficients a1, a2 at zero field and the field-derivatives
/// a0', a0'', a1' along the observable's counting direction. Imaginary
/// parts are diagnostic residuals (at most 1e-10 of the coefficient scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoeffDerivs {
    pub a1: Complex64,
    pub a2: Complex64,
    pub a0p: Complex64,
    pub a0pp: Complex64,
    pub a1p: Complex64,
}

/// Steady-state mean, variance, and noise-to-signal ratio
/// (nsr = variance / mean^2) of one counted observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantReport {
    pub mean: f64,
    pub variance: f64,
    pub nsr: f64,
}

// ---------------------------------------------------------------------------
// Determinant backend
// ---------------------------------------------------------------------------

/// a0(chi) = (-1)^n det L(chi): the constant characteristic coefficient.
fn a0_from_det(l: &ComplexMatrix) -> Complex64 {
    let d = det(l);
    if l.rows() % 2 == 0 {
        d
    } else {
        -d
    }
}

/// a1(chi) = (-1)^(n-1) sum_i det(principal minor dropping row/col i).
fn a1_from_minors(l: &ComplexMatrix) -> Complex64 {
    let n = l.rows();
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..n {
        total += det(&l.principal_submatrix(&[i]));
    }
    if (n - 1) % 2 == 0 {
        total
    } else {
        -total
    }
}

/// One finite-difference first derivative via the conjugation symmetry.
fn d1(fh: Complex64, h: f64) -> f64 {
    fh.im / h
}

/// One finite-difference second derivative via the conjugation symmetry.
fn d2(fh: Complex64, f0: Complex64, h: f64) -> f64 {
    -2.0 * (fh.re - f0.re) / (h * h)
}

/// Richardson step eliminating the O(h^2) error of the folded stencils.
fn richardson(dh: f64, d2h: f64) -> f64 {
    (4.0 * dh - d2h) / 3.0
}

fn default_step(params: &EngineParams) -> f64 {
    STEP_NUMERATOR / params.omega_h.max(params.omega_c)
}

// ---------------------------------------------------------------------------
// Coefficient derivatives
// ---------------------------------------------------------------------------

/// Characteristic-coefficient data at an explicit finite-difference step.
///
/// Evaluates a0 and a1 at counting parameters {0, h, 2h}, extracts the
/// derivatives through the symmetry-folded stencils plus one Richardson
/// step, and gates on the spread between the Richardson value and both
/// stencils (relative to the overall coefficient scale, threshold 1e-7).
pub fn coeff_derivs_at(
    params: &EngineParams,
    observable: CountedObservable,
    h: f64,
) -> Result<CoeffDerivs, FcsError> {
    assert!(h.is_finite() && h > 0.0, "finite-difference step must be positive");
    let gap = params.omega_gap();

    let l0 = liouvillian(params, CountingField::zero());
    let p0 = char_poly(&l0);
    let a1 = p0.coeff(1);
    let a2 = p0.coeff(2);
    let a0_0 = a0_from_det(&l0);

    let eval = |x: f64| {
        let l = liouvillian(params, observable.field(x, gap));
        (a0_from_det(&l), a1_from_minors(&l))
    };
    let (a0_h, a1_h) = eval(h);
    let (a0_2h, a1_2h) = eval(2.0 * h);

    let a0p_pair = (d1(a0_h, h), d1(a0_2h, 2.0 * h));
    let a0pp_pair = (d2(a0_h, a0_0, h), d2(a0_2h, a0_0, 2.0 * h));
    let a1p_pair = (d1(a1_h, h), d1(a1_2h, 2.0 * h));

    let a0p = richardson(a0p_pair.0, a0p_pair.1);
    let a0pp = richardson(a0pp_pair.0, a0pp_pair.1);
    let a1p = richardson(a1p_pair.0, a1p_pair.1);

    let scale = [a1.norm(), a2.norm(), a0p.abs(), a0pp.abs(), a1p.abs()]
        .into_iter()
        .fold(0.0, f64::max);
    let spread = |r: f64, pair: (f64, f64)| (r - pair.0).abs().max((r - pair.1).abs());
    let gate = [
        spread(a0p, a0p_pair),
        spread(a0pp, a0pp_pair),
        spread(a1p, a1p_pair),
    ]
    .into_iter()
    .fold(0.0, f64::max)
        / scale;
    if !(gate <= GATE_TOL) {
        return Err(FcsError::NumericalInstability { gate });
    }

    assert!(
        a1.im.abs() <= IMAG_RTOL * scale && a2.im.abs() <= IMAG_RTOL * scale,
        "residual imaginary parts of a1/a2 exceed tolerance"
    );

    Ok(CoeffDerivs {
        a1,
        a2,
        a0p: Complex64::new(a0p, 0.0),
        a0pp: Complex64::new(a0pp, 0.0),
        a1p: Complex64::new(a1p, 0.0),
    })
}

/// Characteristic-coefficient data at the default step
/// h = 1e-3 / max(omega_h, omega_c).
pub fn coeff_derivs(
    params: &EngineParams,
    observable: CountedObservable,
) -> Result<CoeffDerivs, FcsError> {
    coeff_derivs_at(params, observable, default_step(params))
}

// ---------------------------------------------------------------------------
// Cumulants
// ---------------------------------------------------------------------------

fn require_engine(params: &EngineParams) -> Result<(), FcsError> {
    if params.engine_valid() {
        Ok(())
    } else {
        Err(FcsError::NotAnEngine { x_hot: params.x_hot(), x_cold: params.x_cold() })
    }
}

fn report_from(cd: &CoeffDerivs) -> Result<CumulantReport, FcsError> {
    let mean_c = -cd.a0p / cd.a1;
    let mean = mean_c.re;
    if mean == 0.0 {
        return Err(FcsError::ZeroMean);
    }
    let terms = [cd.a0pp, cd.a1p * mean_c * 2.0, cd.a2 * mean_c * mean_c * 2.0];
    let raw = (-(terms[0] + terms[1] + terms[2]) / cd.a1).re;
    let cancellation_scale =
        terms.iter().map(|t| t.norm()).sum::<f64>() / cd.a1.norm();
    assert!(
        raw >= -VARIANCE_SANITY_RTOL * cancellation_scale,
        "variance {raw:.3e} is negative beyond cancellation noise (scale {cancellation_scale:.3e})"
    );
    let variance = raw.abs();
    Ok(CumulantReport { mean, variance, nsr: variance / (mean * mean) })
}

/// Mean, variance, and noise-to-signal of a counted observable through the
/// finite-difference characteristic-coefficient route, retrying the step
/// ladder h0, h0/4, h0/16 until the consistency gate passes.
pub fn cumulants(
    params: &EngineParams,
    observable: CountedObservable,
) -> Result<CumulantReport, FcsError> {
    require_engine(params)?;
    if params.alpha == 0.0 {
        return Err(FcsError::ZeroMean);
    }
    let h0 = default_step(params);
    let mut last = None;
    for factor in STEP_LADDER {
        match coeff_derivs_at(params, observable, h0 * factor) {
            Ok(cd) => return report_from(&cd),
            Err(e @ FcsError::NumericalInstability { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("ladder is non-empty"))
}

/// Closed-form cumulants.
///
/// The power variance for the coherent engine
/// (Gamma = gamma1 + gamma2, D = 8 alpha^2 + Gamma^2):
///
/// ```text
/// Var P = (omega_h - omega_c)^2 4 alpha^2 Gamma
///         [64 alpha^4 - 8 alpha^2 (gamma1^2 - 10 gamma1 gamma2 + gamma2^2)
///          + Gamma^4] / D^3
/// ```
///
/// and for the incoherent engine, with population Fano factor
/// F = (2 n_h n_c + n_h + n_c)/(n_h - n_c) and
/// k = [4 alpha^2 + gamma0^2 (n_hc^2 + 2 n_hc + 3 n_h n_c)]
///     / [gamma0^2 (n_h - n_c)], n_hc = n_h + n_c:
///
/// ```text
/// Var P = (F |P| - k |P|^3 / (alpha^2 (omega_h - omega_c)^2))
///         * (omega_h - omega_c)
/// ```
///
/// Other observables scale from the power pair: means by -omega_h/gap,
/// +omega_c/gap, -1/gap (hot, cold, flux) and variances by the squares, so
/// the noise-to-signal ratio is identical across observables.
pub fn cumulants_closed(
    params: &EngineParams,
    observable: CountedObservable,
) -> Result<CumulantReport, FcsError> {
    require_engine(params)?;
    if params.alpha == 0.0 {
        return Err(FcsError::ZeroMean);
    }
    let sigma = steady_closed(params).expect("closed steady state exists at alpha > 0");
    let coherence = coherence_l1(&sigma);
    let gap = params.omega_gap();
    let alpha = params.alpha;
    let mean_power = -alpha * gap * coherence;
    if mean_power == 0.0 {
        return Err(FcsError::ZeroMean);
    }

    let var_power = match rates(params) {
        Rates::Coherent { gamma1, gamma2, .. } => {
            let big_gamma = gamma1 + gamma2;
            let a2 = alpha * alpha;
            let denom = 8.0 * a2 + big_gamma * big_gamma;
            let bracket = 64.0 * a2 * a2
                - 8.0 * a2 * (gamma1 * gamma1 - 10.0 * gamma1 * gamma2 + gamma2 * gamma2)
                + big_gamma.powi(4);
            gap * gap * 4.0 * a2 * big_gamma * bracket / denom.powi(3)
        }
        Rates::Incoherent { n_h, n_c, .. } => {
            let g0 = params.gamma0;
            let n_hc = n_h + n_c;
            let delta_n = n_h - n_c;
            let fano_pop = (2.0 * n_h * n_c + n_h + n_c) / delta_n;
            let k = (4.0 * alpha * alpha + g0 * g0 * (n_hc * n_hc + 2.0 * n_hc + 3.0 * n_h * n_c))
                / (g0 * g0 * delta_n);
            let p_abs = mean_power.abs();
            (fano_pop * p_abs - k * p_abs.powi(3) / (alpha * alpha * gap * gap)) * gap
        }
    };

    let (mean, variance) = match observable {
        CountedObservable::Power => (mean_power, var_power),
        CountedObservable::HotCurrent => {
            let s = params.omega_h / gap;
            (-mean_power * s, var_power * s * s)
        }
        CountedObservable::ColdCurrent => {
            let s = params.omega_c / gap;
            (mean_power * s, var_power * s * s)
        }
        CountedObservable::PhotonFlux => (-mean_power / gap, var_power / (gap * gap)),
    };
    Ok(CumulantReport { mean, variance, nsr: variance / (mean * mean) })
}

// ---------------------------------------------------------------------------
// Eigenvalue-branch route
// ---------------------------------------------------------------------------

/// The cumulant generating branch lambda(x): the eigenvalue of the dressed
/// generator continued from lambda = 0 at x = 0 along the observable's
/// counting direction. The walk takes the full step first and halves it on
/// Newton failure.
///
/// Precondition (asserted): the dressed field satisfies
/// max(|chi_h| omega_h, |chi_c| omega_c) < 0.5.
pub fn lambda_branch(
    params: &EngineParams,
    observable: CountedObservable,
    x: f64,
) -> Result<Complex64, FcsError> {
    assert!(x.is_finite(), "counting parameter must be finite");
    let gap = params.omega_gap();
    let full = observable.field(x, gap);
    let reach = (full.chi_h * params.omega_h)
        .abs()
        .max((full.chi_c * params.omega_c).abs());
    assert!(reach < FIELD_BOUND, "counting field too large: |chi omega| = {reach} >= 0.5");

    let mut root = Complex64::new(0.0, 0.0);
    let mut t = 0.0_f64;
    let mut step = 1.0_f64;
    let mut halvings = 0usize;
    while t < 1.0 {
        let target = (t + step).min(1.0);
        let l = liouvillian(params, observable.field(x * target, gap));
        match crate::linalg::root_near(&char_poly(&l), root) {
            Ok(r) => {
                root = r;
                t = target;
            }
            Err(_) => {
                step /= 2.0;
                halvings += 1;
                if halvings >= 20 {
                    return Err(FcsError::NoConvergence { halvings });
                }
            }
        }
    }
    Ok(root)
}

/// Mean and variance read off the eigenvalue branch:
/// lambda(x) = i x mean - x^2 variance / 2 + O(x^3), extracted at
/// h = 0.02 / theta with one Richardson step, where theta is the
/// observable's frequency scale (omega_h, omega_c, the gap, or 1 for the
/// photon flux).
pub fn lambda_cumulants(
    params: &EngineParams,
    observable: CountedObservable,
) -> Result<(f64, f64), FcsError> {
    let theta = match observable {
        CountedObservable::Power => params.omega_gap(),
        CountedObservable::HotCurrent => params.omega_h,
        CountedObservable::ColdCurrent => params.omega_c,
        CountedObservable::PhotonFlux => 1.0,
    };
    let h = LAMBDA_STEP / theta;
    let lam_h = lambda_branch(params, observable, h)?;
    let lam_2h = lambda_branch(params, observable, 2.0 * h)?;
    let mean = richardson(lam_h.im / h, lam_2h.im / (2.0 * h));
    let var = richardson(
        -2.0 * lam_h.re / (h * h),
        -2.0 * lam_2h.re / (4.0 * h * h),
    );
    Ok((mean, var))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
