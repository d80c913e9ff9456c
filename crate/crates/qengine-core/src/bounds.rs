//! Thermodynamic uncertainty diagnostics: Fano factors of the photon-number
//! current, the classical uncertainty value Q (with its power-efficiency-
//! constancy twin D), and the quantum bound nsr >= f = 1/(Upsilon + Psi)
//! built from the quantum dynamical activity and the coherent-dynamics
//! contribution through the Drazin inverse of the generator.
//!
//! Every numeric route has a closed-form twin:
//!
//! ```text
//! F_p = (2 n_h n_c + n_h + n_c)/(n_h - n_c)
//! f_total = F_p - correction        correction_C = (3/2) F_p C^2
//!                                   correction_I = k C^2
//! Q = ln[n_h(n_c+1)/(n_c(n_h+1))] * f_total
//! D = (eta_Carnot - eta) (Var P/|P|) beta_c omega_h/(omega_h - omega_c)
//! Upsilon = sum_k Tr(L_k^dag L_k rho_ss)
//! Psi = -4 Re(<<I| L_L Lp L_R |rho>> + <<I| L_R Lp L_L |rho>>)
//! ```
//!
//! where Lp is the Drazin inverse, computed as (I-P)(L+P)^{-1}(I-P) with
//! P = vec(rho_ss) vec(I)^T — exact for a rank-1 kernel, no eigensolver
//! needed. Q = D exactly (the identity beta_c omega_c - beta_h omega_h =
//! ln[n_h(n_c+1)/(n_c(n_h+1))] makes the two groupings algebraically equal).

use crate::engine::{
    jump_operators, liouvillian, lr_ll_split, occupations, rates, vec_identity, CountingField,
    EngineParams, Rates, Superoperator,
};
use crate::linalg::{solve, ComplexMatrix, LinalgError};
use crate::fcs::{cumulants_closed, CountedObservable, FcsError};
use crate::steady::{coherence_l1, steady_closed, steady_numeric, DensityMatrix, SteadyError};
use num_complex::Complex64;
use std::fmt;

/// Entrywise tolerance (scaled by matrix magnitudes) for the Drazin axioms.
const DRAZIN_AXIOM_TOL: f64 = 1e-10;

/// Relative agreement required between the Q and D groupings.
const Q_EQUALS_D_RTOL: f64 = 1e-10;

/// Imaginary residue allowed on the coherent contribution Psi.
const PSI_IMAG_TOL: f64 = 1e-10;

/// Slack floor for declaring the quantum bound satisfied.
const QTUR_SLACK_FLOOR: f64 = -1e-9;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Failure modes of the uncertainty-bound routines.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundsError {
    /// Engine condition fails (or the occupation contrast n_h - n_c is not
    /// positive, which makes the population Fano factor diverge).
    NotAnEngine { x_hot: f64, x_cold: f64 },
    /// n_c = 0: entropy flow per photon diverges and Q is undefined.
    InfiniteEntropy,
    /// The projected solve behind the Drazin inverse (or the steady-state
    /// solve feeding it) is singular.
    DegenerateSteadyState { detail: f64 },
    /// Zero drive: the counted mean vanishes and nsr is undefined.
    ZeroMean,
    /// Steady-state construction failed for another reason.
    Steady(SteadyError),
}

impl fmt::Display for BoundsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundsError::NotAnEngine { x_hot, x_cold } => write!(
                f,
                "not an engine: beta_h*omega_h = {x_hot} must be below beta_c*omega_c = {x_cold}"
            ),
            BoundsError::InfiniteEntropy => {
                write!(f, "cold occupation is zero: entropy per photon diverges")
            }
            BoundsError::DegenerateSteadyState { detail } => {
                write!(f, "projected generator is singular (detail {detail:.3e})")
            }
            BoundsError::ZeroMean => write!(f, "counted mean is zero; uncertainty value undefined"),
            BoundsError::Steady(e) => write!(f, "steady-state construction failed: {e}"),
        }
    }
}

impl std::error::Error for BoundsError {}

impl From<SteadyError> for BoundsError {
    fn from(e: SteadyError) -> Self {
        match e {
            SteadyError::DegenerateSteadyState { residual } => {
                BoundsError::DegenerateSteadyState { detail: residual }
            }
            SteadyError::NotAnEngine { x_hot, x_cold } => BoundsError::NotAnEngine { x_hot, x_cold },
            other => BoundsError::Steady(other),
        }
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Photon-number Fano factor split into its population part and the
/// coherence-proportional reduction: f_total = f_pop - coherent_correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoReport {
    pub f_total: f64,
    pub f_pop: f64,
    pub coherent_correction: f64,
}

/// Classical and quantum uncertainty diagnostics at one parameter point.
/// `q_value` and `entropy_rate` are +inf at a degenerate cold bath
/// (`infinite_entropy` set); the quantum fields stay finite there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TURReport {
    pub q_value: f64,
    pub nsr: f64,
    pub entropy_rate: f64,
    pub upsilon: f64,
    pub psi: f64,
    pub f_bound: f64,
    pub slack: f64,
    pub ctur_violated: bool,
    pub qtur_ok: bool,
    pub infinite_entropy: bool,
}

// ---------------------------------------------------------------------------
// Fano factor and classical bound
// ---------------------------------------------------------------------------

fn require_transport(params: &EngineParams) -> Result<(f64, f64), BoundsError> {
    let occ = occupations(params);
    if !params.engine_valid() || occ.n_h <= occ.n_c {
        return Err(BoundsError::NotAnEngine { x_hot: params.x_hot(), x_cold: params.x_cold() });
    }
    Ok((occ.n_h, occ.n_c))
}

/// Fano factor of the photon-number current, with its decomposition into
/// the population part F_p and the coherence-squared correction.
pub fn fano(params: &EngineParams) -> Result<FanoReport, BoundsError> {
    let (n_h, n_c) = require_transport(params)?;
    let delta_n = n_h - n_c;
    let f_pop = (2.0 * n_h * n_c + n_h + n_c) / delta_n;
    let sigma = steady_closed(params)?;
    let c = coherence_l1(&sigma);
    let coherent_correction = match rates(params) {
        Rates::Coherent { .. } => 1.5 * f_pop * c * c,
        Rates::Incoherent { .. } => {
            let g0 = params.gamma0;
            let alpha = params.alpha;
            let n_hc = n_h + n_c;
            let k = (4.0 * alpha * alpha
                + g0 * g0 * (n_hc * n_hc + 2.0 * n_hc + 3.0 * n_h * n_c))
                / (g0 * g0 * delta_n);
            k * c * c
        }
    };
    Ok(FanoReport { f_total: f_pop - coherent_correction, f_pop, coherent_correction })
}

/// Entropy flow per emitted photon (+inf at n_c = 0).
fn entropy_per_photon(n_h: f64, n_c: f64) -> f64 {
    if n_c == 0.0 {
        f64::INFINITY
    } else {
        (n_h * (n_c + 1.0) / (n_c * (n_h + 1.0))).ln()
    }
}

/// Classical uncertainty value Q = Sdot * nsr and its power-efficiency-
/// constancy twin D = (eta_Car - eta)(Var P/|P|) beta_c omega_h / gap.
/// The two are the same number (asserted to 1e-10 relative); both are
/// returned so callers can exercise the identity.
pub fn ctur(params: &EngineParams) -> Result<(f64, f64), BoundsError> {
    let (n_h, n_c) = require_transport(params)?;
    if n_c == 0.0 {
        return Err(BoundsError::InfiniteEntropy);
    }
    let report = fano(params)?;
    let q = entropy_per_photon(n_h, n_c) * report.f_total;

    let gap = params.omega_gap();
    // Var P / |P|; at zero drive take the alpha -> 0 limit F_p * gap.
    let var_to_mean = if params.alpha == 0.0 {
        report.f_total * gap
    } else {
        match cumulants_closed(params, CountedObservable::Power) {
            Ok(r) => r.variance / r.mean.abs(),
            Err(FcsError::ZeroMean) => return Err(BoundsError::ZeroMean),
            Err(e) => unreachable!("closed cumulants cannot fail here: {e}"),
        }
    };
    let eta = 1.0 - params.omega_c / params.omega_h;
    let eta_carnot = 1.0 - params.beta_h / params.beta_c;
    let d = (eta_carnot - eta) * var_to_mean * params.beta_c * params.omega_h / gap;
    assert!(
        (q - d).abs() <= Q_EQUALS_D_RTOL * q.abs(),
        "uncertainty-value identity violated: Q = {q:.17e} vs D = {d:.17e}"
    );
    Ok((q, d))
}

// ---------------------------------------------------------------------------
// Drazin inverse and quantum bound
// ---------------------------------------------------------------------------

/// Drazin inverse of a generator with rank-1 kernel:
/// Lp = (I - P)(L + P)^{-1}(I - P), P = vec(rho_ss) vec(I)^T.
/// The axioms L Lp = Lp L = I - P and Lp P = P Lp = 0 are verified to
/// 1e-10 (scaled by the matrix magnitudes).
pub fn drazin(l: &Superoperator, rho_ss: &DensityMatrix) -> Result<Superoperator, BoundsError> {
    let n = l.rows();
    let d = rho_ss.dim();
    assert!(l.is_square() && n == d * d, "generator/state dimensions mismatch");

    let vrho = rho_ss.vectorize();
    let vid = vec_identity(d);
    let mut p = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p.set(i, j, vrho[i] * vid[j]);
        }
    }
    let shifted = l.add(&p);
    let id = ComplexMatrix::identity(n);
    let proj = id.sub(&p);

    let mut x = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            b[i] = proj.get(i, j);
        }
        let col = match solve(&shifted, &b) {
            Ok(col) => col,
            Err(LinalgError::SingularMatrix { pivot, .. }) => {
                return Err(BoundsError::DegenerateSteadyState { detail: pivot })
            }
            Err(e) => panic!("unexpected solver failure: {e}"),
        };
        for i in 0..n {
            x.set(i, j, col[i]);
        }
    }
    let lp = proj.mul(&x);

    // Drazin axioms.
    let scale = 1.0 + l.max_abs() * lp.max_abs();
    let tol = DRAZIN_AXIOM_TOL * scale;
    let residual_right = l.mul(&lp).sub(&proj).max_abs();
    let residual_left = lp.mul(&l).sub(&proj).max_abs();
    let residual_proj = lp.mul(&p).max_abs().max(p.mul(&lp).max_abs());
    assert!(
        residual_right <= tol && residual_left <= tol && residual_proj <= tol,
        "Drazin axioms violated: right {residual_right:.3e}, left {residual_left:.3e}, \
         projector {residual_proj:.3e} vs tol {tol:.3e}"
    );
    Ok(lp)
}

/// Quantum dynamical activity sum_k Tr(L_k^dag L_k rho).
fn dynamical_activity(params: &EngineParams, rho: &DensityMatrix) -> f64 {
    let mut total = Complex64::new(0.0, 0.0);
    for jump in jump_operators(params) {
        let m = jump.matrix.adjoint().mul(&jump.matrix);
        total += m.mul(rho.matrix()).trace();
    }
    total.re
}

/// <<I| M |v>> = vec(I)^T (M v) for a working dimension d.
fn identity_bracket(d: usize, m: &Superoperator, v: &[Complex64]) -> Complex64 {
    let mv = m.apply(v);
    let mut out = Complex64::new(0.0, 0.0);
    for i in 0..d {
        out += mv[i + d * i];
    }
    out
}

/// Quantum bound components via the numeric steady state and the Drazin
/// inverse: (Upsilon, Psi, f) with f = 1/(Upsilon + Psi).
pub fn qtur_bound(params: &EngineParams) -> Result<(f64, f64, f64), BoundsError> {
    if !params.engine_valid() {
        return Err(BoundsError::NotAnEngine { x_hot: params.x_hot(), x_cold: params.x_cold() });
    }
    let l0 = liouvillian(params, CountingField::zero());
    let rho = steady_numeric(&l0)?;
    let upsilon = dynamical_activity(params, &rho);

    let lp = drazin(&l0, &rho)?;
    let (l_r, l_l) = lr_ll_split(params);
    let d = params.kind.working_dim();
    let vrho = rho.vectorize();

    let term_a = identity_bracket(d, &l_l.mul(&lp), &l_r.apply(&vrho));
    let term_b = identity_bracket(d, &l_r.mul(&lp), &l_l.apply(&vrho));
    let psi_c = (term_a + term_b) * Complex64::new(-4.0, 0.0);
    assert!(
        psi_c.im.abs() <= PSI_IMAG_TOL * (1.0 + psi_c.re.abs() + upsilon),
        "coherent contribution has an imaginary residue {:.3e}",
        psi_c.im
    );
    let psi = psi_c.re;
    let f = 1.0 / (upsilon + psi);
    Ok((upsilon, psi, f))
}

/// 1/f in closed form (the reciprocal of the bound).
fn inverse_f_closed(params: &EngineParams) -> f64 {
    let occ = occupations(params);
    let (n_h, n_c) = (occ.n_h, occ.n_c);
    let g0 = params.gamma0;
    let a2 = params.alpha * params.alpha;
    match params.kind {
        crate::engine::EngineKind::Coherent => {
            let a = n_h + n_c + 2.0 * n_h * n_c;
            2.0 * (2.0 * a2 + g0 * g0 * n_h * n_c * (n_c + 1.0) * (n_h + 1.0))
                * (32.0 * a2 + g0 * g0 * a * a)
                / (g0 * a * (8.0 * a2 + g0 * g0 * a * a))
        }
        crate::engine::EngineKind::Incoherent => {
            let n_hc = n_h + n_c;
            2.0 * (n_hc + 2.0)
                * (4.0 * a2 + g0 * g0 * n_h * n_c)
                * (16.0 * a2 + g0 * g0 * n_hc * n_hc)
                / (g0 * n_hc * (4.0 * a2 * (4.0 + 3.0 * n_hc) + g0 * g0 * n_hc * (n_hc + 3.0 * n_h * n_c)))
        }
    }
}

/// Closed-form quantum bound f (oracle for `qtur_bound`).
pub fn qtur_bound_closed(params: &EngineParams) -> Result<f64, BoundsError> {
    if !params.engine_valid() {
        return Err(BoundsError::NotAnEngine { x_hot: params.x_hot(), x_cold: params.x_cold() });
    }
    Ok(1.0 / inverse_f_closed(params))
}

/// Full uncertainty diagnostics through the closed-form route: classical
/// value Q (+inf when n_c = 0), noise-to-signal, entropy rate, and the
/// quantum bound decomposition with slack = nsr - f.
pub fn tur_report(params: &EngineParams) -> Result<TURReport, BoundsError> {
    let (n_h, n_c) = require_transport(params)?;
    let report = fano(params)?;
    let flux = match cumulants_closed(params, CountedObservable::PhotonFlux) {
        Ok(r) => r,
        Err(FcsError::ZeroMean) => return Err(BoundsError::ZeroMean),
        Err(e) => unreachable!("closed cumulants cannot fail here: {e}"),
    };
    let nsr = flux.nsr;

    let per_photon = entropy_per_photon(n_h, n_c);
    let infinite_entropy = per_photon.is_infinite();
    let entropy_rate = per_photon * flux.mean;
    let q_value = entropy_rate * nsr;

    let sigma = steady_closed(params)?;
    let upsilon = dynamical_activity(params, &sigma);
    let psi = inverse_f_closed(params) - upsilon;
    let f_bound = 1.0 / (upsilon + psi);
    let slack = nsr - f_bound;

    // Cross-check Q against the entropy-free grouping ln(...) * f_total.
    if !infinite_entropy {
        let alt = per_photon * report.f_total;
        assert!(
            (q_value - alt).abs() <= 1e-10 * alt.abs(),
            "Q groupings disagree: {q_value:.17e} vs {alt:.17e}"
        );
    }

    Ok(TURReport {
        q_value,
        nsr,
        entropy_rate,
        upsilon,
        psi,
        f_bound,
        slack,
        ctur_violated: q_value < 2.0,
        qtur_ok: slack >= QTUR_SLACK_FLOOR,
        infinite_entropy,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EngineKind;

    fn worked_point(kind: EngineKind) -> EngineParams {
        EngineParams::from_occupations(kind, 1.0, 10.0, 5.0, 1.0, 0.0, 0.5).unwrap()
    }

    #[test]
    fn fano_worked_point() {
        let r = fano(&worked_point(EngineKind::Coherent)).unwrap();
        assert!((r.f_pop - 1.0).abs() < 1e-12);
        assert!((r.coherent_correction - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.f_total - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fano_zero_drive_is_population_only() {
        let p = EngineParams::new(EngineKind::Incoherent, 0.1, 10.0, 5.0, 0.01, 0.8, 0.0).unwrap();
        let r = fano(&p).unwrap();
        assert_eq!(r.coherent_correction, 0.0);
        assert_eq!(r.f_total, r.f_pop);
    }

    #[test]
    fn fano_population_hand_value() {
        // n_h = 2, n_c = 1 -> F_p = (4 + 3)/1 = 7.
        let p = EngineParams::from_occupations(EngineKind::Coherent, 0.1, 10.0, 5.0, 2.0, 1.0, 0.0)
            .unwrap();
        let r = fano(&p).unwrap();
        assert!((r.f_pop - 7.0).abs() < 1e-12);
    }

    #[test]
    fn ctur_classical_limit() {
        let p = EngineParams::from_occupations(EngineKind::Coherent, 0.1, 10.0, 5.0, 2.0, 1.0, 0.0)
            .unwrap();
        let (q, d) = ctur(&p).unwrap();
        let expected = (4.0f64 / 3.0).ln() * 7.0;
        assert!((q - expected).abs() < 1e-12);
        assert!((d - expected).abs() < 1e-10);
        assert!(q >= 2.0);
    }

    #[test]
    fn ctur_rejects_degenerate_cold_bath() {
        assert_eq!(ctur(&worked_point(EngineKind::Coherent)), Err(BoundsError::InfiniteEntropy));
    }

    #[test]
    fn drazin_worked_entry_and_axioms() {
        let p = worked_point(EngineKind::Coherent);
        let l0 = liouvillian(&p, CountingField::zero());
        let rho = steady_numeric(&l0).unwrap();
        let lp = drazin(&l0, &rho).unwrap();
        // 2 i alpha/(8 alpha^2 + Gamma^2) = i/3 at gamma2 = 1, alpha = 1/2.
        assert!((lp.get(3, 2) - Complex64::new(0.0, 1.0 / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn qtur_worked_coherent() {
        let (upsilon, psi, f) = qtur_bound(&worked_point(EngineKind::Coherent)).unwrap();
        assert!((upsilon - 1.0 / 3.0).abs() < 1e-12);
        assert!((psi - 8.0 / 3.0).abs() < 1e-10);
        assert!((f - 1.0 / 3.0).abs() < 1e-11);
        let f_closed = qtur_bound_closed(&worked_point(EngineKind::Coherent)).unwrap();
        assert!((f_closed - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn qtur_worked_incoherent() {
        let (upsilon, psi, f) = qtur_bound(&worked_point(EngineKind::Incoherent)).unwrap();
        assert!((upsilon - 0.75).abs() < 1e-12);
        assert!((psi - 3.0).abs() < 1e-10);
        assert!((f - 4.0 / 15.0).abs() < 1e-11);
        let f_closed = qtur_bound_closed(&worked_point(EngineKind::Incoherent)).unwrap();
        assert!((f_closed - 4.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn zero_drive_has_no_coherent_contribution() {
        let p = EngineParams::new(EngineKind::Coherent, 0.2, 10.0, 5.0, 0.03, 0.5, 0.0).unwrap();
        let (upsilon, psi, f) = qtur_bound(&p).unwrap();
        assert!(psi.abs() <= 1e-12 * upsilon);
        assert!((f - 1.0 / upsilon).abs() < 1e-10 * f.abs());
    }

    #[test]
    fn closed_bound_is_rate_homogeneous() {
        let base = EngineParams::new(EngineKind::Incoherent, 0.05, 9.0, 4.0, 0.04, 0.6, 0.3)
            .unwrap();
        let scaled = EngineParams::new(EngineKind::Incoherent, 0.15, 9.0, 4.0, 0.04, 0.6, 0.9)
            .unwrap();
        let f1 = qtur_bound_closed(&base).unwrap();
        let f3 = qtur_bound_closed(&scaled).unwrap();
        assert!((f3 - f1 / 3.0).abs() <= 1e-12 * f1);
    }

    #[test]
    fn tur_report_worked_point() {
        let r = tur_report(&worked_point(EngineKind::Coherent)).unwrap();
        assert!((r.nsr - 1.0).abs() < 1e-12);
        assert!((r.f_bound - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.slack - 2.0 / 3.0).abs() < 1e-12);
        assert!(r.qtur_ok);
        assert!(r.infinite_entropy);
        assert!(r.q_value.is_infinite() && r.q_value > 0.0);
        assert!(!r.ctur_violated);
    }

    #[test]
    fn tur_report_finite_entropy_consistency() {
        let p = EngineParams::new(EngineKind::Incoherent, 0.05, 9.0, 4.0, 0.04, 0.6, 0.3).unwrap();
        let r = tur_report(&p).unwrap();
        assert!(!r.infinite_entropy);
        assert!(r.entropy_rate > 0.0);
        // Q = Sdot * nsr by construction.
        assert_eq!(r.q_value, r.entropy_rate * r.nsr);
        // Matches the (Q, D) pair from the dedicated routine.
        let (q, _) = ctur(&p).unwrap();
        assert!((r.q_value - q).abs() <= 1e-10 * q.abs());
        assert!(r.qtur_ok);
        // Numeric and closed bounds agree.
        let (_, _, f_numeric) = qtur_bound(&p).unwrap();
        assert!((f_numeric - r.f_bound).abs() <= 1e-8 * r.f_bound.abs());
    }

    #[test]
    fn non_engine_rejected_everywhere() {
        let p = EngineParams::new(EngineKind::Coherent, 0.1, 10.0, 5.0, 0.3, 0.4, 0.5).unwrap();
        assert!(matches!(fano(&p), Err(BoundsError::NotAnEngine { .. })));
        assert!(matches!(ctur(&p), Err(BoundsError::NotAnEngine { .. })));
        assert!(matches!(qtur_bound(&p), Err(BoundsError::NotAnEngine { .. })));
        assert!(matches!(tur_report(&p), Err(BoundsError::NotAnEngine { .. })));
    }
}
