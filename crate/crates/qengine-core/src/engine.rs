//! Engine models: parameters, thermal occupations, transition rates, jump
//! operators, and counting-field-dressed Liouvillian superoperators in the
//! rotating frame.
//!
//! Two engines are implemented on a qutrit with bare Hamiltonian
//! H_S = diag(0, w_h - w_c, w_h):
//!
//! * the *coherent* engine exchanges quanta with both baths in a single
//!   two-photon jump `b_hc = |0><1|` and lives on the {|0>, |1>} subspace
//!   (4 x 4 superoperators);
//! * the *incoherent* engine couples each bath to its own one-photon
//!   transition, `b_h = |0><2|` and `b_c = |1><2|`, on the full qutrit
//!   (9 x 9 superoperators).
//!
//! In the rotating frame the only coherent generator is the drive
//! H_dR = alpha(|0><1| + |1><0|); all time dependence is gone and a true
//! steady state exists. Vectorization is fixed to column stacking, i.e.
//! vec(A X B) = (B^T (x) A) vec(X), with vec(X)[i + d*j] = X[i,j].

use crate::linalg::{kron, ComplexMatrix};
use num_complex::Complex64;
use std::fmt;

/// Thermal exponent beyond which a Bose-Einstein occupation underflows to
/// exactly zero and the bath is flagged as degenerate.
const DEGENERATE_EXPONENT: f64 = 700.0;

/// Superoperators are plain dense matrices acting on vectorized density
/// matrices (4 x 4 or 9 x 9 here).
pub type Superoperator = ComplexMatrix;

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

/// Which engine model a parameter set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EngineKind {
    /// Two-photon (Raman-type) engine: hot absorption correlated with cold
    /// emission in a single jump.
    Coherent,
    /// Standard one-photon engine: independent exchanges with each bath.
    Incoherent,
}

impl EngineKind {
    /// Hilbert-space dimension the model acts on (2 or 3).
    pub fn working_dim(self) -> usize {
        match self {
            EngineKind::Coherent => 2,
            EngineKind::Incoherent => 3,
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EngineKind::Coherent => write!(f, "coherent"),
            EngineKind::Incoherent => write!(f, "incoherent"),
        }
    }
}

/// A parameter-validation failure; the message names the violated invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    Gamma0NotPositive { gamma0: f64 },
    FrequencyOrder { omega_h: f64, omega_c: f64 },
    AlphaNegative { alpha: f64 },
    TemperatureOrder { beta_h: f64, beta_c: f64 },
    OccupationInvalid { name: &'static str, value: f64 },
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::Gamma0NotPositive { gamma0 } => {
                write!(f, "invariant gamma0 > 0 violated: gamma0 = {gamma0}")
            }
            ParamError::FrequencyOrder { omega_h, omega_c } => write!(
                f,
                "invariant omega_h > omega_c > 0 violated: omega_h = {omega_h}, omega_c = {omega_c}"
            ),
            ParamError::AlphaNegative { alpha } => {
                write!(f, "invariant alpha >= 0 violated: alpha = {alpha}")
            }
            ParamError::TemperatureOrder { beta_h, beta_c } => write!(
                f,
                "invariant beta_c > beta_h > 0 violated: beta_h = {beta_h}, beta_c = {beta_c}"
            ),
            ParamError::OccupationInvalid { name, value } => {
                write!(f, "occupation {name} must be a finite non-negative real, got {value}")
            }
        }
    }
}

impl std::error::Error for ParamError {}

/// The six physical inputs plus the engine-kind tag.
///
/// Invariants enforced on construction: omega_h > omega_c > 0, gamma0 > 0,
/// alpha >= 0, beta_c > beta_h > 0 (beta_c = +inf encodes a zero-temperature
/// cold bath). Units are hbar = k_B = 1 throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineParams {
    pub gamma0: f64,
    pub omega_h: f64,
    pub omega_c: f64,
    pub beta_h: f64,
    pub beta_c: f64,
    pub alpha: f64,
    pub kind: EngineKind,
}

impl EngineParams {
    /// Validates and constructs a parameter set.
    pub fn new(
        kind: EngineKind,
        gamma0: f64,
        omega_h: f64,
        omega_c: f64,
        beta_h: f64,
        beta_c: f64,
        alpha: f64,
    ) -> Result<Self, ParamError> {
        if !(gamma0.is_finite() && gamma0 > 0.0) {
            return Err(ParamError::Gamma0NotPositive { gamma0 });
        }
        if !(omega_h.is_finite() && omega_c.is_finite() && omega_h > omega_c && omega_c > 0.0) {
            return Err(ParamError::FrequencyOrder { omega_h, omega_c });
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(ParamError::AlphaNegative { alpha });
        }
        // beta_c may be +inf (zero-temperature cold bath); beta_h must be finite.
        if !(beta_h.is_finite() && beta_h > 0.0 && beta_c > beta_h) {
            return Err(ParamError::TemperatureOrder { beta_h, beta_c });
        }
        Ok(EngineParams { gamma0, omega_h, omega_c, beta_h, beta_c, alpha, kind })
    }

    /// Constructs a parameter set from target mean occupations instead of
    /// inverse temperatures: beta_x = ln(1 + 1/n_x)/omega_x. `n_c = 0` maps
    /// to beta_c = +inf (zero-temperature cold bath).
    pub fn from_occupations(
        kind: EngineKind,
        gamma0: f64,
        omega_h: f64,
        omega_c: f64,
        n_h: f64,
        n_c: f64,
        alpha: f64,
    ) -> Result<Self, ParamError> {
        if !(n_h.is_finite() && n_h > 0.0) {
            return Err(ParamError::OccupationInvalid { name: "n_h", value: n_h });
        }
        if !(n_c.is_finite() && n_c >= 0.0) {
            return Err(ParamError::OccupationInvalid { name: "n_c", value: n_c });
        }
        let beta_h = (1.0 / n_h).ln_1p() / omega_h;
        let beta_c = (1.0 / n_c).ln_1p() / omega_c;
        Self::new(kind, gamma0, omega_h, omega_c, beta_h, beta_c, alpha)
    }

    /// Hot-bath thermal exponent beta_h * omega_h.
    pub fn x_hot(&self) -> f64 {
        self.beta_h * self.omega_h
    }

    /// Cold-bath thermal exponent beta_c * omega_c.
    pub fn x_cold(&self) -> f64 {
        self.beta_c * self.omega_c
    }

    /// Engine condition beta_h omega_h < beta_c omega_c (equivalently
    /// n_h > n_c): true when the parameter point can extract work.
    pub fn engine_valid(&self) -> bool {
        self.x_hot() < self.x_cold()
    }

    /// Frequency gap omega_h - omega_c carried by one emitted work quantum.
    pub fn omega_gap(&self) -> f64 {
        self.omega_h - self.omega_c
    }
}

// ---------------------------------------------------------------------------
// Occupations and rates
// ---------------------------------------------------------------------------

/// Mean photon numbers of the two baths at their transition frequencies,
/// with degenerate-bath flags for exponents past the underflow cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Occupations {
    pub n_h: f64,
    pub n_c: f64,
    /// True when beta_h * omega_h > 700 so n_h underflowed to exactly 0.
    pub hot_degenerate: bool,
    /// True when beta_c * omega_c > 700 so n_c underflowed to exactly 0.
    pub cold_degenerate: bool,
}

fn bose_occupation(x: f64) -> (f64, bool) {
    if x > DEGENERATE_EXPONENT {
        (0.0, true)
    } else {
        (1.0 / x.exp_m1(), false)
    }
}

/// Bose-Einstein occupations n_x = 1/(e^{beta_x omega_x} - 1).
pub fn occupations(params: &EngineParams) -> Occupations {
    let (n_h, hot_degenerate) = bose_occupation(params.x_hot());
    let (n_c, cold_degenerate) = bose_occupation(params.x_cold());
    Occupations { n_h, n_c, hot_degenerate, cold_degenerate }
}

/// Golden-rule transition rates of the active jumps, together with the
/// occupations they derive from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rates {
    /// Two-photon rates: gamma1 = gamma0 n_c (n_h + 1) for the
    /// hot-emission/cold-absorption jump, gamma2 = gamma0 n_h (n_c + 1)
    /// for its reverse.
    Coherent { gamma1: f64, gamma2: f64, n_h: f64, n_c: f64 },
    /// One-photon rates: g1 = gamma0 (n_h + 1), g2 = gamma0 n_h (hot
    /// emission/absorption), g3 = gamma0 (n_c + 1), g4 = gamma0 n_c (cold).
    Incoherent { g1: f64, g2: f64, g3: f64, g4: f64, n_h: f64, n_c: f64 },
}

/// Transition rates for the parameter point.
pub fn rates(params: &EngineParams) -> Rates {
    let occ = occupations(params);
    let (n_h, n_c) = (occ.n_h, occ.n_c);
    let g0 = params.gamma0;
    match params.kind {
        EngineKind::Coherent => Rates::Coherent {
            gamma1: g0 * n_c * (n_h + 1.0),
            gamma2: g0 * n_h * (n_c + 1.0),
            n_h,
            n_c,
        },
        EngineKind::Incoherent => Rates::Incoherent {
            g1: g0 * (n_h + 1.0),
            g2: g0 * n_h,
            g3: g0 * (n_c + 1.0),
            g4: g0 * n_c,
            n_h,
            n_c,
        },
    }
}

// ---------------------------------------------------------------------------
// Hamiltonians and jump operators
// ---------------------------------------------------------------------------

/// Bare qutrit Hamiltonian H_S = diag(0, omega_h - omega_c, omega_h) (always
/// 3 x 3) and rotating-frame drive H_dR = alpha(|0><1| + |1><0|) at the
/// working dimension of the kind (2 x 2 coherent, 3 x 3 incoherent).
pub fn hamiltonians(params: &EngineParams) -> (ComplexMatrix, ComplexMatrix) {
    let mut h_s = ComplexMatrix::zeros(3, 3);
    h_s.set(1, 1, Complex64::new(params.omega_h - params.omega_c, 0.0));
    h_s.set(2, 2, Complex64::new(params.omega_h, 0.0));

    let d = params.kind.working_dim();
    let mut h_dr = ComplexMatrix::zeros(d, d);
    let a = Complex64::new(params.alpha, 0.0);
    h_dr.set(0, 1, a);
    h_dr.set(1, 0, a);
    (h_s, h_dr)
}

/// A Lindblad jump operator with its counting weights. The matrix already
/// carries sqrt(rate); the counting-field dressing multiplies the sandwich
/// term by exp(i (weight_h chi_h + weight_c chi_c)), where the weights are
/// the signed frequencies (+-omega_h, +-omega_c, or 0) absorbed by the
/// system in that jump.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpOperator {
    pub matrix: ComplexMatrix,
    pub weight_h: f64,
    pub weight_c: f64,
}

fn elementary(d: usize, i: usize, j: usize, rate: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m.set(i, j, Complex64::new(rate.sqrt(), 0.0));
    m
}

/// The model's jump operators: 2 two-photon jumps (coherent) or 4 one-photon
/// jumps (incoherent), each with sqrt(rate) folded into the matrix.
pub fn jump_operators(params: &EngineParams) -> Vec<JumpOperator> {
    let (wh, wc) = (params.omega_h, params.omega_c);
    match rates(params) {
        Rates::Coherent { gamma1, gamma2, .. } => vec![
            // b_hc = |0><1|: emit hot quantum, absorb cold quantum.
            JumpOperator { matrix: elementary(2, 0, 1, gamma1), weight_h: -wh, weight_c: wc },
            // b_hc^dag = |1><0|: absorb hot, emit cold.
            JumpOperator { matrix: elementary(2, 1, 0, gamma2), weight_h: wh, weight_c: -wc },
        ],
        Rates::Incoherent { g1, g2, g3, g4, .. } => vec![
            // b_h = |0><2|: emit hot quantum.
            JumpOperator { matrix: elementary(3, 0, 2, g1), weight_h: -wh, weight_c: 0.0 },
            // b_h^dag = |2><0|: absorb hot quantum.
            JumpOperator { matrix: elementary(3, 2, 0, g2), weight_h: wh, weight_c: 0.0 },
            // b_c = |1><2|: emit cold quantum.
            JumpOperator { matrix: elementary(3, 1, 2, g3), weight_h: 0.0, weight_c: -wc },
            // b_c^dag = |2><1|: absorb cold quantum.
            JumpOperator { matrix: elementary(3, 2, 1, g4), weight_h: 0.0, weight_c: wc },
        ],
    }
}

// ---------------------------------------------------------------------------
// Counting field and Liouvillians
// ---------------------------------------------------------------------------

/// Counting-field pair (chi_h, chi_c); (0, 0) recovers the undressed
/// generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingField {
    pub chi_h: f64,
    pub chi_c: f64,
}

impl CountingField {
    pub fn new(chi_h: f64, chi_c: f64) -> Self {
        assert!(chi_h.is_finite() && chi_c.is_finite(), "counting fields must be finite");
        CountingField { chi_h, chi_c }
    }

    pub fn zero() -> Self {
        CountingField { chi_h: 0.0, chi_c: 0.0 }
    }
}

/// Counting-field-dressed Liouvillian in the rotating frame, d^2 x d^2 under
/// column stacking:
///
/// ```text
/// L(chi) = -i (I (x) H_dR - H_dR^T (x) I)
///        + sum_k [ e^{i(w_h chi_h + w_c chi_c)} conj(L_k) (x) L_k
///                  - 1/2 I (x) L_k^dag L_k - 1/2 (L_k^dag L_k)^T (x) I ]
/// ```
///
/// At chi = (0,0) the left row vector vec(I)^T annihilates it exactly
/// (trace preservation): the three dissipator terms cancel column sums
/// bit-for-bit and the Hamiltonian part cancels by hermiticity.
pub fn liouvillian(params: &EngineParams, chi: CountingField) -> Superoperator {
    let (_, h_dr) = hamiltonians(params);
    let d = params.kind.working_dim();
    let id = ComplexMatrix::identity(d);
    let minus_i = Complex64::new(0.0, -1.0);
    let plus_i = Complex64::new(0.0, 1.0);

    let mut l = kron(&id, &h_dr).scale(minus_i).add(&kron(&h_dr.transpose(), &id).scale(plus_i));

    let half = Complex64::new(-0.5, 0.0);
    for jump in jump_operators(params) {
        let phase = Complex64::from_polar(1.0, jump.weight_h * chi.chi_h + jump.weight_c * chi.chi_c);
        let lk = &jump.matrix;
        let lklk = lk.adjoint().mul(lk);
        l = l
            .add(&kron(&lk.conjugate(), lk).scale(phase))
            .add(&kron(&id, &lklk).scale(half))
            .add(&kron(&lklk.transpose(), &id).scale(half));
    }
    l
}

/// The two halves of the undressed generator used by the quantum bound:
///
/// ```text
/// L_R = -i I (x) H_dR + 1/2 sum_k (conj(L_k) (x) L_k - I (x) L_k^dag L_k)
/// L_L = +i H_dR^T (x) I + 1/2 sum_k (conj(L_k) (x) L_k - (L_k^dag L_k)^T (x) I)
/// ```
///
/// Their sum reproduces `liouvillian(params, 0)` entrywise.
pub fn lr_ll_split(params: &EngineParams) -> (Superoperator, Superoperator) {
    let (_, h_dr) = hamiltonians(params);
    let d = params.kind.working_dim();
    let id = ComplexMatrix::identity(d);
    let minus_i = Complex64::new(0.0, -1.0);
    let plus_i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let minus_half = Complex64::new(-0.5, 0.0);

    let mut l_r = kron(&id, &h_dr).scale(minus_i);
    let mut l_l = kron(&h_dr.transpose(), &id).scale(plus_i);
    for jump in jump_operators(params) {
        let lk = &jump.matrix;
        let lklk = lk.adjoint().mul(lk);
        let sandwich_half = kron(&lk.conjugate(), lk).scale(half);
        l_r = l_r.add(&sandwich_half).add(&kron(&id, &lklk).scale(minus_half));
        l_l = l_l.add(&sandwich_half).add(&kron(&lklk.transpose(), &id).scale(minus_half));
    }
    (l_r, l_l)
}

/// Left null row of every trace-preserving generator: vec(I)^T, i.e. the
/// indicator of diagonal positions under column stacking.
pub fn vec_identity(d: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i + d * i] = Complex64::new(1.0, 0.0);
    }
    v
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
