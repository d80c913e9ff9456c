//! Seeded random parameter generators for cross-validation batteries.
//!
//! Two profiles are provided. `sample_well_conditioned` draws points whose
//! finite-difference counting statistics are numerically benign: moderate
//! frequencies, thermal occupations of order one, and a drive strength tied
//! to the total relaxation scale gamma0 (n_h + n_c + 2 n_h n_c) so that
//! variances are never suppressed below the determinant noise floor.
//! `sample_broad` stretches every knob over decades (including nearly
//! degenerate cold baths) for exercising closed-form inequalities whose
//! evaluation does not involve finite differences.
//!
//! All draws are engine-valid by construction (the cold thermal exponent is
//! a strict multiple > 1 of the hot one) and deterministic for a given RNG
//! stream (ChaCha8, seeded explicitly by callers).

use crate::engine::{EngineKind, EngineParams};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic RNG stream for the samplers.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

fn draw_kind<R: Rng>(rng: &mut R) -> EngineKind {
    if rng.random_bool(0.5) {
        EngineKind::Coherent
    } else {
        EngineKind::Incoherent
    }
}

/// Engine-valid point in the numerically benign regime (alpha <= 1,
/// occupations of order one, drive tied to the relaxation scale). Rejection
/// sampling keeps the drive/relaxation coupling intact: if the drawn alpha
/// exceeds 1 the whole point is redrawn.
pub fn sample_well_conditioned<R: Rng>(rng: &mut R) -> EngineParams {
    loop {
        let omega_h = rng.random_range(4.0..12.0);
        let omega_c = omega_h * rng.random_range(0.4..0.7);
        let gamma0 = log_uniform(rng, 0.05, 0.2);
        let x_h = log_uniform(rng, 0.2, 1.0);
        let delta = log_uniform(rng, 0.3, 1.0);
        let x_c = x_h * (1.0 + delta);
        let n_h = 1.0 / x_h.exp_m1();
        let n_c = 1.0 / x_c.exp_m1();
        let relaxation = gamma0 * (n_h + n_c + 2.0 * n_h * n_c);
        let alpha = relaxation * 10f64.powf(rng.random_range(-0.5..0.5));
        if alpha > 1.0 {
            continue;
        }
        let kind = draw_kind(rng);
        return EngineParams::new(kind, gamma0, omega_h, omega_c, x_h / omega_h, x_c / omega_c, alpha)
            .expect("well-conditioned sampler ranges always validate");
    }
}

/// Engine-valid point with every parameter stretched over decades,
/// including nearly degenerate cold baths (thermal exponent ratios up to
/// 201) and drives from 1e-4 to 2.
pub fn sample_broad<R: Rng>(rng: &mut R) -> EngineParams {
    let omega_h = log_uniform(rng, 2.0, 20.0);
    let omega_c = omega_h * rng.random_range(0.25..0.8);
    let gamma0 = log_uniform(rng, 1e-3, 0.5);
    let x_h = log_uniform(rng, 0.01, 2.0);
    let delta = log_uniform(rng, 0.05, 200.0);
    let x_c = x_h * (1.0 + delta);
    let alpha = log_uniform(rng, 1e-4, 2.0);
    let kind = draw_kind(rng);
    EngineParams::new(kind, gamma0, omega_h, omega_c, x_h / omega_h, x_c / omega_c, alpha)
        .expect("broad sampler ranges always validate")
}
