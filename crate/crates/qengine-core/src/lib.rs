//! Steady states, full counting statistics, and uncertainty-relation
//! diagnostics for two continuous three-level quantum heat engines.
//!
//! Both machines pump a qutrit with a hot and a cold bosonic bath and
//! extract work through a weak drive of strength alpha; they differ in how
//! the baths couple:
//!
//! * **Coherent**: both baths drive the same |0> <-> |2> ladder via a
//!   two-photon process, so the dissipative dynamics closes on the
//!   {|0>, |1>} pair with effective rates gamma0 n_c (n_h + 1) and
//!   gamma0 n_h (n_c + 1).
//! * **Incoherent**: the hot bath drives |0> <-> |2| and the cold bath
//!   |1> <-> |2> independently with four thermal rates.
//!
//! The crate computes, for either machine at a validated parameter point:
//!
//! * the steady state (closed form and numeric kernel solve) and its
//!   energetic coherence ([`steady`]),
//! * mean, variance, and noise-to-signal ratio of power, heat currents,
//!   and photon flux via characteristic-polynomial counting statistics,
//!   with a closed-form twin for every numeric route ([`fcs`]),
//! * Fano factors, the classical uncertainty value Q, and the quantum
//!   bound nsr >= 1/(Upsilon + Psi) through the Drazin inverse
//!   ([`bounds`]).
//!
//! [`linalg`] supplies the minimal dense complex kernel (LU solves,
//! determinants, characteristic polynomials, Newton root refinement) and
//! [`sample`] seeded random parameter generators for validation batteries.
//! No external linear-algebra or eigensolver dependency is used: every
//! spectral quantity is reached through solves, determinants, and Newton
//! refinement, which keeps results bit-reproducible across platforms.

pub mod bounds;
pub mod engine;
pub mod fcs;
pub mod linalg;
pub mod sample;
pub mod steady;
