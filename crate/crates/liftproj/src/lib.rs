//! Exact and numerical engine for Lovász–Schrijver lift-and-project
//! relaxations of 0-1 polytopes.
//!
//! The crate works with homogenized polyhedral cones `K ⊆ Q`, where `Q` is
//! the cone spanned by all 0-1 vectors `(1, x)`, and provides:
//!
//! * exact rational arithmetic, dense linear algebra, and a rational
//!   LDLᵀ-based positive-semidefiniteness test with certificates
//!   ([`rational`], [`linalg`]);
//! * an exact simplex solver with verified optimality/infeasibility
//!   certificates ([`lp`]);
//! * cone modelling: faces, flips, inclusion tests, integral hulls and the
//!   standard instance families ([`cone`]);
//! * the polyhedral operators `N`, `N₀` and the disjunctive bound `Ñ₀`,
//!   realized as explicit nested lifted systems ([`lifted`]);
//! * a dense primal-dual interior-point solver for small semidefinite
//!   systems ([`sdp`]) and the semidefinite operator `N₊` ([`nplus`]);
//! * the symmetric-point recurrences driving the worst-case analysis of
//!   the majority-cone family ([`recurrence`]);
//! * dual-side machinery: explicit generators of the matrix cones whose
//!   duals describe the lifted sets, with exact membership tests and the
//!   criteria for when the operator variants coincide ([`dual`]).

pub mod cone;
pub mod dual;
pub mod error;
pub mod lifted;
pub mod linalg;
pub mod lp;
pub mod nplus;
pub mod rational;
pub mod recurrence;
pub mod sdp;

pub use error::{Error, Result};
pub use rational::Rational;

/// Environment-variable overrides for guard limits and solver tolerance.
/// Every knob has a compiled-in default; the variables exist so oversized
/// runs can be unlocked (or tightened) without rebuilding.
pub(crate) mod knobs {
    pub(crate) fn env_usize(key: &str, default: usize) -> usize {
        std::env::var(key).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
    }

    pub(crate) fn env_u128(key: &str, default: u128) -> u128 {
        std::env::var(key).ok().and_then(|v| v.parse().ok()).unwrap_or(default)
    }

    pub(crate) fn env_f64(key: &str, default: f64) -> f64 {
        std::env::var(key)
            .ok()
            .and_then(|v| v.parse().ok())
            .filter(|e: &f64| e.is_finite() && *e > 0.0)
            .unwrap_or(default)
    }
}
