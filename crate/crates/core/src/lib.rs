//! Numerical laboratory for the riemannian / transversely holomorphic flow
//! families on closed 3-manifolds.
//!
//! The crate builds the five model manifolds and six model flows of the
//! classification, measures Poincaré return maps, and runs the theorem-level
//! property checks: nonhyperbolicity, vanishing Lyapunov exponents, failure
//! of shadowing and expansivity, total recurrence, ω-limit classification,
//! and emptiness of attractors.

pub mod error;
pub mod quad;
#[macro_use]
pub mod geometry;
pub mod flowzoo;
pub mod sections;
pub mod checkers;
pub mod oracle;

pub use error::{Error, Result};

/// Deterministic RNG used by unit tests.
#[cfg(test)]
pub(crate) fn test_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
