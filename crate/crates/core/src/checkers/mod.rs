//! Theorem-level property checks.

pub mod catmap;
pub mod lyapunov;
pub mod shadowing;

pub use catmap::CatMap;
pub use lyapunov::{
    cat_map_exponents, cat_map_splitting_search, hyperbolic_splitting_search, lyapunov_spectrum,
    SplittingCandidate, SplittingOutcome,
};
pub use shadowing::{
    falsify_expansivity, falsify_shadowing, CertificateMethod, ExpansivityCounterexample,
    PseudoOrbit, TracingCertificate, TracingVerdict,
};
