//! Error type shared by every module of the laboratory.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input coordinate")]
    NonFiniteInput,
    #[error("sphere coordinate has zero norm")]
    ZeroNormSphereCoordinate,
    #[error("points belong to different manifold families")]
    MismatchedFamilies,
    #[error("slope components are rationally dependent: {0}")]
    IrrationalityViolation(String),
    #[error("matrix is not in SL(2,Z) with trace > 2: {0}")]
    NotHyperbolicMatrix(String),
    #[error("deck action has a fixed point at a generic sample: {0}")]
    NonFreeAction(String),
    #[error("section radius {radius} too large: {reason}")]
    RadiusTooLarge { radius: f64, reason: String },
    #[error("no section return within horizon t_max={t_max}")]
    NoReturnWithinHorizon { t_max: f64 },
    #[error("shadowing certificate inconclusive: {0}")]
    CertificateInconclusive(String),
    #[error("orbit too short for the finest grid (occupancy {occupied} of {samples} samples)")]
    InsufficientOccupancy { occupied: usize, samples: usize },
    #[error("trace grid spacing {spacing} exceeds epsilon/4 = {limit}")]
    GridTooCoarse { spacing: f64, limit: f64 },
    #[error("finite-difference step {0} outside [1e-8, 1e-3]")]
    StepOutOfRange(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("return map is not an isometry (defect {0:.3e})")]
    NotAnIsometry(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
