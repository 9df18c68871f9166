use thiserror::Error;

use crate::zeros::Rect;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid energy distribution: {0}")]
    InvalidDistribution(String),

    #[error("level index {index} out of range for {len} levels")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid search window: {0}")]
    InvalidWindow(String),

    #[error("winding number did not converge on {rect}")]
    NonConvergent { rect: Rect },

    #[error("system size {n} exceeds the cap of {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("initial ground state is degenerate (gap {gap:e})")]
    DegenerateGroundState { gap: f64 },

    #[error("invalid model specification: {0}")]
    InvalidSpec(String),

    #[error("field h = {h} is not in the ordered phase")]
    OutOfPhase { h: f64 },

    #[error("gapless mode at q = {q}")]
    GaplessMode { q: f64 },

    #[error("initial and final modes are orthogonal at q = {q}")]
    OrthogonalMode { q: f64 },

    #[error("level spacing is not positive between j = {j} and j + 1")]
    InvalidSpacing { j: i64 },

    #[error("theta series diverges: Im tau = {im_tau}")]
    ThetaNonConvergent { im_tau: f64 },

    #[error("outside the validity region: {0}")]
    OutOfValidity(String),

    #[error("first-order correction is singular at z = {beta} + {t}i")]
    SingularK { beta: f64, t: f64 },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
