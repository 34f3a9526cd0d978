use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("fluence interval is reversed: xi = {xi} > tau = {tau}")]
    ReversedInterval { xi: f64, tau: f64 },

    #[error(
        "no root of the characteristic equation at z = {z}, tau = {tau} \
         in window [{lo}, {hi}] (g = {g_lo:e} .. {g_hi:e})"
    )]
    BracketFailure {
        z: f64,
        tau: f64,
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("characteristic fold at z = {z}, tau = {tau}")]
    Fold { z: f64, tau: f64 },

    #[error("near-fold denominator {denom:e} at z = {z}, tau = {tau}")]
    NearFold { z: f64, tau: f64, denom: f64 },

    #[error("coupling factor f(theta) vanishes at z = {z}, tau = {tau} (theta = {theta})")]
    Singularity { z: f64, tau: f64, theta: f64 },

    #[error("total Rabi frequency below the tail floor at z = {z}, tau = {tau}")]
    UndefinedVelocity { z: f64, tau: f64 },

    #[error("adiabaticity violated at z = {z}, tau = {tau}: |theta_dot / W| = {ratio}")]
    AdiabaticityViolated { z: f64, tau: f64, ratio: f64 },

    #[error("step size too large: dt * max(W, |delta_p|, gamma) = {product} >= {limit}")]
    StepSize { product: f64, limit: f64 },

    #[error("oracle diverged at z = {z}; last stable slice index {last_stable}")]
    Divergence { z: f64, last_stable: usize },

    #[error("grids do not align: {0}")]
    Alignment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::Config(_)
            | Error::ReversedInterval { .. }
            | Error::StepSize { .. } => 2,
            Error::BracketFailure { .. }
            | Error::Fold { .. }
            | Error::NearFold { .. }
            | Error::Singularity { .. }
            | Error::UndefinedVelocity { .. }
            | Error::AdiabaticityViolated { .. } => 3,
            Error::Divergence { .. } | Error::Alignment(_) => 4,
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) => 5,
        }
    }
}
