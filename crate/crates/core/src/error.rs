//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A coefficient profile failed construction or Condition-1 validation.
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// An atom specification or moment query is unsupported.
    #[error("invalid atom: {0}")]
    InvalidAtom(String),

    /// An argument is outside the domain of the requested evaluation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerically impossible intermediate was detected (e.g. a radicand
    /// below the roundoff clamp); the caller must refine precision.
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    /// The root solver did not converge after the allowed restarts; the
    /// sample is excluded and counted, never silently dropped.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// An experiment or CLI configuration is inconsistent.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}
