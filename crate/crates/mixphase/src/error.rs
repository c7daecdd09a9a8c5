use thiserror::Error;

/// Failure modes of the numeric kernel and the phase pipeline.
///
/// Tolerance-gated validations report the measured residual so callers can
/// tell a hard structural failure from a marginal one.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not anti-Hermitian (relative residual {residual:.3e})")]
    NotAntiHermitian { residual: f64 },

    #[error("iteration did not converge within {limit} {unit}")]
    NoConvergence { limit: usize, unit: &'static str },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is rank deficient (smallest/largest spectral ratio {ratio:.3e})")]
    RankDeficient { ratio: f64 },

    #[error("complex argument undefined: |z| = {magnitude:.3e} below cutoff")]
    ZeroMagnitude { magnitude: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("state is not normalized (norm/trace {norm})")]
    NotNormalized { norm: f64 },

    #[error("matrix is not unitary (relative residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("overlap magnitude {magnitude:.3e} at step {index} too small to accumulate a phase")]
    VanishingOverlap { index: usize, magnitude: f64 },

    #[error("path is not closed: endpoint deviates by {deviation:.3e}")]
    NotClosed { deviation: f64 },

    #[error("projectors do not resolve the identity (residual {residual:.3e})")]
    NotAResolution { residual: f64 },

    #[error("band gap closes near k = {k} (gap {gap:.3e})")]
    GapClosure { k: f64, gap: f64 },

    #[error("inverse temperature too large for a finite thermal weight sum")]
    BetaTooLarge,

    #[error("series truncation insufficient: tail bound {tail:.3e} above {requirement:.3e}")]
    TruncationInsufficient { tail: f64, requirement: f64 },

    #[error("beta = 0 has no convergent series; use the closed form")]
    BetaZero,

    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
