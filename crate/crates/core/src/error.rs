use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: usize },

    #[error("critical point of H: |grad| = {norm:e} is below the tolerance {tol:e}")]
    CriticalPoint { norm: f64, tol: f64 },

    #[error("point is not on the level set: |f(z)| = {value:e} exceeds {tol:e}")]
    OffSurface { value: f64, tol: f64 },

    #[error("vector is not tangent to the level set (tangency residual {residual:e})")]
    NotTangent { residual: f64 },

    #[error("energy drift {drift:e} exceeds {tol:e} at step {step}")]
    EnergyDrift { step: usize, drift: f64, tol: f64 },

    #[error("could not complete an adapted frame from any seed vector")]
    FrameBreakdown,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {0} is not an interior node")]
    NotInterior(usize),

    #[error("grid spacing {h} leaves no interior nodes")]
    NoInteriorNodes { h: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("Picard iteration diverged: residual grew for 5 consecutive iterations (iteration {iteration}, residual {residual:e})")]
    Divergence { iteration: usize, residual: f64 },
}

pub(crate) fn check_len(got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: expected.to_string(),
            got,
        })
    }
}
