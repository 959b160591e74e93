use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Order or argument outside the box where the cylinder functions are supported.
    #[error("outside validity domain: {0}")]
    Domain(String),

    #[error("value overflows double precision: {0}")]
    Overflow(String),

    /// Internal self-check (Wronskian) failed after all retries.
    #[error("accuracy self-check failed: {0}")]
    Accuracy(String),

    #[error("near-singular transmission system at mode {mode}: |D_m| = {det_abs:e}")]
    NearSingular { mode: u32, det_abs: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("order cap of {cap} exceeded")]
    CapExceeded { cap: u32 },

    #[error("function vanishes (numerically) on the contour")]
    ZeroOnContour,

    #[error("contour refinement budget exceeded")]
    RefinementBudget,

    #[error("quadrature did not converge: {0}")]
    QuadratureBudget(String),

    #[error("log-space magnitude {0:e} exceeds the supported range")]
    LogOverflow(f64),
}
