use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("branch cut: z = {0} lies on the negative real axis")]
    BranchCut(Complex64),

    #[error("pole collision: z = {z} is within tolerance of pole {pole}")]
    PoleCollision { z: Complex64, pole: Complex64 },

    #[error("quadrature did not converge within {evaluations} evaluations (partial estimate {estimate}, error {error:e})")]
    QuadratureNonConvergence {
        estimate: Complex64,
        error: f64,
        evaluations: usize,
    },

    #[error("degenerate edge at vertex {0}")]
    DegenerateEdge(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rank-deficient fit matrix: increase sampling or reduce N2")]
    RankDeficient,

    #[error("outside envelope validity: {0}")]
    OutsideEnvelope(String),

    #[error("insufficient span: {0} usable records, need at least 4")]
    InsufficientSpan(usize),

    #[error("unsupported angle at corner {corner}: beta = {beta}")]
    UnsupportedAngle { corner: usize, beta: f64 },

    #[error("too close to slit: z = {0}")]
    TooCloseToSlit(Complex64),

    #[error("ill-conditioned collocation system (achieved residual {0:e})")]
    IllConditioned(f64),

    #[error("{skipped} of {total} grid points hit a pole")]
    TooManySkipped { skipped: usize, total: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
