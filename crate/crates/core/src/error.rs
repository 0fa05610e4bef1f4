use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension n = {n} is not supported; the profile integral diverges for n = 2 and n must be at least 3")]
    Dimension { n: usize },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("quadrature did not converge (estimate {estimate}, error bound {error:e})")]
    QuadratureNotConverged { estimate: f64, error: f64 },

    #[error("sigma_{n}: quadrature {quadrature} and closed form {closed_form} differ by more than 1e-10")]
    SigmaMismatch { n: usize, quadrature: f64, closed_form: f64 },

    #[error("radius {r} is not outside the catenoid neck lambda = {lambda}")]
    InsideNeck { r: f64, lambda: f64 },

    #[error("non-finite nodal value at node {node}")]
    NonFinite { node: usize },

    #[error("Newton iteration stopped after {iterations} iterations with residual {residual:e}")]
    NewtonNotConverged { iterations: usize, residual: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("field has no solution attached")]
    Unsolved,

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("boundary gradient is not monotone in the outer value between t = {t_lo} and t = {t_hi}")]
    NonMonotone { t_lo: f64, t_hi: f64 },

    #[error("no outer value in [0, {upper}] produces boundary slope {s}")]
    Bracket { s: f64, upper: f64 },

    #[error("limits are not strictly increasing: c({s_lo}) = {c_lo} but c({s_hi}) = {c_hi}")]
    FamilyNotIncreasing { s_lo: f64, s_hi: f64, c_lo: f64, c_hi: f64 },

    #[error("decay fit residual {residual:e} exceeds {threshold:e}")]
    FitResidual { residual: f64, threshold: f64 },

    #[error("barrier radius a = {a} is too small: need a ball containing the obstacle and sigma*a > c = {c}")]
    BarrierRadius { a: f64, c: f64 },

    #[error("height {c} is outside the admissible range [0, {upper})")]
    HeightOutOfRange { c: f64, upper: f64 },

    #[error("leaf s = {s}: {source}")]
    Leaf { s: f64, source: Box<Error> },

    #[error("configuration: {0}")]
    Config(String),
}
