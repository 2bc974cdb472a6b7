use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} must be even and at least 8")]
    BadGrid(usize),
    #[error("operands live on different grids ({0} vs {1} points)")]
    GridMismatch(usize, usize),
    #[error("non-finite value at frequency {0}")]
    NonFinite(i64),
    #[error("mean {0:e} exceeds the zero-mean tolerance")]
    NonZeroMean(f64),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("substep phase {0:.3} exceeds 0.5; increase n_substeps")]
    StepTooLarge(f64),
    #[error("lie tower depth {0} exceeds the cap of 6")]
    DepthExceeded(usize),
    #[error("cancellation relation violated: residual {residual:e} against scale {scale:e}")]
    CancellationViolated { residual: f64, scale: f64 },
    #[error("time step {dt:e} violates the CFL bound {bound:e} at t = {t}")]
    CflViolation { dt: f64, bound: f64, t: f64 },
    #[error("solution blew up (max |u| = {max_abs:e}) at t = {t}")]
    BlowupDetected { max_abs: f64, t: f64 },
    #[error("bump at lambda = {lambda} is not resolved on {n_points} points")]
    UnresolvedBump { lambda: f64, n_points: usize },
    #[error("map is not a diffeomorphism: min derivative {0:e}")]
    NotDiffeo(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
