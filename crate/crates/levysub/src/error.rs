use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter or argument violated its documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature could not meet the requested tolerance.
    #[error("quadrature failure: value={value:.6e}, error_estimate={error:.3e}, worst interval [{worst_lo:.6e}, {worst_hi:.6e}]")]
    Quadrature {
        value: f64,
        error: f64,
        worst_lo: f64,
        worst_hi: f64,
    },

    /// FFT density inversion produced a grid inconsistent with a probability
    /// density (bad span, grid size, or damping).
    #[error("fft inversion failure: {0}")]
    FftInversion(String),

    /// Too many observations fell outside the density grid.
    #[error("grid coverage error: {outside} of {total} points outside the density grid")]
    GridCoverage { outside: usize, total: usize },

    /// Numerical CDF inversion could not bracket the requested quantile.
    #[error("inversion failure: {0}")]
    Inversion(String),

    /// Moment query on a law whose moments do not exist.
    #[error("moments are undefined for this law")]
    MomentsUndefined,

    /// Estimation failure (all starts failed, degenerate data, ...).
    #[error("estimation failure: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
