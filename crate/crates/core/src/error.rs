use thiserror::Error;

/// Errors raised by the coverage library.
#[derive(Debug, Error)]
pub enum Error {
    /// Observation point coincides with a circle center, so the closest point is undefined.
    #[error("observation point coincides with the path center (distance {distance:e} m)")]
    DegeneratePoint { distance: f64 },

    #[error("shape matrix is not positive definite: s = {s:?}")]
    NonPdShape { s: [f64; 3] },

    /// A Schur-complement denominator of the shape constraints vanished.
    #[error("shape constraint denominator {denominator:e} is not strictly positive")]
    DegenerateShape { denominator: f64 },

    #[error("quadratic program is infeasible")]
    QpInfeasible,

    #[error("region {width} x {height} m is too small for stripe width {stripe_width} m")]
    RegionTooSmall {
        width: f64,
        height: f64,
        stripe_width: f64,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed log data: {0}")]
    MalformedLog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
