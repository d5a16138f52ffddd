use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Domain errors are problems with the inputs (bad grids, unphysical
/// parameters); numerical errors are guards that tripped while computing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("state norm on grid is {norm:.3e}, deviates from 1 by more than {tolerance:.1e}")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("grid resolution: column eta = {eta} integrates to {integral:.9} (tolerance {tolerance:.1e})")]
    GridResolution { eta: f64, integral: f64, tolerance: f64 },

    #[error("left boundary does not decay: |f(x_min)| = {magnitude:.3e}")]
    BoundaryDecay { magnitude: f64 },

    #[error("reconstruction quality: {0}")]
    ReconstructionQuality(String),

    #[error("parameter distribution: {0}")]
    Distribution(String),

    #[error("no column at eta = {0} on the parameter grid")]
    MissingColumn(f64),

    #[error("size guard: {0}")]
    SizeGuard(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by a numerical guard rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotNormalized { .. }
                | Error::GridResolution { .. }
                | Error::BoundaryDecay { .. }
                | Error::ReconstructionQuality(_)
                | Error::Numerical(_)
                | Error::Distribution(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
