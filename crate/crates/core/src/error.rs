use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("branch point of the dispersion continuation at kappa = {re} + {im}i")]
    BranchPoint { re: f64, im: f64 },

    #[error("quadrature did not converge: estimated error {estimate:.3e} > target {target:.3e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        target: f64,
        intervals: usize,
    },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("wave classification inconsistent: {0}")]
    Classification(String),

    #[error("vector has no definite mirror parity (symmetric residual {symmetric:.3e}, antisymmetric residual {antisymmetric:.3e})")]
    Parity { symmetric: f64, antisymmetric: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("no candidate state found: {0}")]
    NotFound(String),

    #[error("problem too large: {0}")]
    Size(String),
}

impl Error {
    /// True for errors caused by invalid physical input rather than a
    /// numerical breakdown.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::BranchPoint { .. } | Error::Grid(_) | Error::Size(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
