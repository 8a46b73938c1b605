use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A spectrum value `C_l <= 0` (or otherwise unusable).
    #[error("nonpositive spectrum: C_{l} = {value}")]
    NonpositiveSpectrum { l: u32, value: f64 },

    /// A coefficient row whose `m >= 1` entries are all zero; the spacings
    /// transform is undefined there.
    #[error("degenerate row: all m >= 1 entries of row l = {l} are zero")]
    DegenerateRow { l: u32 },

    /// Argument outside the documented domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Analysis grid too coarse for the requested band limit.
    #[error(
        "under-resolved quadrature: L = {lmax} needs ntheta >= {min_theta} and \
         nphi >= {min_phi}, grid is {ntheta} x {nphi}"
    )]
    UnderResolvedQuadrature {
        lmax: u32,
        ntheta: usize,
        nphi: usize,
        min_theta: usize,
        min_phi: usize,
    },

    /// Cholesky factorization failed even at the jitter cap; the grid
    /// covariance code is suspect.
    #[error("covariance not PSD on grid (factorization failed up to jitter {cap:e})")]
    CovarianceNotPsd { cap: f64 },

    /// Data degree does not match the calibration degree.
    #[error("lmax mismatch: data has L = {data}, calibration was built at L = {calibration}")]
    LmaxMismatch { data: u32, calibration: u32 },

    /// Malformed input file or configuration value.
    #[error("invalid {what}: {detail}")]
    InvalidInput { what: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvalidInput {
            what: what.into(),
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
