use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {path}: {message}")]
    Config { path: String, message: String },

    #[error("config: no nonlinear segment")]
    NoNonlinearSegment,

    #[error("config parse error: {0}")]
    Parse(String),

    #[error("multi-segment setup passed to the single-crystal amplitude; use tpa_multi_segment")]
    NotSingleCrystal,

    #[error("harmonic truncation loss {loss:.3e} exceeds tolerance {tolerance:.3e}; increase n_max")]
    HarmonicTruncation { loss: f64, tolerance: f64 },

    #[error("harmonic {n} matrix is not symmetric (relative asymmetry {asymmetry:.3e})")]
    Asymmetric { n: i32, asymmetry: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("no mode with m={m}, n={n}")]
    UnknownMode { m: usize, n: i32 },

    #[error("pixel at q={q:.4} rad/um lies outside the grid support (q_max={q_max:.4})")]
    PixelOutsideGrid { q: f64, q_max: f64 },

    #[error("theta0={theta0_mrad} mrad is not on the pixel grid")]
    OffGrid { theta0_mrad: f64 },

    #[error("zero mean photon number at pixel {pixel}")]
    ZeroPhotonNumber { pixel: usize },

    #[error("covariance peak narrower than 2 pixels (width {width_mrad:.4} mrad, pixel {pixel_mrad:.4} mrad)")]
    Resolution { width_mrad: f64, pixel_mrad: f64 },

    #[error("empty weight list")]
    EmptyWeights,

    #[error("Fock cutoff {cutoff} too small: norm deficit {deficit:.3e} exceeds {limit:.1e}")]
    CutoffTooSmall { cutoff: usize, deficit: f64, limit: f64 },

    #[error("moment '{name}' is truncation sensitive: relative shift {shift:.3e} when cutoff raised by 10")]
    TruncationSensitive { name: String, shift: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for failures of numerical tolerances, false for invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::HarmonicTruncation { .. }
                | Error::Asymmetric { .. }
                | Error::Factorization(_)
                | Error::ZeroPhotonNumber { .. }
                | Error::Resolution { .. }
                | Error::EmptyWeights
                | Error::CutoffTooSmall { .. }
                | Error::TruncationSensitive { .. }
        )
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
