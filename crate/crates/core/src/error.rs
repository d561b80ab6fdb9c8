use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Rejections raised while validating a [`crate::CrystalConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ConfigError {
    #[error("ion count must be odd, got {0}")]
    EvenIonCount(usize),
    #[error("ion count must be at least 3, got {0}")]
    TooFewIons(usize),
    #[error("ion count {0} exceeds the supported maximum of {max}", max = crate::types::MAX_IONS)]
    TooManyIons(usize),
    #[error("mass ratio must be positive and finite, got {0}")]
    NonPositiveMassRatio(f64),
    #[error("mass ratio {0} outside supported range [1e-3, 1e3]")]
    MassRatioOutOfRange(f64),
    #[error("trap anisotropy must be positive and finite, got {0}")]
    NonPositiveAnisotropy(f64),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("matrix is not symmetric: max |M - Mᵀ| = {0:e}")]
    NotSymmetric(f64),

    #[error("{what} did not converge after {iterations} iterations (last residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("no sign change found in [{lo}, {hi}]")]
    NotBracketed { lo: f64, hi: f64 },

    #[error("ions {0} and {1} coincide")]
    CoincidentIons(usize, usize),

    #[error("mode {0} is unstable (negative squared frequency)")]
    UnstableMode(usize),

    #[error("spectrum has no stable cold mode")]
    NoColdMode,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::NotSymmetric(_)
                | Error::CoincidentIons(..)
                | Error::UnstableMode(_)
                | Error::NoColdMode
                | Error::Invalid(_)
        )
    }
}
