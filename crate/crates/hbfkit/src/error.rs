//! Crate-wide error type.
//!
//! Every fallible operation in the crate returns [`Result`]. Numerical
//! preconditions (Hermitian symmetry, positive definiteness, finiteness)
//! are checked at module boundaries and reported with the offending
//! quantity so a failed run can be diagnosed from the message alone.

/// Errors produced by channel synthesis, beamformer design, evaluation,
/// and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matrix entry was NaN or infinite.
    #[error("non-finite matrix entry at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    /// A matrix required to be Hermitian was not, beyond tolerance.
    #[error(
        "matrix is not Hermitian: max |A - A^H| entry is {max_asymmetry:.3e} \
         (tolerance {tolerance:.1e})"
    )]
    NotHermitian { max_asymmetry: f64, tolerance: f64 },

    /// A matrix required to be positive definite had a non-positive eigenvalue.
    #[error("matrix is not positive definite: smallest eigenvalue is {min_eigenvalue:.6e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scalar or structural argument is out of range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Water-filling was asked to allocate power over all-zero gains.
    #[error("water-filling requires at least one positive gain")]
    AllZeroGains,

    /// The regularized combiner system was numerically singular.
    #[error("combiner system is singular at subcarrier index {subcarrier}")]
    SingularSystem { subcarrier: usize },

    /// A per-subcarrier rate came out NaN or infinite.
    #[error("non-finite spectral efficiency at subcarrier index {subcarrier}")]
    NonFiniteRate { subcarrier: usize },

    /// A decomposition failed to converge or was otherwise unusable.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A Monte-Carlo realization failed; identifies the seed so the exact
    /// channel draw can be reproduced in isolation.
    #[error("realization {realization} under master seed {master_seed} failed: {source}")]
    Realization {
        master_seed: u64,
        realization: usize,
        #[source]
        source: Box<Error>,
    },

    /// A config file could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// An output or dump file could not be read or written.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
