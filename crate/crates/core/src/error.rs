use thiserror::Error;

/// Error type shared by the analytic and quadrature layers.
///
/// The split matters to callers: configuration/input problems (`Config`,
/// `InvalidProfile`, `InvalidExponents`, `Unsupported`) are caught before any
/// computation runs, while the remaining variants report genuine mathematical
/// or numerical failure modes (divergent integrals, radicands going negative,
/// empty admissible intervals, loss of precision).
#[derive(Debug, Error)]
pub enum NbError {
    #[error("config error: {0}")]
    Config(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("point outside domain: {0}")]
    OutsideDomain(String),

    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// The graded quadrature ran out of refinement levels before the tail
    /// stabilized. Carries the last two estimates so the caller can judge
    /// how far apart they are.
    #[error("quadrature precision not reached: {message} (estimates {prev} and {last})")]
    Precision { prev: f64, last: f64, message: String },

    /// The requested distortion-constant variant is undefined here (its
    /// radicand is negative); the value is reported as invalid, never as NaN.
    #[error("invalid variant: {0}")]
    InvalidVariant(String),

    /// Every candidate in a bound search had an empty admissible interval.
    /// Distinct from a bound of zero.
    #[error("no bound available: {0}")]
    NoBoundAvailable(String),

    /// A requested quantity is infinite/unbounded for these parameters
    /// (e.g. the Poincaré constant at delta >= 1/n, or an infinite
    /// distortion supremum).
    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl NbError {
    /// True for errors that indicate bad input rather than a failure that
    /// occurred while computing. The CLI maps these to exit code 2 and the
    /// rest to exit code 3.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            NbError::Config(_)
                | NbError::InvalidProfile(_)
                | NbError::InvalidExponents(_)
                | NbError::Unsupported(_)
        )
    }
}
