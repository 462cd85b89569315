use nb_core::NbError;
use thiserror::Error;

/// Error type for the FEM validation layer.
///
/// Mirrors the split used by `nb-core`: mesh/condenser/configuration
/// problems are input errors the caller can fix, while solver failures
/// (non-converged eigeniteration, stalled line search, lost positive
/// definiteness) report a numerical breakdown with enough context to
/// diagnose it.
#[derive(Debug, Error)]
pub enum FemError {
    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("invalid condenser: {0}")]
    Condenser(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("linear solve failed: {0}")]
    Solve(String),

    #[error("eigensolver did not converge: relative residual {residual:.3e} after {iters} iterations")]
    EigNotConverged { residual: f64, iters: usize },

    #[error("line search stalled in every restart: {0}")]
    LineSearch(String),

    #[error("descent stopped above gradient tolerance: |g| = {grad_norm:.3e} after {iters} iterations")]
    DescentNotConverged { grad_norm: f64, iters: usize },

    /// The requested map parameter makes the distortion supremum infinite,
    /// so no transfer constant exists.
    #[error("unbounded distortion: {0}")]
    UnboundedDistortion(String),

    #[error(transparent)]
    Core(#[from] NbError),
}

impl FemError {
    /// True for errors that indicate bad input rather than a failure that
    /// occurred while computing; the CLI maps these to exit code 2.
    pub fn is_input_error(&self) -> bool {
        match self {
            FemError::Mesh(_) | FemError::Condenser(_) | FemError::Unsupported(_) => true,
            FemError::Core(e) => e.is_input_error(),
            _ => false,
        }
    }
}
