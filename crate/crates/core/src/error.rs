use thiserror::Error;

/// Errors produced by the numerical kernels and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Two sampled functions that must share a lattice do not.
    #[error("grid mismatch: expected {expected:?}, got {got:?}")]
    GridMismatch {
        expected: (f64, usize),
        got: (f64, usize),
    },

    /// A sample or an intermediate quantity is NaN/Inf.
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Krylov solve (and the dense fallback, when allowed) did not reach
    /// the requested residual. Signals under-resolution or violated
    /// preconditions rather than a bug in the caller.
    #[error("linear solve stalled: relative residual {residual:.3e} after {iterations} iterations")]
    SolverStalled { residual: f64, iterations: usize },

    /// Step-size control drove dt below the configured minimum; the solution
    /// has numerically reached its maximal time.
    #[error("time step underflow at t = {time:.6e}: dt = {dt:.3e} below minimum, error estimate {error_estimate:.3e}")]
    DtUnderflow {
        time: f64,
        dt: f64,
        error_estimate: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
