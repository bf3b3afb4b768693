use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    /// The regressor does not have full column rank; the excitation was
    /// not rich enough to identify every unknown.
    #[error("regressor is rank deficient: rank {rank} < {required} unknowns")]
    RankDeficient { rank: usize, required: usize },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("Lyapunov equation is singular: closed loop has eigenvalues summing to zero")]
    SingularLyapunov,

    #[error("closed-loop matrix is not Hurwitz")]
    NotHurwitz,

    #[error("matrix is singular")]
    Singular,

    #[error("window contains {0} samples, at least 2 are required")]
    EmptyWindow(usize),

    /// State or weights blew up; the closed loop or the learning rate is unstable.
    #[error("numerical blow-up: {0}")]
    NumericalBlowup(String),

    #[error("iteration did not converge within {iterations} iterations (last change {last_change:e})")]
    NotConverged { iterations: usize, last_change: f64 },

    #[error("{count} data windows collected, at least {required} are required")]
    InsufficientWindows { count: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
