//! Dense linear algebra and integration primitives.

mod dense;
mod lstsq;
mod lyapunov;
mod mat;
mod ode;
mod quadrature;
mod svec;

pub use dense::solve_linear;
pub use lstsq::{solve_least_squares, LeastSquares, RANK_TOLERANCE};
pub use lyapunov::{is_hurwitz, lyapunov_residual, solve_lyapunov};
pub use mat::Mat;
pub use ode::rk4_step;
pub use quadrature::{window_integrals, WindowMoments};
pub use svec::{quad_moment_matrix, smat, svec, svec_dim, svec_len, svec_quad, SYMMETRY_TOLERANCE};
pub(crate) use svec::svec_unchecked;
