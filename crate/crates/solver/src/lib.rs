//! Primal-dual interior-point solver for standard-form conic programs
//!
//! ```text
//!   minimize    <C, X>
//!   subject to  A(X) = b
//!               X in (product of real symmetric PSD blocks)
//!                    x (nonnegative orthant) x (free scalars)
//! ```
//!
//! Search directions use Nesterov-Todd scaling with a Mehrotra
//! predictor-corrector; the Schur complement is formed and factored densely.
//! Solves are single-threaded and bit-for-bit deterministic.

// Index arithmetic is the clearest form for the kernels here.
#![allow(clippy::needless_range_loop)]

mod ipm;
mod kern;
mod kkt;
mod presolve;
mod types;

pub use ipm::solve;
pub use kkt::{check_kkt, KktReport};
pub use types::{
    Point, Row, SolveReport, SolverError, SolverOptions, SolveStatus, SparseSym, StandardSdp,
};
