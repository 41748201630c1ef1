//! SDP formulations of one-shot distinguishability quantities for quantum
//! strategies: normalized strategy distance, smooth strategy min-relative
//! entropy (distillable distinguishability) and smooth strategy max-relative
//! entropy (distinguishability cost), for adaptive and parallel scenarios.

#![allow(clippy::needless_range_loop)]

mod build;
mod cost;
mod eval;
pub mod ir;
pub mod lower;

pub use build::{
    build_distance_dual, build_distance_gw, build_distance_primal, build_dmax_dual,
    build_dmax_primal, build_dmin_dual, build_dmin_primal, dmax_linear_scale,
};
pub use cost::{exact_cost_comb, exact_cost_comb_at};
pub use eval::{
    as_parallel_one_turn, evaluate, CrossCheck, EvalOptions, Mode, Quantity, QuantityResult,
};
pub use lower::{lower_to_standard, lower_with_style, Lowered, LoweringStyle, VarLoc};

use qstrat_solver::SolveReport;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProgramError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("program build error: {0}")]
    Build(String),

    #[error(transparent)]
    Comb(#[from] qstrat_comb::CombError),

    #[error(transparent)]
    Tensor(#[from] qstrat_tensor::TensorError),

    #[error(transparent)]
    SolverBuild(#[from] qstrat_solver::SolverError),

    /// Solver stopped without an optimality certificate; the partial report
    /// is attached.
    #[error("solver failure: {message}")]
    Solver {
        message: String,
        report: Box<SolveReport>,
    },
}
