//! Choi operators of quantum strategies (combs) and co-strategies.
//!
//! An n-turn strategy with inputs A_1..A_n and outputs B_1..B_n is stored as
//! a labeled operator over the interleaved system order A_1 B_1 A_2 B_2 ...,
//! which makes an n-fold sequential channel comb a plain `kron` of per-round
//! Choi operators. Causality of a candidate comb is checked by
//! [`verify_comb`], which peels the constraint chain level by level.

#![allow(clippy::needless_range_loop)]

mod build;
mod channels;
mod json;
mod link;
mod rounds;
mod verify;

pub use build::{n_fold_sequential_choi, tensor_power_choi};
pub use channels::{
    basis_preparation_choi, gadc_choi, identity_choi, preparation_choi, random_channel_choi,
    GadcParams,
};
pub use link::link_product;
pub use rounds::{RoundStructure, StrategyChoi};
pub use verify::{verify_comb, LevelReport, VerifyReport};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CombError {
    /// Parameter or structural precondition violated.
    #[error("domain error: {0}")]
    Domain(String),

    #[error(transparent)]
    Tensor(#[from] qstrat_tensor::TensorError),

    #[error("parse error: {0}")]
    Parse(String),
}
