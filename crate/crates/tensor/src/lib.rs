//! Dense complex Hermitian linear algebra over labeled tensor-product systems.
//!
//! Operators carry an ordered list of named subsystems; matrix indices are
//! mixed-radix over the subsystem dimensions in listed order (first system is
//! the most significant digit). All values are immutable after construction
//! and operations are pure functions, so everything here is safe to share
//! across threads.

// Index arithmetic is the clearest form for the kernels here.
#![allow(clippy::needless_range_loop)]

mod eig;
mod error;
mod json;
mod op;
mod real;
pub mod rng;
mod system;
pub mod testutil;

pub use eig::{eigh, eigh_real, trace_norm, SymEig};
pub use error::TensorError;
pub use op::LabeledOperator;
pub use real::{realify, RealMat};
pub use system::SystemLabel;

pub use num_complex::Complex64;

/// Formats a float with 17 significant digits, the fixed width used by every
/// JSON surface in this workspace.
pub fn fmt_f64_17(v: f64) -> String {
    format!("{:.16e}", v)
}
