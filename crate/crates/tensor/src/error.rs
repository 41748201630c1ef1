use thiserror::Error;

/// Errors raised by labeled-operator construction and manipulation.
#[derive(Debug, Clone, Error)]
pub enum TensorError {
    /// System-name bookkeeping errors: duplicate names, unknown names,
    /// invalid permutations, mismatched dimensions on shared names.
    #[error("labeling error: {0}")]
    Labeling(String),

    /// A numerical precondition was violated (non-Hermitian input to a
    /// Hermitian-only kernel, eigensolver failure, ...).
    #[error("numeric contract violated: {0}")]
    NumericContract(String),

    /// Malformed serialized data.
    #[error("parse error: {0}")]
    Parse(String),
}
