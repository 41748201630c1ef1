use serde::{Deserialize, Serialize};

use crate::TensorError;

/// A named subsystem with its Hilbert-space dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemLabel {
    pub name: String,
    pub dim: usize,
}

impl SystemLabel {
    pub fn new(name: impl Into<String>, dim: usize) -> Result<Self, TensorError> {
        if dim < 1 {
            return Err(TensorError::Labeling(format!(
                "system dimension must be >= 1, got {dim}"
            )));
        }
        Ok(SystemLabel {
            name: name.into(),
            dim,
        })
    }
}

/// Checks that all names in `systems` are distinct.
pub(crate) fn check_unique_names(systems: &[SystemLabel]) -> Result<(), TensorError> {
    for (i, a) in systems.iter().enumerate() {
        for b in &systems[i + 1..] {
            if a.name == b.name {
                return Err(TensorError::Labeling(format!(
                    "duplicate system name '{}'",
                    a.name
                )));
            }
        }
    }
    Ok(())
}
