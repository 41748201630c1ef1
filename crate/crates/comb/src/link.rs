//! Link product of labeled Choi operators.

use qstrat_tensor::{LabeledOperator, TensorError};

use crate::CombError;

/// Contracts two Choi operators over their shared (by name) systems:
///
/// ```text
/// a * b = Tr_shared[ (I ⊗ b^{T_shared}) (a ⊗ I) ]
/// ```
///
/// The output carries a's unshared systems followed by b's unshared systems.
/// Shared names must agree in dimension.
pub fn link_product(
    a: &LabeledOperator,
    b: &LabeledOperator,
) -> Result<LabeledOperator, CombError> {
    let shared: Vec<String> = a
        .systems()
        .iter()
        .filter(|sa| b.systems().iter().any(|sb| sb.name == sa.name))
        .map(|s| s.name.clone())
        .collect();
    for name in &shared {
        let da = a.systems().iter().find(|s| &s.name == name).unwrap().dim;
        let db = b.systems().iter().find(|s| &s.name == name).unwrap().dim;
        if da != db {
            return Err(CombError::Tensor(TensorError::Labeling(format!(
                "shared system '{name}' has mismatched dimensions {da} vs {db}"
            ))));
        }
    }
    let shared_refs: Vec<&str> = shared.iter().map(String::as_str).collect();

    let b_only: Vec<_> = b
        .systems()
        .iter()
        .filter(|sb| !shared.contains(&sb.name))
        .cloned()
        .collect();
    let a_only: Vec<_> = a
        .systems()
        .iter()
        .filter(|sa| !shared.contains(&sa.name))
        .cloned()
        .collect();

    // Common order: a's systems followed by b's unshared systems.
    let big_a = if b_only.is_empty() {
        a.clone()
    } else {
        a.kron(&LabeledOperator::identity(b_only.clone())?)?
    };
    let bt = if shared.is_empty() {
        b.clone()
    } else {
        b.partial_transpose(&shared_refs)?
    };
    let big_b_unordered = if a_only.is_empty() {
        bt
    } else {
        LabeledOperator::identity(a_only.clone())?.kron(&bt)?
    };
    let order: Vec<&str> = big_a.systems().iter().map(|s| s.name.as_str()).collect();
    let big_b = big_b_unordered.permute_to_names(&order)?;

    let product = big_b.matmul(&big_a)?;
    if shared.is_empty() {
        Ok(product)
    } else {
        Ok(product.partial_trace(&shared_refs)?)
    }
}
