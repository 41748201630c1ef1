//! Causality-chain verification for candidate strategy Choi operators.

use qstrat_tensor::eigh;

use crate::StrategyChoi;

/// Diagnostics for one level of the causality chain. Level i covers the
/// marginal N_[i] on A^i B^i.
#[derive(Debug, Clone)]
pub struct LevelReport {
    pub level: usize,
    /// Minimum eigenvalue of the candidate marginal N_[i].
    pub min_eigenvalue: f64,
    /// Max-abs residual of the chain identity at this level:
    /// Tr_{B_i}[N_[i]] = N_[i-1] ⊗ I_{A_i}, with N_[0] ⊗ I_{A_1} = I_{A_1}.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub pass: bool,
    pub tol: f64,
    pub levels: Vec<LevelReport>,
}

/// Checks the comb conditions on a candidate strategy Choi operator.
///
/// Candidate marginals are extracted by averaging, N_[i-1] :=
/// Tr_{A_i B_i}[N_[i]] / dim(A_i), which is exact for true combs; the
/// residual at each level then exposes any violation. Passing requires, at
/// every level, min eigenvalue >= -tol and chain residual <= tol.
pub fn verify_comb(s: &StrategyChoi, tol: f64) -> VerifyReport {
    let n = s.n();
    let mut levels = Vec::with_capacity(n);
    let mut current = s.op().clone(); // N_[i], starting at i = n
    let mut pass = true;

    for i in (1..=n).rev() {
        let min_eig = match eigh(&current) {
            Ok((w, _)) => w[0],
            Err(_) => {
                // Non-Hermitian candidate cannot be a comb.
                pass = false;
                f64::NEG_INFINITY
            }
        };
        let in_i = s.rounds().input(i);
        let out_i = s.rounds().output(i);
        let traced_b = current
            .partial_trace(&[out_i.name.as_str()])
            .expect("output system present");
        let residual = if i > 1 {
            let next = current
                .partial_trace(&[in_i.name.as_str(), out_i.name.as_str()])
                .expect("round systems present")
                .scale(1.0 / in_i.dim as f64);
            let lifted = next
                .kron(
                    &qstrat_tensor::LabeledOperator::identity(vec![in_i.clone()])
                        .expect("identity"),
                )
                .expect("disjoint names");
            let r = traced_b
                .sub(&lifted)
                .expect("same systems")
                .max_abs();
            current = next;
            r
        } else {
            let eye = qstrat_tensor::LabeledOperator::identity(vec![in_i.clone()])
                .expect("identity");
            traced_b.sub(&eye).expect("same systems").max_abs()
        };
        if min_eig < -tol || residual > tol {
            pass = false;
        }
        levels.push(LevelReport {
            level: i,
            min_eigenvalue: min_eig,
            residual,
        });
    }
    levels.reverse();
    VerifyReport { pass, tol, levels }
}
