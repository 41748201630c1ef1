//! One-turn channel and preparation library.

use num_complex::Complex64;
use qstrat_tensor::rng::SplitMix64;
use qstrat_tensor::{LabeledOperator, SystemLabel};

use crate::{CombError, RoundStructure, StrategyChoi};

/// Parameters of a generalized amplitude damping channel: damping gamma and
/// noise, both in the closed unit interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadcParams {
    pub gamma: f64,
    pub noise: f64,
}

impl GadcParams {
    pub fn new(gamma: f64, noise: f64) -> Result<Self, CombError> {
        for (name, v) in [("gamma", gamma), ("noise", noise)] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(CombError::Domain(format!(
                    "GADC {name} must lie in [0,1], got {v}"
                )));
            }
        }
        Ok(GadcParams { gamma, noise })
    }
}

/// Choi operator of the generalized amplitude damping channel, a one-turn
/// qubit-to-qubit strategy. In the A1 B1 product basis the matrix is
///
/// ```text
/// [ 1-gN   0       0      sqrt(1-g) ]
/// [ 0      gN      0      0         ]
/// [ 0      0       g(1-N) 0         ]
/// [ sqrt(1-g) 0    0      1-g(1-N)  ]
/// ```
pub fn gadc_choi(p: GadcParams) -> Result<StrategyChoi, CombError> {
    let p = GadcParams::new(p.gamma, p.noise)?;
    let (g, n) = (p.gamma, p.noise);
    let rounds = RoundStructure::uniform(1, 2, 2)?;
    let mut op = LabeledOperator::zero(rounds.interleaved())?;
    let s = (1.0 - g).sqrt();
    op.set(0, 0, Complex64::new(1.0 - g * n, 0.0));
    op.set(1, 1, Complex64::new(g * n, 0.0));
    op.set(2, 2, Complex64::new(g * (1.0 - n), 0.0));
    op.set(3, 3, Complex64::new(1.0 - g * (1.0 - n), 0.0));
    op.set(0, 3, Complex64::new(s, 0.0));
    op.set(3, 0, Complex64::new(s, 0.0));
    StrategyChoi::from_parts(rounds, op)
}

/// Choi operator of the d-dimensional identity channel: the unnormalized
/// maximally entangled operator on A1 B1, trace d.
pub fn identity_choi(d: usize) -> Result<StrategyChoi, CombError> {
    if d < 1 {
        return Err(CombError::Domain(format!("dimension must be >= 1, got {d}")));
    }
    let rounds = RoundStructure::uniform(1, d, d)?;
    let mut op = LabeledOperator::zero(rounds.interleaved())?;
    for i in 0..d {
        for j in 0..d {
            op.set(i * d + i, j * d + j, Complex64::new(1.0, 0.0));
        }
    }
    StrategyChoi::from_parts(rounds, op)
}

/// One-turn strategy with trivial input whose Choi operator is the given
/// state on B1.
pub fn preparation_choi(state: &LabeledOperator) -> Result<StrategyChoi, CombError> {
    if state.systems().len() != 1 {
        return Err(CombError::Domain(
            "preparation expects a single-system density operator".into(),
        ));
    }
    let tr = state.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(CombError::Domain(format!(
            "preparation state must have unit trace, got {tr}"
        )));
    }
    if !state.is_hermitian(1e-10) {
        return Err(CombError::Domain(
            "preparation state must be Hermitian".into(),
        ));
    }
    let (eigs, _) = qstrat_tensor::eigh(state)?;
    if eigs[0] < -1e-10 {
        return Err(CombError::Domain(format!(
            "preparation state must be PSD, min eigenvalue {:.3e}",
            eigs[0]
        )));
    }
    let d = state.side();
    let rounds = RoundStructure::new(
        vec![SystemLabel::new("A1", 1).map_err(CombError::from)?],
        vec![SystemLabel::new("B1", d).map_err(CombError::from)?],
    )?;
    let trivial = LabeledOperator::identity(vec![SystemLabel::new("A1", 1)?])?;
    let op = trivial.kron(&state.relabel(&["B1"])?)?;
    StrategyChoi::from_parts(rounds, op)
}

/// Basis-state preparation |idx><idx| on a d-dimensional output.
pub fn basis_preparation_choi(d: usize, idx: usize) -> Result<StrategyChoi, CombError> {
    if d < 1 || idx >= d {
        return Err(CombError::Domain(format!(
            "basis index {idx} out of range for dimension {d}"
        )));
    }
    let mut state = LabeledOperator::zero(vec![SystemLabel::new("B1", d).map_err(CombError::from)?])?;
    state.set(idx, idx, Complex64::new(1.0, 0.0));
    preparation_choi(&state)
}

/// Choi operator of a seeded pseudo-random channel from dA to dB.
///
/// A complex Gaussian matrix (splitmix64 + Box-Muller) with dA columns and
/// dB*dA*dB rows is orthonormalized into an isometry V : A -> B x E with
/// environment dimension dA*dB; the channel traces out E. Deterministic per
/// seed; trace-preserving by construction.
pub fn random_channel_choi(
    d_in: usize,
    d_out: usize,
    seed: u64,
) -> Result<StrategyChoi, CombError> {
    if d_in < 1 || d_out < 1 {
        return Err(CombError::Domain(format!(
            "channel dimensions must be >= 1, got {d_in} -> {d_out}"
        )));
    }
    let d_env = d_in * d_out;
    let rows = d_out * d_env;
    let mut rng = SplitMix64::new(seed);
    // Columns of the candidate isometry.
    let mut cols: Vec<Vec<Complex64>> = (0..d_in)
        .map(|_| {
            (0..rows)
                .map(|_| Complex64::new(rng.next_gaussian(), rng.next_gaussian()))
                .collect()
        })
        .collect();
    // Modified Gram-Schmidt, run twice for orthonormality near machine precision.
    for _pass in 0..2 {
        for j in 0..d_in {
            for k in 0..j {
                let ip: Complex64 = cols[k]
                    .iter()
                    .zip(cols[j].iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for r in 0..rows {
                    let prev = cols[k][r];
                    cols[j][r] -= ip * prev;
                }
            }
            let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(CombError::Domain(
                    "random isometry columns degenerate; try another seed".into(),
                ));
            }
            for z in &mut cols[j] {
                *z /= norm;
            }
        }
    }
    // Choi[(a,b),(a',b')] = sum_e V[(b,e),a] conj(V[(b',e),a']).
    let rounds = RoundStructure::uniform(1, d_in, d_out)?;
    let mut op = LabeledOperator::zero(rounds.interleaved())?;
    for a in 0..d_in {
        for b in 0..d_out {
            for a2 in 0..d_in {
                for b2 in 0..d_out {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for e in 0..d_env {
                        acc += cols[a][b * d_env + e] * cols[a2][b2 * d_env + e].conj();
                    }
                    op.set(a * d_out + b, a2 * d_out + b2, acc);
                }
            }
        }
    }
    StrategyChoi::from_parts(rounds, op)
}
