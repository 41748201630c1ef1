use qstrat_tensor::{LabeledOperator, SystemLabel};

use crate::CombError;

/// Input/output structure of an n-turn strategy. Round i reads input A_i and
/// emits output B_i; either may be trivial (dimension 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundStructure {
    inputs: Vec<SystemLabel>,
    outputs: Vec<SystemLabel>,
}

impl RoundStructure {
    pub fn new(inputs: Vec<SystemLabel>, outputs: Vec<SystemLabel>) -> Result<Self, CombError> {
        if inputs.is_empty() || inputs.len() != outputs.len() {
            return Err(CombError::Domain(format!(
                "round structure needs n >= 1 with matching inputs/outputs, got {}/{}",
                inputs.len(),
                outputs.len()
            )));
        }
        Ok(RoundStructure { inputs, outputs })
    }

    /// Rounds named A1..An / B1..Bn with uniform dimensions.
    pub fn uniform(n: usize, dim_in: usize, dim_out: usize) -> Result<Self, CombError> {
        if n < 1 {
            return Err(CombError::Domain("need n >= 1 rounds".into()));
        }
        let mk = |prefix: &str, dim: usize| -> Result<Vec<SystemLabel>, CombError> {
            (1..=n)
                .map(|i| SystemLabel::new(format!("{prefix}{i}"), dim).map_err(CombError::from))
                .collect()
        };
        RoundStructure::new(mk("A", dim_in)?, mk("B", dim_out)?)
    }

    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[SystemLabel] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[SystemLabel] {
        &self.outputs
    }

    /// Input label of round i (1-indexed).
    pub fn input(&self, i: usize) -> &SystemLabel {
        &self.inputs[i - 1]
    }

    /// Output label of round i (1-indexed).
    pub fn output(&self, i: usize) -> &SystemLabel {
        &self.outputs[i - 1]
    }

    /// Interleaved canonical system order A1 B1 A2 B2 ...
    pub fn interleaved(&self) -> Vec<SystemLabel> {
        let mut out = Vec::with_capacity(2 * self.n());
        for i in 0..self.n() {
            out.push(self.inputs[i].clone());
            out.push(self.outputs[i].clone());
        }
        out
    }

    /// Product of input dimensions.
    pub fn dim_in_total(&self) -> usize {
        self.inputs.iter().map(|s| s.dim).product()
    }
}

/// Choi operator of an n-turn strategy, stored over the interleaved canonical
/// order A1 B1 ... An Bn.
///
/// By convention the operator is PSD (min eigenvalue >= -1e-9) and satisfies
/// the causality chain within 1e-9; [`crate::verify_comb`] checks both.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyChoi {
    rounds: RoundStructure,
    op: LabeledOperator,
}

impl StrategyChoi {
    /// Wraps an operator whose systems match the interleaved round order.
    /// Only the labeling is validated here; run [`crate::verify_comb`] for
    /// the numerical comb conditions.
    pub fn from_parts(rounds: RoundStructure, op: LabeledOperator) -> Result<Self, CombError> {
        let want = rounds.interleaved();
        if op.systems() != want.as_slice() {
            return Err(CombError::Domain(format!(
                "operator systems {:?} do not match round order {:?}",
                op.systems()
                    .iter()
                    .map(|s| s.name.as_str())
                    .collect::<Vec<_>>(),
                want.iter().map(|s| s.name.as_str()).collect::<Vec<_>>()
            )));
        }
        Ok(StrategyChoi { rounds, op })
    }

    pub fn rounds(&self) -> &RoundStructure {
        &self.rounds
    }

    pub fn op(&self) -> &LabeledOperator {
        &self.op
    }

    pub fn n(&self) -> usize {
        self.rounds.n()
    }

    pub fn is_one_turn(&self) -> bool {
        self.n() == 1
    }
}
