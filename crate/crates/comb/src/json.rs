//! StrategyChoi JSON interchange:
//! `{"rounds": {"n": int, "inputs": [sys...], "outputs": [sys...]}, "op": operator-JSON}`.

use serde_json::Value;

use qstrat_tensor::{LabeledOperator, SystemLabel};

use crate::{CombError, RoundStructure, StrategyChoi};

impl StrategyChoi {
    pub fn to_json(&self) -> String {
        let sys_json = |labels: &[SystemLabel]| -> String {
            let parts: Vec<String> = labels
                .iter()
                .map(|s| {
                    format!(
                        "{{\"name\":{},\"dim\":{}}}",
                        serde_json::to_string(&s.name).expect("string encodes"),
                        s.dim
                    )
                })
                .collect();
            format!("[{}]", parts.join(","))
        };
        format!(
            "{{\"rounds\":{{\"n\":{},\"inputs\":{},\"outputs\":{}}},\"op\":{}}}",
            self.n(),
            sys_json(self.rounds().inputs()),
            sys_json(self.rounds().outputs()),
            self.op().to_json()
        )
    }

    pub fn from_json(text: &str) -> Result<Self, CombError> {
        let v: Value = serde_json::from_str(text).map_err(|e| CombError::Parse(e.to_string()))?;
        let rounds_v = v
            .get("rounds")
            .ok_or_else(|| CombError::Parse("missing 'rounds'".into()))?;
        let grab_systems = |key: &str| -> Result<Vec<SystemLabel>, CombError> {
            rounds_v
                .get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| CombError::Parse(format!("missing 'rounds.{key}'")))?
                .iter()
                .map(|s| {
                    let name = s
                        .get("name")
                        .and_then(Value::as_str)
                        .ok_or_else(|| CombError::Parse("system missing 'name'".into()))?;
                    let dim = s
                        .get("dim")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| CombError::Parse("system missing 'dim'".into()))?;
                    SystemLabel::new(name, dim as usize).map_err(CombError::from)
                })
                .collect()
        };
        let inputs = grab_systems("inputs")?;
        let outputs = grab_systems("outputs")?;
        let declared_n = rounds_v.get("n").and_then(Value::as_u64);
        if let Some(n) = declared_n {
            if n as usize != inputs.len() {
                return Err(CombError::Parse(format!(
                    "declared n = {n} but {} inputs listed",
                    inputs.len()
                )));
            }
        }
        let rounds = RoundStructure::new(inputs, outputs)?;
        let op_v = v
            .get("op")
            .ok_or_else(|| CombError::Parse("missing 'op'".into()))?;
        let op = LabeledOperator::from_json_value(op_v).map_err(CombError::from)?;
        StrategyChoi::from_parts(rounds, op)
    }
}
