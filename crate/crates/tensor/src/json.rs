//! Operator JSON interchange format.
//!
//! `{"systems": [{"name": str, "dim": int}], "re": [...], "im": [...]}` with
//! `re`/`im` row-major of length side². Numbers are written with 17
//! significant digits so emission is deterministic and round-trips exactly.

use num_complex::Complex64;
use serde_json::Value;

use crate::{fmt_f64_17, LabeledOperator, SystemLabel, TensorError};

impl LabeledOperator {
    pub fn to_json(&self) -> String {
        let mut out = String::with_capacity(64 + 48 * self.entries().len());
        out.push_str("{\"systems\":[");
        for (i, s) in self.systems().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"name\":{},\"dim\":{}}}",
                serde_json::to_string(&s.name).expect("string encodes"),
                s.dim
            ));
        }
        out.push_str("],\"re\":[");
        for (i, z) in self.entries().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64_17(z.re));
        }
        out.push_str("],\"im\":[");
        for (i, z) in self.entries().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64_17(z.im));
        }
        out.push_str("]}");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, TensorError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| TensorError::Parse(e.to_string()))?;
        Self::from_json_value(&v)
    }

    pub fn from_json_value(v: &Value) -> Result<Self, TensorError> {
        let systems_v = v
            .get("systems")
            .and_then(Value::as_array)
            .ok_or_else(|| TensorError::Parse("missing 'systems' array".into()))?;
        let mut systems = Vec::with_capacity(systems_v.len());
        for s in systems_v {
            let name = s
                .get("name")
                .and_then(Value::as_str)
                .ok_or_else(|| TensorError::Parse("system missing 'name'".into()))?;
            let dim = s
                .get("dim")
                .and_then(Value::as_u64)
                .ok_or_else(|| TensorError::Parse("system missing 'dim'".into()))?;
            systems.push(SystemLabel::new(name, dim as usize)?);
        }
        let grab = |key: &str| -> Result<Vec<f64>, TensorError> {
            v.get(key)
                .and_then(Value::as_array)
                .ok_or_else(|| TensorError::Parse(format!("missing '{key}' array")))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| TensorError::Parse(format!("non-numeric entry in '{key}'")))
                })
                .collect()
        };
        let re = grab("re")?;
        let im = grab("im")?;
        if re.len() != im.len() {
            return Err(TensorError::Parse(format!(
                "re length {} != im length {}",
                re.len(),
                im.len()
            )));
        }
        let entries: Vec<Complex64> = re
            .iter()
            .zip(&im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        LabeledOperator::new(systems, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_hermitian;

    #[test]
    fn roundtrip_exact() {
        let h = random_hermitian("sysA", 3, 404);
        let text = h.to_json();
        let back = LabeledOperator::from_json(&text).unwrap();
        assert_eq!(h, back);
        // Emission is deterministic.
        assert_eq!(text, back.to_json());
    }

    #[test]
    fn rejects_malformed() {
        assert!(LabeledOperator::from_json("{}").is_err());
        assert!(LabeledOperator::from_json("{\"systems\":[],\"re\":[1.0],\"im\":[]}").is_err());
    }

    #[test]
    fn field_names_exact() {
        let h = random_hermitian("a", 2, 1);
        let v: serde_json::Value = serde_json::from_str(&h.to_json()).unwrap();
        assert!(v.get("systems").is_some());
        assert!(v.get("re").is_some());
        assert!(v.get("im").is_some());
        assert_eq!(v["systems"][0]["name"], "a");
        assert_eq!(v["systems"][0]["dim"], 2);
    }
}
