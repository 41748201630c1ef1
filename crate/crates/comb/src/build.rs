//! Sequential and parallel composites of a one-turn channel.

use qstrat_tensor::SystemLabel;

use crate::{CombError, RoundStructure, StrategyChoi};

/// Choi operator of n sequential uses of a one-turn channel, as an n-turn
/// strategy. In the interleaved canonical order this is the plain n-fold
/// tensor product of the channel Choi operator.
pub fn n_fold_sequential_choi(channel: &StrategyChoi, n: usize) -> Result<StrategyChoi, CombError> {
    if n < 1 {
        return Err(CombError::Domain(format!("need n >= 1 uses, got {n}")));
    }
    if !channel.is_one_turn() {
        return Err(CombError::Domain(
            "sequential composite expects a one-turn channel".into(),
        ));
    }
    if n == 1 {
        return Ok(channel.clone());
    }
    let d_in = channel.rounds().input(1).dim;
    let d_out = channel.rounds().output(1).dim;
    let rounds = RoundStructure::new(
        (1..=n)
            .map(|i| SystemLabel::new(format!("A{i}"), d_in).map_err(CombError::from))
            .collect::<Result<_, _>>()?,
        (1..=n)
            .map(|i| SystemLabel::new(format!("B{i}"), d_out).map_err(CombError::from))
            .collect::<Result<_, _>>()?,
    )?;
    let mut op = channel
        .op()
        .relabel(&["A1", "B1"])
        .map_err(CombError::from)?;
    for i in 2..=n {
        let next = channel
            .op()
            .relabel(&[&format!("A{i}"), &format!("B{i}")])
            .map_err(CombError::from)?;
        op = op.kron(&next)?;
    }
    StrategyChoi::from_parts(rounds, op)
}

/// Choi operator of the n-fold tensor power of a one-turn channel, as a
/// single-turn strategy from A^n to B^n. Same tensor as the sequential
/// composite, regrouped into the A^n B^n order with merged systems.
pub fn tensor_power_choi(channel: &StrategyChoi, n: usize) -> Result<StrategyChoi, CombError> {
    if n < 1 {
        return Err(CombError::Domain(format!("need n >= 1 uses, got {n}")));
    }
    if !channel.is_one_turn() {
        return Err(CombError::Domain(
            "tensor power expects a one-turn channel".into(),
        ));
    }
    if n == 1 {
        return Ok(channel.clone());
    }
    let sequential = n_fold_sequential_choi(channel, n)?;
    // Reorder A1..An B1..Bn, then merge the A block and the B block.
    let names: Vec<String> = (1..=n)
        .map(|i| format!("A{i}"))
        .chain((1..=n).map(|i| format!("B{i}")))
        .collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let grouped = sequential.op().permute_to_names(&name_refs)?;
    let d_in = channel.rounds().input(1).dim;
    let d_out = channel.rounds().output(1).dim;
    let merged = grouped.regroup(vec![
        SystemLabel::new("A1", d_in.pow(n as u32))?,
        SystemLabel::new("B1", d_out.pow(n as u32))?,
    ])?;
    let rounds = RoundStructure::new(
        vec![SystemLabel::new("A1", d_in.pow(n as u32))?],
        vec![SystemLabel::new("B1", d_out.pow(n as u32))?],
    )?;
    StrategyChoi::from_parts(rounds, merged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{gadc_choi, verify_comb, GadcParams};

    #[test]
    fn n_one_is_unchanged() {
        let ch = gadc_choi(GadcParams { gamma: 0.2, noise: 0.4 }).unwrap();
        assert_eq!(n_fold_sequential_choi(&ch, 1).unwrap(), ch);
        assert_eq!(tensor_power_choi(&ch, 1).unwrap(), ch);
        assert!(n_fold_sequential_choi(&ch, 0).is_err());
    }

    #[test]
    fn sequential_comb_verifies() {
        let ch = gadc_choi(GadcParams { gamma: 0.2, noise: 0.2 }).unwrap();
        let comb = n_fold_sequential_choi(&ch, 2).unwrap();
        let report = verify_comb(&comb, 1e-9);
        assert!(report.pass, "residuals: {:?}", report.levels);
        for level in &report.levels {
            assert!(level.residual <= 1e-12);
        }
    }

    #[test]
    fn sequential_trace_is_din_pow_n() {
        let ch = gadc_choi(GadcParams { gamma: 0.3, noise: 0.6 }).unwrap();
        for n in 1..=3 {
            let comb = n_fold_sequential_choi(&ch, n).unwrap();
            assert!((comb.op().trace().re - 2f64.powi(n as i32)).abs() <= 1e-12);
        }
    }

    #[test]
    fn tensor_power_matches_sequential_after_permutation() {
        let ch = gadc_choi(GadcParams { gamma: 0.35, noise: 0.15 }).unwrap();
        let seq = n_fold_sequential_choi(&ch, 2).unwrap();
        let par = tensor_power_choi(&ch, 2).unwrap();
        // Regroup the parallel operator back into per-round systems and
        // interleave; must reproduce the sequential operator bit-exactly.
        let split = par
            .op()
            .regroup(vec![
                qstrat_tensor::SystemLabel::new("A1", 2).unwrap(),
                qstrat_tensor::SystemLabel::new("A2", 2).unwrap(),
                qstrat_tensor::SystemLabel::new("B1", 2).unwrap(),
                qstrat_tensor::SystemLabel::new("B2", 2).unwrap(),
            ])
            .unwrap();
        let interleaved = split.permute_to_names(&["A1", "B1", "A2", "B2"]).unwrap();
        assert_eq!(interleaved.entries(), seq.op().entries());
    }

    #[test]
    fn tensor_power_is_tp_as_one_turn() {
        let ch = gadc_choi(GadcParams { gamma: 0.5, noise: 0.25 }).unwrap();
        let par = tensor_power_choi(&ch, 2).unwrap();
        let marginal = par.op().partial_trace(&["B1"]).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((marginal.at(r, c).re - want).abs() <= 1e-12);
            }
        }
        let report = verify_comb(&par, 1e-9);
        assert!(report.pass);
    }
}
