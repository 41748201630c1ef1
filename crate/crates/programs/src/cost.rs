//! Exact-cost strategy construction: the comb that witnesses the exact
//! distinguishability cost.

use qstrat_comb::StrategyChoi;

use crate::eval::{evaluate, EvalOptions, Mode, Quantity};
use crate::ProgramError;

/// Builds (2^l G_M - G_N) / (2^l - 1) for a given log-scale cost l, without
/// validating the outcome. At the optimal l this is a valid comb; slightly
/// below it the operator acquires a negative eigenvalue.
pub fn exact_cost_comb_at(
    n: &StrategyChoi,
    m: &StrategyChoi,
    lambda_log: f64,
) -> Result<StrategyChoi, ProgramError> {
    if n.rounds() != m.rounds() {
        return Err(ProgramError::Domain(
            "strategies must share a round structure".into(),
        ));
    }
    let two_l = 2f64.powf(lambda_log);
    if !(two_l.is_finite() && two_l > 1.0) {
        return Err(ProgramError::Domain(format!(
            "exact cost construction needs 2^lambda > 1, got lambda = {lambda_log}"
        )));
    }
    let op = m
        .op()
        .scale(two_l)
        .sub(n.op())?
        .scale(1.0 / (two_l - 1.0));
    Ok(StrategyChoi::from_parts(m.rounds().clone(), op)?)
}

/// Solves the exact (epsilon = 0) distinguishability cost and returns the
/// witness comb at the optimum.
pub fn exact_cost_comb(
    n: &StrategyChoi,
    m: &StrategyChoi,
    options: &EvalOptions,
) -> Result<(StrategyChoi, f64), ProgramError> {
    let result = evaluate(Quantity::Dmax, n, m, 0.0, Mode::Adaptive, options)?;
    let lambda_log = result.value;
    if !lambda_log.is_finite() {
        return Err(ProgramError::Domain(
            "exact cost is infinite (second strategy is rank deficient)".into(),
        ));
    }
    if lambda_log <= 1e-9 {
        return Err(ProgramError::Domain(
            "exact cost construction degenerates for identical strategies".into(),
        ));
    }
    Ok((exact_cost_comb_at(n, m, lambda_log)?, lambda_log))
}
