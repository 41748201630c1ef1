//! High-level evaluation of the three distinguishability quantities.

use qstrat_comb::{RoundStructure, StrategyChoi};
use qstrat_solver::{solve, SolveReport, SolveStatus, SolverOptions};
use qstrat_tensor::{fmt_f64_17, LabeledOperator, SystemLabel};

use crate::build::{
    build_distance_dual, build_distance_primal, build_dmax_dual, build_dmax_primal,
    build_dmin_dual, build_dmin_primal,
};
use crate::lower::lower_to_standard;
use crate::ProgramError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Distance,
    Dmin,
    Dmax,
}

impl Quantity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Distance => "distance",
            Quantity::Dmin => "dmin",
            Quantity::Dmax => "dmax",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ProgramError> {
        match s {
            "distance" => Ok(Quantity::Distance),
            "dmin" => Ok(Quantity::Dmin),
            "dmax" => Ok(Quantity::Dmax),
            other => Err(ProgramError::Domain(format!("unknown quantity '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Adaptive,
    Parallel,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Adaptive => "adaptive",
            Mode::Parallel => "parallel",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ProgramError> {
        match s {
            "adaptive" => Ok(Mode::Adaptive),
            "parallel" => Ok(Mode::Parallel),
            other => Err(ProgramError::Domain(format!("unknown mode '{other}'"))),
        }
    }
}

/// Whether evaluate() solves the dual program as an independent cross-check
/// of the primal program's value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossCheck {
    /// Cross-check when the full operator side is at most 16 (everything up
    /// to two-qubit-round pairs); larger instances rely on the solver's own
    /// primal-dual certificate.
    Auto,
    Always,
    Never,
}

#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub solver: SolverOptions,
    pub cross_check: CrossCheck,
    /// Certified-gap requirement on the reported primal/dual pair.
    pub gap_tolerance: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            solver: SolverOptions::default(),
            cross_check: CrossCheck::Auto,
            gap_tolerance: 1e-6,
        }
    }
}

/// Threshold treated as an underflow to zero for the dmin optimum.
const DMIN_UNDERFLOW: f64 = 1e-12;
/// Lambda beyond this reports the infinite-cost sentinel.
const DMAX_DIVERGED: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct QuantityResult {
    /// Final-scale value: linear for distance, bits (log2) for dmin/dmax;
    /// +infinity is the documented sentinel.
    pub value: f64,
    /// Certified optimum of the primal-form program (linear scale).
    pub primal_value: f64,
    /// Certified optimum of the dual-form program, or the solver's own dual
    /// certificate when the cross-solve is skipped (linear scale).
    pub dual_value: f64,
    pub gap: f64,
    pub solver: SolveReport,
    pub mode: Mode,
    pub quantity: Quantity,
    pub epsilon: f64,
}

impl QuantityResult {
    pub fn to_json(&self) -> String {
        let num = |v: f64| {
            if v.is_finite() {
                fmt_f64_17(v)
            } else {
                "\"inf\"".to_string()
            }
        };
        format!(
            "{{\"value\":{},\"primal_value\":{},\"dual_value\":{},\"gap\":{},\"solver\":{},\"mode\":\"{}\",\"quantity\":\"{}\",\"epsilon\":{}}}",
            num(self.value),
            num(self.primal_value),
            num(self.dual_value),
            num(self.gap),
            self.solver.to_json(),
            self.mode.as_str(),
            self.quantity.as_str(),
            num(self.epsilon)
        )
    }
}

/// Reinterprets an n-fold product comb as a single-turn strategy from A^n to
/// B^n (the parallel scenario). Requires the comb to factor into per-round
/// channel Choi operators.
pub fn as_parallel_one_turn(s: &StrategyChoi) -> Result<StrategyChoi, ProgramError> {
    let n = s.n();
    if n == 1 {
        return Ok(s.clone());
    }
    let r = s.rounds();
    let scale = 1.0 + s.op().max_abs();
    // Extract per-round marginals and check the product structure.
    let mut product: Option<LabeledOperator> = None;
    for i in 1..=n {
        let keep_in = &r.input(i).name;
        let keep_out = &r.output(i).name;
        let traced: Vec<&str> = s
            .op()
            .systems()
            .iter()
            .map(|sys| sys.name.as_str())
            .filter(|name| name != keep_in && name != keep_out)
            .collect();
        let div: f64 = (1..=n)
            .filter(|&j| j != i)
            .map(|j| r.input(j).dim as f64)
            .product();
        let marginal = s.op().partial_trace(&traced)?.scale(1.0 / div);
        let tp = marginal.partial_trace(&[keep_out.as_str()])?;
        let eye = LabeledOperator::identity(vec![r.input(i).clone()])?;
        if tp.sub(&eye)?.max_abs() > 1e-8 * scale {
            return Err(ProgramError::Domain(format!(
                "parallel mode needs a product of channels; round {i} marginal is not trace-preserving"
            )));
        }
        product = Some(match product {
            None => marginal,
            Some(acc) => acc.kron(&marginal)?,
        });
    }
    let product = product.expect("n >= 1");
    let reordered: Vec<&str> = s
        .op()
        .systems()
        .iter()
        .map(|sys| sys.name.as_str())
        .collect();
    let product = product.permute_to_names(&reordered)?;
    if product.sub(s.op())?.max_abs() > 1e-8 * scale {
        return Err(ProgramError::Domain(
            "parallel mode needs a product-of-channels comb".into(),
        ));
    }
    // Regroup the exact original operator (not the reconstruction).
    let names: Vec<String> = (1..=n)
        .map(|i| r.input(i).name.clone())
        .chain((1..=n).map(|i| r.output(i).name.clone()))
        .collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let grouped = s.op().permute_to_names(&refs)?;
    let d_in: usize = (1..=n).map(|i| r.input(i).dim).product();
    let d_out: usize = (1..=n).map(|i| r.output(i).dim).product();
    let merged = grouped.regroup(vec![
        SystemLabel::new("A1", d_in)?,
        SystemLabel::new("B1", d_out)?,
    ])?;
    let rounds = RoundStructure::new(
        vec![SystemLabel::new("A1", d_in)?],
        vec![SystemLabel::new("B1", d_out)?],
    )?;
    Ok(StrategyChoi::from_parts(rounds, merged)?)
}

struct ProgramValue {
    /// Problem-scale certified primal and dual values of one lowered solve.
    primal: f64,
    dual: f64,
    report: SolveReport,
    diverged: bool,
}

fn solve_program(
    p: &crate::ir::SdpProblem,
    opts: &SolverOptions,
    accept_tol: f64,
) -> Result<ProgramValue, ProgramError> {
    let lowered = lower_to_standard(p)?;
    let report = solve(&lowered.sdp, opts).map_err(ProgramError::from)?;
    // Degenerate optima can stop the solver just short of its own strict
    // tolerances; the returned certificate still stands on its recomputed
    // residuals, so accept it whenever it meets the evaluation tolerance.
    let certified = report.status == SolveStatus::Optimal
        || (report.gap <= accept_tol * (1.0 + report.primal_value.abs())
            && report.primal_residual <= accept_tol
            && report.dual_residual <= accept_tol);
    match report.status {
        _ if certified => Ok(ProgramValue {
            primal: lowered.sign * report.primal_value,
            dual: lowered.sign * report.dual_value,
            report,
            diverged: false,
        }),
        SolveStatus::InfeasibleCertificate => Ok(ProgramValue {
            primal: f64::INFINITY,
            dual: f64::INFINITY,
            report,
            diverged: true,
        }),
        _ => Err(ProgramError::Solver {
            message: format!("solver stopped with status {}", report.status.as_str()),
            report: Box::new(report),
        }),
    }
}

/// Evaluates one distinguishability quantity for a strategy pair.
///
/// Solves the primal-form program; when cross-checking is in effect the
/// dual-form program is solved as well and must agree within the configured
/// gap tolerance. Values for dmin/dmax are reported in bits.
pub fn evaluate(
    quantity: Quantity,
    n: &StrategyChoi,
    m: &StrategyChoi,
    epsilon: f64,
    mode: Mode,
    options: &EvalOptions,
) -> Result<QuantityResult, ProgramError> {
    let (n_eff, m_eff) = match mode {
        Mode::Adaptive => (n.clone(), m.clone()),
        Mode::Parallel => (as_parallel_one_turn(n)?, as_parallel_one_turn(m)?),
    };

    let primal_prog = match quantity {
        Quantity::Distance => build_distance_primal(&n_eff, &m_eff)?,
        Quantity::Dmin => build_dmin_primal(&n_eff, &m_eff, epsilon)?,
        Quantity::Dmax => build_dmax_primal(&n_eff, &m_eff, epsilon)?,
    };
    let primal = solve_program(&primal_prog, &options.solver, options.gap_tolerance)?;

    let full_side = n_eff.op().side();
    let do_cross = match options.cross_check {
        CrossCheck::Always => true,
        CrossCheck::Never => false,
        CrossCheck::Auto => full_side <= 16,
    } && !primal.diverged;

    let (primal_value, dual_value, report) = if do_cross {
        let dual_prog = match quantity {
            Quantity::Distance => build_distance_dual(&n_eff, &m_eff)?,
            Quantity::Dmin => build_dmin_dual(&n_eff, &m_eff, epsilon)?,
            Quantity::Dmax => build_dmax_dual(&n_eff, &m_eff, epsilon)?,
        };
        let dual = solve_program(&dual_prog, &options.solver, options.gap_tolerance)?;
        if dual.diverged {
            // Unbounded dual certifies the infinite-cost sentinel.
            (f64::INFINITY, f64::INFINITY, primal.report)
        } else {
            (primal.primal, dual.primal, primal.report)
        }
    } else {
        (primal.primal, primal.dual, primal.report)
    };

    let sentinel = !primal_value.is_finite()
        || !dual_value.is_finite()
        || (quantity == Quantity::Dmax && primal_value >= DMAX_DIVERGED);
    if sentinel && quantity != Quantity::Dmax {
        return Err(ProgramError::Solver {
            message: "non-dmax program diverged".into(),
            report: Box::new(report),
        });
    }
    let gap = if sentinel {
        0.0
    } else {
        (primal_value - dual_value).abs()
    };
    if !sentinel && gap > options.gap_tolerance * (1.0 + primal_value.abs()) {
        return Err(ProgramError::Solver {
            message: format!(
                "certified gap {gap:.3e} exceeds tolerance at value {primal_value:.6e}"
            ),
            report: Box::new(report),
        });
    }

    let value = if sentinel {
        f64::INFINITY
    } else {
        let mid = 0.5 * (primal_value + dual_value);
        match quantity {
            Quantity::Distance => mid,
            Quantity::Dmin => {
                if mid < DMIN_UNDERFLOW {
                    f64::INFINITY
                } else {
                    -mid.log2()
                }
            }
            Quantity::Dmax => {
                if mid >= DMAX_DIVERGED {
                    f64::INFINITY
                } else {
                    mid.log2()
                }
            }
        }
    };
    let (primal_value, dual_value) = if sentinel {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (primal_value, dual_value)
    };

    Ok(QuantityResult {
        value,
        primal_value,
        dual_value,
        gap,
        solver: report,
        mode,
        quantity,
        epsilon,
    })
}
