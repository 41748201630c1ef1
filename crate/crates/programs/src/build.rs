//! Builders for the strategy-distance, distillable-distinguishability and
//! distinguishability-cost SDPs of an n-turn strategy pair.
//!
//! Variable spaces, in the interleaved canonical order:
//!   S, Ntil, Y_n, W_{n+1}, W_{n+2}, T0, T1   on A_1 B_1 ... A_n B_n
//!   S_[i], W_i, X_i                          on A_1 B_1 ... B_{i-1} A_i
//!   Y_i, N_[i]                               on A_1 B_1 ... A_i B_i
//!
//! With that ordering every chain constraint is "trace out the last system"
//! against "append an identity", so no permutations appear in the maps.

use qstrat_tensor::{LabeledOperator, SystemLabel};

use qstrat_comb::StrategyChoi;

use crate::ir::{Constraint, ObjCoeff, Rel, SdpProblem, Sense, Target, Term, TermMap, VarBlock, VarCone};
use crate::ProgramError;

/// Checks the two strategies share a round structure and returns it.
fn common_rounds<'a>(
    n: &'a StrategyChoi,
    m: &StrategyChoi,
) -> Result<&'a qstrat_comb::RoundStructure, ProgramError> {
    if n.rounds() != m.rounds() {
        return Err(ProgramError::Domain(
            "strategies must share a round structure".into(),
        ));
    }
    Ok(n.rounds())
}

/// Systems of the full space A_1 B_1 ... A_n B_n.
fn full_systems(r: &qstrat_comb::RoundStructure) -> Vec<SystemLabel> {
    r.interleaved()
}

/// Systems of S_[i] / W_i / X_i: A_1 B_1 ... B_{i-1} A_i.
fn co_systems(r: &qstrat_comb::RoundStructure, i: usize) -> Vec<SystemLabel> {
    let mut out = Vec::with_capacity(2 * i - 1);
    for k in 1..i {
        out.push(r.input(k).clone());
        out.push(r.output(k).clone());
    }
    out.push(r.input(i).clone());
    out
}

/// Systems of Y_i / N_[i]: A_1 B_1 ... A_i B_i.
fn turn_systems(r: &qstrat_comb::RoundStructure, i: usize) -> Vec<SystemLabel> {
    let mut out = Vec::with_capacity(2 * i);
    for k in 1..=i {
        out.push(r.input(k).clone());
        out.push(r.output(k).clone());
    }
    out
}

fn identity_on(systems: Vec<SystemLabel>) -> LabeledOperator {
    LabeledOperator::identity(systems).expect("valid systems")
}

/// Sub-co-strategy variables S, S_[n], ..., S_[1] with the chain
///   S <= S_[n] x I_{B_n},
///   Tr_{A_i}[S_[i]] = S_[i-1] x I_{B_{i-1}}   (i = n..2),
///   Tr[S_[1]] = 1.
fn push_sub_co_strategy(
    p: &mut SdpProblem,
    r: &qstrat_comb::RoundStructure,
    s_name: &str,
    chain_prefix: &str,
) {
    let n = r.n();
    p.vars.push(VarBlock {
        name: s_name.into(),
        systems: full_systems(r),
        cone: VarCone::Psd,
    });
    for i in 1..=n {
        p.vars.push(VarBlock {
            name: format!("{chain_prefix}{i}"),
            systems: co_systems(r, i),
            cone: VarCone::Psd,
        });
    }
    p.constraints.push(Constraint {
        label: format!("{s_name}_dominated"),
        terms: vec![
            Term::new(s_name, 1.0, TermMap::Identity),
            Term::new(
                &format!("{chain_prefix}{n}"),
                -1.0,
                TermMap::TensorId(vec![r.output(n).clone()]),
            ),
        ],
        rel: Rel::Le,
        target: Target::zero(full_systems(r)),
    });
    for i in (2..=n).rev() {
        p.constraints.push(Constraint {
            label: format!("{chain_prefix}chain_{i}"),
            terms: vec![
                Term::new(
                    &format!("{chain_prefix}{i}"),
                    1.0,
                    TermMap::TraceOut(vec![r.input(i).name.clone()]),
                ),
                Term::new(
                    &format!("{chain_prefix}{}", i - 1),
                    -1.0,
                    TermMap::TensorId(vec![r.output(i - 1).clone()]),
                ),
            ],
            rel: Rel::Eq,
            target: Target::zero({
                let mut sys = co_systems(r, i);
                sys.pop();
                sys
            }),
        });
    }
    p.constraints.push(Constraint {
        label: format!("{chain_prefix}normalized"),
        terms: vec![Term::new(
            &format!("{chain_prefix}1"),
            1.0,
            TermMap::InnerProduct(identity_on(co_systems(r, 1))),
        )],
        rel: Rel::Eq,
        target: Target::Scalar(1.0),
    });
}

/// Dual-side chain variables Y_n PSD, Y_{n-1}..Y_1 Hermitian with
///   Y_{i-1} x I_{A_i} >= Tr_{B_i}[Y_i]   (i = n..2),
/// and the closing row Tr_{B_1}[Y_1] <= closer (a scalar variable times the
/// identity, or epsilon times the identity).
fn push_dual_chain(p: &mut SdpProblem, r: &qstrat_comb::RoundStructure, y_prefix: &str) {
    let n = r.n();
    for i in 1..=n {
        p.vars.push(VarBlock {
            name: format!("{y_prefix}{i}"),
            systems: turn_systems(r, i),
            cone: if i == n { VarCone::Psd } else { VarCone::HermFree },
        });
    }
    for i in (2..=n).rev() {
        p.constraints.push(Constraint {
            label: format!("{y_prefix}chain_{i}"),
            terms: vec![
                Term::new(
                    &format!("{y_prefix}{i}"),
                    1.0,
                    TermMap::TraceOut(vec![r.output(i).name.clone()]),
                ),
                Term::new(
                    &format!("{y_prefix}{}", i - 1),
                    -1.0,
                    TermMap::TensorId(vec![r.input(i).clone()]),
                ),
            ],
            rel: Rel::Le,
            target: Target::zero({
                let mut sys = turn_systems(r, i - 1);
                sys.push(r.input(i).clone());
                sys
            }),
        });
    }
}

/// Normalized strategy distance, primal form:
/// maximize Tr[S (G_N - G_M)] over a sub-co-strategy chain.
pub fn build_distance_primal(
    n: &StrategyChoi,
    m: &StrategyChoi,
) -> Result<SdpProblem, ProgramError> {
    let r = common_rounds(n, m)?.clone();
    let mut p = SdpProblem {
        sense: Sense::Max,
        vars: Vec::new(),
        objective: Vec::new(),
        constraints: Vec::new(),
    };
    push_sub_co_strategy(&mut p, &r, "S", "S_");
    let diff = n.op().sub(m.op())?;
    p.objective.push(("S".into(), ObjCoeff::Matrix(diff)));
    p.validate()?;
    Ok(p)
}

/// Normalized strategy distance, dual form:
/// minimize mu with Y_n >= G_N - G_M, the Y-chain, and
/// mu I_{A_1} >= Tr_{B_1}[Y_1].
pub fn build_distance_dual(
    n: &StrategyChoi,
    m: &StrategyChoi,
) -> Result<SdpProblem, ProgramError> {
    let r = common_rounds(n, m)?.clone();
    let nn = r.n();
    let mut p = SdpProblem {
        sense: Sense::Min,
        vars: vec![VarBlock {
            name: "mu".into(),
            systems: Vec::new(),
            cone: VarCone::FreeScalar,
        }],
        objective: vec![("mu".into(), ObjCoeff::Scalar(1.0))],
        constraints: Vec::new(),
    };
    push_dual_chain(&mut p, &r, "Y_");
    let diff = n.op().sub(m.op())?;
    p.constraints.push(Constraint {
        label: "Y_dominates_difference".into(),
        terms: vec![Term::new(&format!("Y_{nn}"), 1.0, TermMap::Identity)],
        rel: Rel::Ge,
        target: Target::Matrix(diff),
    });
    p.constraints.push(Constraint {
        label: "Y_closing".into(),
        terms: vec![
            Term::new("Y_1", 1.0, TermMap::TraceOut(vec![r.output(1).name.clone()])),
            Term::new("mu", -1.0, TermMap::ScalarIdentity),
        ],
        rel: Rel::Le,
        target: Target::zero(vec![r.input(1).clone()]),
    });
    p.validate()?;
    Ok(p)
}

/// The two-outcome measuring co-strategy form of the (unnormalized) strategy
/// distance; used as a cross-check. Its optimum is exactly twice the
/// normalized primal optimum.
pub fn build_distance_gw(n: &StrategyChoi, m: &StrategyChoi) -> Result<SdpProblem, ProgramError> {
    let r = common_rounds(n, m)?.clone();
    let nn = r.n();
    let mut p = SdpProblem {
        sense: Sense::Max,
        vars: Vec::new(),
        objective: Vec::new(),
        constraints: Vec::new(),
    };
    for name in ["T0", "T1"] {
        p.vars.push(VarBlock {
            name: name.into(),
            systems: full_systems(&r),
            cone: VarCone::Psd,
        });
    }
    for i in 1..=nn {
        p.vars.push(VarBlock {
            name: format!("T_{i}"),
            systems: co_systems(&r, i),
            cone: VarCone::Psd,
        });
    }
    // T0 + T1 = T_[n] x I_{B_n}
    p.constraints.push(Constraint {
        label: "T_split".into(),
        terms: vec![
            Term::new("T0", 1.0, TermMap::Identity),
            Term::new("T1", 1.0, TermMap::Identity),
            Term::new(
                &format!("T_{nn}"),
                -1.0,
                TermMap::TensorId(vec![r.output(nn).clone()]),
            ),
        ],
        rel: Rel::Eq,
        target: Target::zero(full_systems(&r)),
    });
    for i in (2..=nn).rev() {
        p.constraints.push(Constraint {
            label: format!("T_chain_{i}"),
            terms: vec![
                Term::new(
                    &format!("T_{i}"),
                    1.0,
                    TermMap::TraceOut(vec![r.input(i).name.clone()]),
                ),
                Term::new(
                    &format!("T_{}", i - 1),
                    -1.0,
                    TermMap::TensorId(vec![r.output(i - 1).clone()]),
                ),
            ],
            rel: Rel::Eq,
            target: Target::zero({
                let mut sys = co_systems(&r, i);
                sys.pop();
                sys
            }),
        });
    }
    p.constraints.push(Constraint {
        label: "T_normalized".into(),
        terms: vec![Term::new(
            "T_1",
            1.0,
            TermMap::InnerProduct(identity_on(co_systems(&r, 1))),
        )],
        rel: Rel::Eq,
        target: Target::Scalar(1.0),
    });
    let diff = n.op().sub(m.op())?;
    p.objective.push(("T0".into(), ObjCoeff::Matrix(diff.clone())));
    p.objective.push(("T1".into(), ObjCoeff::Matrix(diff.scale(-1.0))));
    p.validate()?;
    Ok(p)
}

/// Eigenvalue shortcut for the exact cost scale: lambda_max(M^{-1/2} N
/// M^{-1/2}) with the spectrum floored at 1e-12 of the top eigenvalue,
/// clamped to [1, 1e14]. For full-rank M this is exactly 2^{Dmax at eps=0};
/// it doubles as a conditioning gauge for the cost programs (large values
/// mean the pair is numerically borderline for f64 solves).
pub fn dmax_linear_scale(n: &StrategyChoi, m: &StrategyChoi) -> f64 {
    let Ok((wm, vm)) = qstrat_tensor::eigh(m.op()) else {
        return 1.0;
    };
    let d = m.op().side();
    let top = wm[d - 1].max(1e-300);
    let floor = 1e-12 * top;
    // inv_sqrt on the (floored) spectrum.
    let mut inv_sqrt = match LabeledOperator::zero(m.op().systems().to_vec()) {
        Ok(z) => z,
        Err(_) => return 1.0,
    };
    for k in 0..d {
        let w = wm[k].max(floor);
        let scale = 1.0 / w.sqrt();
        for r in 0..d {
            for c in 0..d {
                let add = vm.at(r, k) * vm.at(c, k).conj() * scale;
                let cur = inv_sqrt.at(r, c);
                inv_sqrt.set(r, c, cur + add);
            }
        }
    }
    let conj = inv_sqrt
        .matmul(n.op())
        .and_then(|t| t.matmul(&inv_sqrt));
    let Ok(conj) = conj else { return 1.0 };
    let Ok((wc, _)) = qstrat_tensor::eigh(&conj) else {
        return 1.0;
    };
    wc[d - 1].clamp(1.0, 1e14)
}

fn check_epsilon(epsilon: f64, allow_one: bool) -> Result<(), ProgramError> {
    let hi_ok = if allow_one { epsilon <= 1.0 } else { epsilon < 1.0 };
    if !(epsilon >= 0.0 && hi_ok && epsilon.is_finite()) {
        return Err(ProgramError::Domain(format!(
            "epsilon {epsilon} outside the {} range",
            if allow_one { "[0,1]" } else { "[0,1)" }
        )));
    }
    Ok(())
}

/// Smooth strategy min-relative entropy, primal form: the optimum is
/// 2^{-Dmin}, i.e. minimize Tr[S G_M] subject to Tr[S G_N] >= 1 - epsilon
/// over the sub-co-strategy chain.
pub fn build_dmin_primal(
    n: &StrategyChoi,
    m: &StrategyChoi,
    epsilon: f64,
) -> Result<SdpProblem, ProgramError> {
    check_epsilon(epsilon, false)?;
    let r = common_rounds(n, m)?.clone();
    let mut p = SdpProblem {
        sense: Sense::Min,
        vars: Vec::new(),
        objective: Vec::new(),
        constraints: Vec::new(),
    };
    push_sub_co_strategy(&mut p, &r, "S", "S_");
    p.objective
        .push(("S".into(), ObjCoeff::Matrix(m.op().clone())));
    p.constraints.push(Constraint {
        label: "acceptance".into(),
        terms: vec![Term::new(
            "S",
            1.0,
            TermMap::InnerProduct(n.op().clone()),
        )],
        rel: Rel::Ge,
        target: Target::Scalar(1.0 - epsilon),
    });
    p.validate()?;
    Ok(p)
}

/// Smooth strategy min-relative entropy, dual form: the optimum is 2^{-Dmin},
/// maximize (1-eps) mu1 - mu2 with Y_n >= mu1 G_N - G_M, the Y-chain, and
/// mu2 I_{A_1} >= Tr_{B_1}[Y_1].
pub fn build_dmin_dual(
    n: &StrategyChoi,
    m: &StrategyChoi,
    epsilon: f64,
) -> Result<SdpProblem, ProgramError> {
    check_epsilon(epsilon, false)?;
    let r = common_rounds(n, m)?.clone();
    let nn = r.n();
    let mut p = SdpProblem {
        sense: Sense::Max,
        vars: vec![
            VarBlock {
                name: "mu1".into(),
                systems: Vec::new(),
                cone: VarCone::NonnegScalar,
            },
            VarBlock {
                name: "mu2".into(),
                systems: Vec::new(),
                cone: VarCone::FreeScalar,
            },
        ],
        objective: vec![
            ("mu1".into(), ObjCoeff::Scalar(1.0 - epsilon)),
            ("mu2".into(), ObjCoeff::Scalar(-1.0)),
        ],
        constraints: Vec::new(),
    };
    push_dual_chain(&mut p, &r, "Y_");
    p.constraints.push(Constraint {
        label: "Y_dominates_scaled".into(),
        terms: vec![
            Term::new("mu1", 1.0, TermMap::ScalarKernel(n.op().clone())),
            Term::new(&format!("Y_{nn}"), -1.0, TermMap::Identity),
        ],
        rel: Rel::Le,
        target: Target::Matrix(m.op().clone()),
    });
    p.constraints.push(Constraint {
        label: "Y_closing".into(),
        terms: vec![
            Term::new("Y_1", 1.0, TermMap::TraceOut(vec![r.output(1).name.clone()])),
            Term::new("mu2", -1.0, TermMap::ScalarIdentity),
        ],
        rel: Rel::Le,
        target: Target::zero(vec![r.input(1).clone()]),
    });
    p.validate()?;
    Ok(p)
}

/// Smooth strategy max-relative entropy, primal form: the optimum is
/// 2^{+Dmax}.
///
/// At epsilon = 0 the smoothing chain is forced to zero and the comb-chain
/// trace normalization pins the smoothed strategy to G_N itself, so the
/// builder emits the equivalent reduced program
///   minimize lambda  s.t.  lambda G_M >= G_N,
/// which is exactly the exact max-relative entropy.
pub fn build_dmax_primal(
    n: &StrategyChoi,
    m: &StrategyChoi,
    epsilon: f64,
) -> Result<SdpProblem, ProgramError> {
    check_epsilon(epsilon, true)?;
    let r = common_rounds(n, m)?.clone();
    let nn = r.n();
    let mut p = SdpProblem {
        sense: Sense::Min,
        vars: vec![VarBlock {
            name: "lambda".into(),
            systems: Vec::new(),
            cone: VarCone::NonnegScalar,
        }],
        objective: vec![("lambda".into(), ObjCoeff::Scalar(1.0))],
        constraints: Vec::new(),
    };
    if epsilon == 0.0 {
        p.constraints.push(Constraint {
            label: "dominates_exactly".into(),
            terms: vec![Term::new(
                "lambda",
                1.0,
                TermMap::ScalarKernel(m.op().clone()),
            )],
            rel: Rel::Ge,
            target: Target::Matrix(n.op().clone()),
        });
        p.validate()?;
        return Ok(p);
    }
    // Smoothed strategy Ntil with its comb chain.
    p.vars.push(VarBlock {
        name: "Ntil".into(),
        systems: full_systems(&r),
        cone: VarCone::Psd,
    });
    for i in 1..nn {
        p.vars.push(VarBlock {
            name: format!("N_{i}"),
            systems: turn_systems(&r, i),
            cone: VarCone::Psd,
        });
    }
    // Ntil <= lambda G_M
    p.constraints.push(Constraint {
        label: "dominated_by_lambda_M".into(),
        terms: vec![
            Term::new("Ntil", 1.0, TermMap::Identity),
            Term::new("lambda", -1.0, TermMap::ScalarKernel(m.op().clone())),
        ],
        rel: Rel::Le,
        target: Target::zero(full_systems(&r)),
    });
    // Y-chain absorbing the smoothing distance, closing at epsilon I.
    push_dual_chain(&mut p, &r, "Y_");
    p.constraints.push(Constraint {
        label: "Y_absorbs_difference".into(),
        terms: vec![
            Term::new("Ntil", 1.0, TermMap::Identity),
            Term::new(&format!("Y_{nn}"), 1.0, TermMap::Identity),
        ],
        rel: Rel::Ge,
        target: Target::Matrix(n.op().clone()),
    });
    p.constraints.push(Constraint {
        label: "Y_closing".into(),
        terms: vec![Term::new(
            "Y_1",
            1.0,
            TermMap::TraceOut(vec![r.output(1).name.clone()]),
        )],
        rel: Rel::Le,
        target: Target::Matrix(
            identity_on(vec![r.input(1).clone()]).scale(epsilon),
        ),
    });
    // Comb chain on Ntil.
    for i in (1..=nn).rev() {
        let top_name = if i == nn { "Ntil".to_string() } else { format!("N_{i}") };
        if i >= 2 {
            p.constraints.push(Constraint {
                label: format!("N_chain_{i}"),
                terms: vec![
                    Term::new(
                        &top_name,
                        1.0,
                        TermMap::TraceOut(vec![r.output(i).name.clone()]),
                    ),
                    Term::new(
                        &format!("N_{}", i - 1),
                        -1.0,
                        TermMap::TensorId(vec![r.input(i).clone()]),
                    ),
                ],
                rel: Rel::Eq,
                target: Target::zero({
                    let mut sys = turn_systems(&r, i - 1);
                    sys.push(r.input(i).clone());
                    sys
                }),
            });
        } else {
            p.constraints.push(Constraint {
                label: "N_chain_1".into(),
                terms: vec![Term::new(
                    &top_name,
                    1.0,
                    TermMap::TraceOut(vec![r.output(1).name.clone()]),
                )],
                rel: Rel::Eq,
                target: Target::Matrix(identity_on(vec![r.input(1).clone()])),
            });
        }
    }
    p.validate()?;
    Ok(p)
}

/// Smooth strategy max-relative entropy, dual form: the optimum is 2^{+Dmax}.
/// At epsilon = 0 the reduced dual is
///   maximize Tr[G_N W]  s.t.  Tr[G_M W] <= 1, W >= 0.
pub fn build_dmax_dual(
    n: &StrategyChoi,
    m: &StrategyChoi,
    epsilon: f64,
) -> Result<SdpProblem, ProgramError> {
    check_epsilon(epsilon, true)?;
    let r = common_rounds(n, m)?.clone();
    let nn = r.n();
    let mut p = SdpProblem {
        sense: Sense::Max,
        vars: Vec::new(),
        objective: Vec::new(),
        constraints: Vec::new(),
    };
    if epsilon == 0.0 {
        p.vars.push(VarBlock {
            name: "W".into(),
            systems: full_systems(&r),
            cone: VarCone::Psd,
        });
        p.objective
            .push(("W".into(), ObjCoeff::Matrix(n.op().clone())));
        p.constraints.push(Constraint {
            label: "normalized_against_M".into(),
            terms: vec![Term::new(
                "W",
                1.0,
                TermMap::InnerProduct(m.op().clone()),
            )],
            rel: Rel::Le,
            target: Target::Scalar(1.0),
        });
        p.validate()?;
        return Ok(p);
    }
    for i in 1..=nn {
        p.vars.push(VarBlock {
            name: format!("W_{i}"),
            systems: co_systems(&r, i),
            cone: VarCone::Psd,
        });
        p.vars.push(VarBlock {
            name: format!("X_{i}"),
            systems: co_systems(&r, i),
            cone: VarCone::HermFree,
        });
    }
    for i in [nn + 1, nn + 2] {
        p.vars.push(VarBlock {
            name: format!("W_{i}"),
            systems: full_systems(&r),
            cone: VarCone::Psd,
        });
    }
    // Objective: Tr[X_1] + Tr[G_N W_{n+1}] - eps Tr[W_1].
    p.objective.push((
        "X_1".into(),
        ObjCoeff::Matrix(identity_on(co_systems(&r, 1))),
    ));
    p.objective.push((
        format!("W_{}", nn + 1),
        ObjCoeff::Matrix(n.op().clone()),
    ));
    p.objective.push((
        "W_1".into(),
        ObjCoeff::Matrix(identity_on(co_systems(&r, 1)).scale(-epsilon)),
    ));
    // Tr[W_{n+2} G_M] <= 1.
    p.constraints.push(Constraint {
        label: "normalized_against_M".into(),
        terms: vec![Term::new(
            &format!("W_{}", nn + 2),
            1.0,
            TermMap::InnerProduct(m.op().clone()),
        )],
        rel: Rel::Le,
        target: Target::Scalar(1.0),
    });
    // W_{n+1} <= W_n x I_{B_n}.
    p.constraints.push(Constraint {
        label: "W_top".into(),
        terms: vec![
            Term::new(&format!("W_{}", nn + 1), 1.0, TermMap::Identity),
            Term::new(
                &format!("W_{nn}"),
                -1.0,
                TermMap::TensorId(vec![r.output(nn).clone()]),
            ),
        ],
        rel: Rel::Le,
        target: Target::zero(full_systems(&r)),
    });
    // Tr_{A_i}[W_i] <= W_{i-1} x I_{B_{i-1}} for i = n..2.
    for i in (2..=nn).rev() {
        p.constraints.push(Constraint {
            label: format!("W_chain_{i}"),
            terms: vec![
                Term::new(
                    &format!("W_{i}"),
                    1.0,
                    TermMap::TraceOut(vec![r.input(i).name.clone()]),
                ),
                Term::new(
                    &format!("W_{}", i - 1),
                    -1.0,
                    TermMap::TensorId(vec![r.output(i - 1).clone()]),
                ),
            ],
            rel: Rel::Le,
            target: Target::zero({
                let mut sys = co_systems(&r, i);
                sys.pop();
                sys
            }),
        });
    }
    // W_{n+1} + X_n x I_{B_n} <= W_{n+2}.
    p.constraints.push(Constraint {
        label: "W_split".into(),
        terms: vec![
            Term::new(&format!("W_{}", nn + 1), 1.0, TermMap::Identity),
            Term::new(
                &format!("X_{nn}"),
                1.0,
                TermMap::TensorId(vec![r.output(nn).clone()]),
            ),
            Term::new(&format!("W_{}", nn + 2), -1.0, TermMap::Identity),
        ],
        rel: Rel::Le,
        target: Target::zero(full_systems(&r)),
    });
    // X_{i-1} x I_{B_{i-1}} <= Tr_{A_i}[X_i] for i = n..2.
    for i in (2..=nn).rev() {
        p.constraints.push(Constraint {
            label: format!("X_chain_{i}"),
            terms: vec![
                Term::new(
                    &format!("X_{}", i - 1),
                    1.0,
                    TermMap::TensorId(vec![r.output(i - 1).clone()]),
                ),
                Term::new(
                    &format!("X_{i}"),
                    -1.0,
                    TermMap::TraceOut(vec![r.input(i).name.clone()]),
                ),
            ],
            rel: Rel::Le,
            target: Target::zero({
                let mut sys = co_systems(&r, i);
                sys.pop();
                sys
            }),
        });
    }
    p.validate()?;
    Ok(p)
}
