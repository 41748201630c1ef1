#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use num_complex::Complex64;
use qstrat_comb::{
    basis_preparation_choi, gadc_choi, identity_choi, link_product, n_fold_sequential_choi,
    preparation_choi, random_channel_choi, tensor_power_choi, verify_comb, GadcParams,
    StrategyChoi,
};
use qstrat_programs::{
    as_parallel_one_turn, build_distance_gw, build_distance_primal, evaluate, exact_cost_comb,
    exact_cost_comb_at, lower_to_standard, lower_with_style, CrossCheck, EvalOptions,
    LoweringStyle, Mode, Quantity,
};
use qstrat_solver::solve;
use qstrat_tensor::{eigh, trace_norm, LabeledOperator, SystemLabel};

fn gadc(g: f64, n: f64) -> StrategyChoi {
    gadc_choi(GadcParams { gamma: g, noise: n }).unwrap()
}

fn opts() -> EvalOptions {
    EvalOptions::default()
}

fn opts_cross() -> EvalOptions {
    EvalOptions {
        cross_check: CrossCheck::Always,
        ..EvalOptions::default()
    }
}

/// Choi operator of conjugation by Pauli X, as a one-turn strategy.
fn pauli_x_channel() -> StrategyChoi {
    let id = identity_choi(2).unwrap();
    let mut op = LabeledOperator::zero(id.op().systems().to_vec()).unwrap();
    // |Gamma_X> = |0>|1> + |1>|0>, so the Choi is the rank-one projector on
    // indices {01, 10}.
    for r in [1usize, 2] {
        for c in [1usize, 2] {
            op.set(r, c, Complex64::new(1.0, 0.0));
        }
    }
    StrategyChoi::from_parts(id.rounds().clone(), op).unwrap()
}

#[test]
fn distance_identical_strategies_is_zero() {
    let ch = gadc(0.3, 0.4);
    let r = evaluate(Quantity::Distance, &ch, &ch, 0.0, Mode::Adaptive, &opts_cross()).unwrap();
    assert!(r.value.abs() <= 1e-7, "value = {}", r.value);
}

#[test]
fn distance_orthogonal_unitaries_is_one() {
    let id = identity_choi(2).unwrap();
    let px = pauli_x_channel();
    let r = evaluate(Quantity::Distance, &id, &px, 0.0, Mode::Adaptive, &opts_cross()).unwrap();
    assert!((r.value - 1.0).abs() <= 1e-6, "value = {}", r.value);
}

#[test]
fn distance_primal_dual_agree() {
    for (g1, g2, noise) in [(0.2, 0.3, 0.1), (0.5, 0.1, 0.8)] {
        let a = gadc(g1, noise);
        let b = gadc(g2, noise);
        let r = evaluate(Quantity::Distance, &a, &b, 0.0, Mode::Adaptive, &opts_cross()).unwrap();
        assert!(
            (r.primal_value - r.dual_value).abs() <= 1e-6 * (1.0 + r.primal_value.abs()),
            "gap {} at value {}",
            r.gap,
            r.value
        );
    }
}

#[test]
fn distance_matches_brute_force_input_search_n1() {
    // n = 1: the SDP distance dominates every fixed-input trace distance and
    // the best random input gets close from below.
    let a = gadc(0.2, 0.3);
    let b = gadc(0.3, 0.3);
    let r = evaluate(Quantity::Distance, &a, &b, 0.0, Mode::Adaptive, &opts_cross()).unwrap();

    let mut rng = qstrat_tensor::rng::SplitMix64::new(2024);
    let mut best = 0.0f64;
    for _ in 0..3000 {
        let psi = qstrat_tensor::testutil::random_pure_state(4, &mut rng);
        let mut rho = LabeledOperator::zero(vec![
            SystemLabel::new("R", 2).unwrap(),
            SystemLabel::new("A1", 2).unwrap(),
        ])
        .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                rho.set(i, j, psi[i] * psi[j].conj());
            }
        }
        let out_a = link_product(&rho, a.op()).unwrap();
        let out_b = link_product(&rho, b.op()).unwrap();
        let dist = 0.5 * trace_norm(&out_a.sub(&out_b).unwrap()).unwrap();
        best = best.max(dist);
    }
    assert!(r.value >= best - 1e-7, "sdp {} < sampled {}", r.value, best);
    assert!(r.value <= best + 5e-3, "sdp {} far above sampled {}", r.value, best);
}

#[test]
fn gw_form_is_twice_the_normalized_distance() {
    for seed in [5u64, 6] {
        let a = random_channel_choi(2, 2, seed).unwrap();
        let b = random_channel_choi(2, 2, seed + 50).unwrap();
        let gw = build_distance_gw(&a, &b).unwrap();
        let lowered = lower_to_standard(&gw).unwrap();
        let report = solve(&lowered.sdp, &Default::default()).unwrap();
        let gw_value = lowered.sign * report.primal_value;

        let r = evaluate(Quantity::Distance, &a, &b, 0.0, Mode::Adaptive, &opts()).unwrap();
        assert!(
            (gw_value - 2.0 * r.value).abs() <= 1e-6 * (1.0 + gw_value.abs()),
            "gw {} vs 2x {}",
            gw_value,
            2.0 * r.value
        );
    }
}

#[test]
fn dmin_self_pair_matches_closed_form() {
    let ch = gadc(0.25, 0.6);
    for eps in [0.01, 0.05, 0.2] {
        let r = evaluate(Quantity::Dmin, &ch, &ch, eps, Mode::Adaptive, &opts_cross()).unwrap();
        let want = -(1.0 - eps).log2();
        assert!((r.value - want).abs() <= 1e-6, "eps {eps}: {} vs {want}", r.value);
    }
}

#[test]
fn dmin_self_pair_exact_epsilon_zero() {
    // At eps = 0 the acceptance row is active everywhere feasible; the
    // optimum is exactly 1, so the value is 0 bits.
    let ch = gadc(0.25, 0.6);
    let r = evaluate(Quantity::Dmin, &ch, &ch, 0.0, Mode::Adaptive, &opts_cross()).unwrap();
    assert!(r.value.abs() <= 1e-6, "value {}", r.value);
    assert!((r.primal_value - 1.0).abs() <= 1e-6);
}

#[test]
fn full_contraction_with_optimal_sub_co_strategy_is_a_probability() {
    // Extract the optimizing sub-co-strategy S from the distance primal of a
    // two-round comb pair and contract it fully against each comb: the link
    // product collapses to a scalar acceptance probability.
    let a = n_fold_sequential_choi(&gadc(0.2, 0.2), 2).unwrap();
    let b = n_fold_sequential_choi(&gadc(0.5, 0.7), 2).unwrap();
    let prog = build_distance_primal(&a, &b).unwrap();
    let lowered = lower_to_standard(&prog).unwrap();
    let report = solve(&lowered.sdp, &Default::default()).unwrap();
    assert_eq!(report.status, qstrat_solver::SolveStatus::Optimal);
    let s_opt = lowered.extract_var(&prog, &report.x, "S").unwrap();
    // The SDP optimizes Tr[S Gamma]; the link contraction applies the
    // partial transpose on shared systems, so contract with S^T.
    let s_t = s_opt.transpose();
    for comb in [&a, &b] {
        let scalar = link_product(comb.op(), &s_t).unwrap();
        assert_eq!(scalar.side(), 1);
        let prob = scalar.at(0, 0).re;
        assert!((-1e-7..=1.0 + 1e-7).contains(&prob), "prob {prob}");
        assert!(scalar.at(0, 0).im.abs() <= 1e-9);
    }
    // And the difference of the two probabilities is the attained distance.
    let pa = link_product(a.op(), &s_t).unwrap().at(0, 0).re;
    let pb = link_product(b.op(), &s_t).unwrap().at(0, 0).re;
    let attained = pa - pb;
    let r = evaluate(Quantity::Distance, &a, &b, 0.0, Mode::Adaptive, &opts()).unwrap();
    assert!((attained - r.value).abs() <= 1e-6, "{attained} vs {}", r.value);
}

#[test]
fn dmin_state_boxes_give_log2_m() {
    let zero = basis_preparation_choi(2, 0).unwrap();
    for m in [2.0f64, 4.0, 8.0] {
        let mut pi_m =
            LabeledOperator::zero(vec![SystemLabel::new("q", 2).unwrap()]).unwrap();
        pi_m.set(0, 0, Complex64::new(1.0 / m, 0.0));
        pi_m.set(1, 1, Complex64::new(1.0 - 1.0 / m, 0.0));
        let box_m = preparation_choi(&pi_m).unwrap();
        let r = evaluate(Quantity::Dmin, &zero, &box_m, 0.0, Mode::Adaptive, &opts_cross())
            .unwrap();
        assert!(
            (r.value - m.log2()).abs() <= 1e-6,
            "M = {m}: got {} want {}",
            r.value,
            m.log2()
        );
    }
}

#[test]
fn dmax_self_pair_is_zero() {
    let ch = gadc(0.35, 0.2);
    for eps in [0.0, 0.05, 0.3, 1.0] {
        let r = evaluate(Quantity::Dmax, &ch, &ch, eps, Mode::Adaptive, &opts_cross()).unwrap();
        assert!(r.value.abs() <= 1e-6, "eps {eps}: value {}", r.value);
    }
}

#[test]
fn dmax_exact_matches_eigenvalue_oracle() {
    for seed in [21u64, 22, 23] {
        let a = random_channel_choi(2, 2, seed).unwrap();
        let b = random_channel_choi(2, 2, seed + 7).unwrap();
        // Oracle: lambda_max(G_b^{-1/2} G_a G_b^{-1/2}) via the eigensystem
        // of G_b (full rank for generic random channels).
        let (wb, vb) = eigh(b.op()).unwrap();
        assert!(wb[0] > 1e-8, "oracle needs full-rank G_b");
        let d = b.op().side();
        let mut inv_sqrt = LabeledOperator::zero(b.op().systems().to_vec()).unwrap();
        for k in 0..d {
            let scale = 1.0 / wb[k].sqrt();
            for r in 0..d {
                for c in 0..d {
                    let add = vb.at(r, k) * vb.at(c, k).conj() * scale;
                    let cur = inv_sqrt.at(r, c);
                    inv_sqrt.set(r, c, cur + add);
                }
            }
        }
        let conj = inv_sqrt
            .matmul(a.op())
            .unwrap()
            .matmul(&inv_sqrt)
            .unwrap();
        let (wc, _) = eigh(&conj).unwrap();
        let want = wc[d - 1].log2();

        let r = evaluate(Quantity::Dmax, &a, &b, 0.0, Mode::Adaptive, &opts_cross()).unwrap();
        assert!(
            (r.value - want).abs() <= 1e-6,
            "seed {seed}: got {} want {want}",
            r.value
        );
    }
}

#[test]
fn dmax_epsilon_one_is_zero() {
    let a = gadc(0.2, 0.2);
    let b = gadc(0.2, 0.3);
    let r = evaluate(Quantity::Dmax, &a, &b, 1.0, Mode::Adaptive, &opts_cross()).unwrap();
    assert!(r.value.abs() <= 1e-6, "value {}", r.value);
}

#[test]
fn dmax_rank_deficient_reports_infinity() {
    // gamma = 0 makes the second Choi rank one while the first is full rank.
    let a = gadc(0.5, 0.5);
    let b = gadc(0.0, 0.5);
    let r = evaluate(Quantity::Dmax, &a, &b, 0.0, Mode::Adaptive, &opts()).unwrap();
    assert!(r.value.is_infinite());
}

#[test]
fn adaptive_dominates_parallel_n2() {
    let a = n_fold_sequential_choi(&gadc(0.2, 0.3), 2).unwrap();
    let b = n_fold_sequential_choi(&gadc(0.3, 0.3), 2).unwrap();
    let ra = evaluate(Quantity::Distance, &a, &b, 0.0, Mode::Adaptive, &opts()).unwrap();
    let rp = evaluate(Quantity::Distance, &a, &b, 0.0, Mode::Parallel, &opts()).unwrap();
    assert!(ra.value >= rp.value - 1e-7, "{} vs {}", ra.value, rp.value);
}

#[test]
fn n1_adaptive_equals_parallel() {
    let a = gadc(0.4, 0.1);
    let b = gadc(0.1, 0.6);
    for q in [Quantity::Distance, Quantity::Dmin, Quantity::Dmax] {
        let ra = evaluate(q, &a, &b, 0.05, Mode::Adaptive, &opts()).unwrap();
        let rp = evaluate(q, &a, &b, 0.05, Mode::Parallel, &opts()).unwrap();
        assert!((ra.value - rp.value).abs() <= 1e-7);
    }
}

#[test]
fn parallel_transform_matches_tensor_power() {
    let ch = gadc(0.3, 0.7);
    let comb = n_fold_sequential_choi(&ch, 2).unwrap();
    let par = as_parallel_one_turn(&comb).unwrap();
    let tp = tensor_power_choi(&ch, 2).unwrap();
    assert_eq!(par.op().entries(), tp.op().entries());
}

#[test]
fn parallel_rejects_correlated_comb() {
    // A comb that is not a product of channels: feed B1 forward into A2 via
    // an identity-channel memory (build from two-round exact cost comb of a
    // non-product operator). Simplest: symmetrize a product comb by adding a
    // permuted copy, then renormalize the chain; the marginal check fails.
    let a = n_fold_sequential_choi(&gadc(0.2, 0.3), 2).unwrap();
    let b = n_fold_sequential_choi(&gadc(0.6, 0.3), 2).unwrap();
    let mixed = StrategyChoi::from_parts(
        a.rounds().clone(),
        a.op().scale(0.5).add(&b.op().scale(0.5)).unwrap(),
    )
    .unwrap();
    // The mixture of two channel combs is a valid comb but not a product.
    assert!(verify_comb(&mixed, 1e-9).pass);
    assert!(as_parallel_one_turn(&mixed).is_err());
}

#[test]
fn lowering_paths_agree() {
    let a = gadc(0.2, 0.4);
    let b = gadc(0.45, 0.1);
    let p = build_distance_primal(&a, &b).unwrap();
    let lowered_a = lower_to_standard(&p).unwrap();
    let lowered_b = lower_with_style(&p, LoweringStyle::Alternate).unwrap();
    assert!(lowered_a.real_path);
    assert!(!lowered_b.real_path);
    let ra = solve(&lowered_a.sdp, &Default::default()).unwrap();
    let rb = solve(&lowered_b.sdp, &Default::default()).unwrap();
    let va = lowered_a.sign * ra.primal_value;
    let vb = lowered_b.sign * rb.primal_value;
    assert!((va - vb).abs() <= 1e-8 * (1.0 + va.abs()), "{va} vs {vb}");
}

#[test]
fn toy_lowering_value() {
    // min x s.t. x >= 1 over a 1x1 "Hermitian" block: optimum 1.
    use qstrat_programs::ir::*;
    let sys = vec![SystemLabel::new("q", 1).unwrap()];
    let p = SdpProblem {
        sense: Sense::Min,
        vars: vec![VarBlock {
            name: "x".into(),
            systems: sys.clone(),
            cone: VarCone::Psd,
        }],
        objective: vec![(
            "x".into(),
            ObjCoeff::Matrix(LabeledOperator::identity(sys.clone()).unwrap()),
        )],
        constraints: vec![Constraint {
            label: "floor".into(),
            terms: vec![Term::new("x", 1.0, TermMap::Identity)],
            rel: Rel::Ge,
            target: Target::Matrix(LabeledOperator::identity(sys).unwrap()),
        }],
    };
    let lowered = lower_to_standard(&p).unwrap();
    let report = solve(&lowered.sdp, &Default::default()).unwrap();
    assert!((lowered.sign * report.primal_value - 1.0).abs() <= 1e-8);
}

#[test]
fn exact_cost_comb_is_valid_at_optimum_and_fails_below() {
    let a = gadc(0.2, 0.2);
    let b = gadc(0.2, 0.35);
    let (witness, lambda) = exact_cost_comb(&a, &b, &opts()).unwrap();
    let report = verify_comb(&witness, 1e-7);
    assert!(report.pass, "residuals {:?}", report.levels);

    let below = exact_cost_comb_at(&a, &b, lambda - 1e-3).unwrap();
    let (w, _) = eigh(below.op()).unwrap();
    assert!(w[0] < -1e-9, "min eigenvalue {} not negative", w[0]);

    let above = exact_cost_comb_at(&a, &b, lambda + 1.0).unwrap();
    let (wa, _) = eigh(above.op()).unwrap();
    let (wopt, _) = eigh(witness.op()).unwrap();
    assert!(wa[0] > wopt[0] - 1e-12);
}

#[test]
fn exact_cost_rejects_identical_pair() {
    let a = gadc(0.3, 0.3);
    assert!(exact_cost_comb(&a, &a, &opts()).is_err());
}

#[test]
fn adjoint_identities_on_ir_terms() {
    use qstrat_programs::ir::*;
    let sys_ab = vec![
        SystemLabel::new("A1", 2).unwrap(),
        SystemLabel::new("B1", 2).unwrap(),
    ];
    let v = VarBlock {
        name: "V".into(),
        systems: sys_ab.clone(),
        cone: VarCone::Psd,
    };
    let kernel = qstrat_tensor::testutil::random_hermitian("K", 4, 31)
        .regroup(sys_ab.clone())
        .unwrap();
    let b2 = SystemLabel::new("B2", 3).unwrap();
    let terms = [
        Term::new("V", 1.3, TermMap::Identity),
        Term::new("V", -0.7, TermMap::TraceOut(vec!["B1".into()])),
        Term::new("V", 2.1, TermMap::TensorId(vec![b2.clone()])),
        Term::new("V", 0.9, TermMap::InnerProduct(kernel)),
    ];
    let mut rng = qstrat_tensor::rng::SplitMix64::new(777);
    for (ti, term) in terms.iter().enumerate() {
        for rep in 0..25 {
            let seed = 1000 + (ti as u64) * 100 + rep;
            let x = qstrat_tensor::testutil::random_hermitian("X", 4, seed)
                .regroup(sys_ab.clone())
                .unwrap();
            // Build y on the output space of the term.
            let (y, target) = match &term.map {
                TermMap::Identity => (
                    qstrat_tensor::testutil::random_hermitian("Y", 4, seed + 1)
                        .regroup(sys_ab.clone())
                        .unwrap(),
                    Target::zero(sys_ab.clone()),
                ),
                TermMap::TraceOut(_) => (
                    qstrat_tensor::testutil::random_hermitian("Y", 2, seed + 1)
                        .relabel(&["A1"])
                        .unwrap(),
                    Target::zero(vec![sys_ab[0].clone()]),
                ),
                TermMap::TensorId(_) => {
                    let mut big_sys = sys_ab.clone();
                    big_sys.push(b2.clone());
                    (
                        qstrat_tensor::testutil::random_hermitian("Y", 12, seed + 1)
                            .regroup(big_sys.clone())
                            .unwrap(),
                        Target::zero(big_sys),
                    )
                }
                TermMap::InnerProduct(_) => (
                    qstrat_programs::ir::scalar_operator(rng.next_centered()),
                    Target::Scalar(0.0),
                ),
                _ => unreachable!(),
            };
            let fwd = apply_term(term, &x, &target).unwrap();
            let lhs = match &fwd {
                TermOutput::Matrix(m) => m.trace_product(&y).re,
                TermOutput::Scalar(s) => s * y.at(0, 0).re,
            };
            let adj = apply_term_adjoint(term, &v, &y).unwrap();
            let rhs = match &adj {
                TermOutput::Matrix(m) => m.trace_product(&x).re,
                TermOutput::Scalar(s) => s * x.at(0, 0).re,
            };
            assert!(
                (lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()),
                "term {ti}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn lowered_adjoint_identity() {
    let a = gadc(0.15, 0.45);
    let b = gadc(0.55, 0.25);
    let p = qstrat_programs::build_dmax_primal(&a, &b, 0.05).unwrap();
    let lowered = lower_to_standard(&p).unwrap();
    let mut rng = qstrat_tensor::rng::SplitMix64::new(4242);
    let sdp = &lowered.sdp;
    for _ in 0..20 {
        let mut x = qstrat_solver::Point::zeros(&sdp.psd_sides, sdp.nonneg, sdp.free);
        for mat in &mut x.mats {
            let n = mat.rows;
            for r in 0..n {
                for c in 0..=r {
                    let v = rng.next_centered();
                    mat.data[r * n + c] = v;
                    mat.data[c * n + r] = v;
                }
            }
        }
        for v in &mut x.nonneg {
            *v = rng.next_centered();
        }
        for v in &mut x.free {
            *v = rng.next_centered();
        }
        let y: Vec<f64> = (0..sdp.rows.len()).map(|_| rng.next_centered()).collect();
        let ax = sdp.apply(&x);
        let lhs: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let aty = sdp.apply_adjoint(&y);
        let rhs = aty.dot(&x);
        assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
    }
}

#[test]
fn dmin_monotone_in_epsilon() {
    let a = gadc(0.2, 0.2);
    let b = gadc(0.2, 0.3);
    let mut last = -1.0;
    for eps in [0.0, 0.05, 0.2] {
        let r = evaluate(Quantity::Dmin, &a, &b, eps, Mode::Adaptive, &opts()).unwrap();
        assert!(r.value >= last - 1e-7, "eps {eps}: {} < {}", r.value, last);
        last = r.value;
    }
}
