//! Acceptance gate: every release-blocking property in one deterministic
//! pass. Each numbered criterion prints its own PASS/FAIL line; the test
//! fails if any criterion fails. Run with --nocapture to watch progress.
//!
//! The full suite solves the fig3/fig4/fig5 sweeps at up to three channel
//! uses, so it takes tens of minutes at desk scale.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use qstrat_cli::{emit_rows, parse_rows, preset, render_plot, run_sweep, ResultRow};
use qstrat_comb::{
    basis_preparation_choi, gadc_choi, identity_choi, link_product, n_fold_sequential_choi,
    preparation_choi, random_channel_choi, tensor_power_choi, verify_comb, GadcParams,
    StrategyChoi,
};
use qstrat_programs::ir::{apply_term, apply_term_adjoint, SdpProblem, TermOutput};
use qstrat_programs::{
    build_distance_dual, build_distance_gw, build_distance_primal, build_dmax_dual,
    build_dmax_primal, build_dmin_dual, build_dmin_primal, evaluate, exact_cost_comb,
    exact_cost_comb_at, lower_to_standard, CrossCheck, EvalOptions, Mode, Quantity,
};
use qstrat_solver::solve;
use qstrat_tensor::rng::SplitMix64;
use qstrat_tensor::testutil::random_pure_state;
use qstrat_tensor::{eigh, trace_norm, LabeledOperator, SystemLabel};

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn new() -> Self {
        Gate { failures: Vec::new() }
    }

    fn report(&mut self, criterion: usize, pass: bool, detail: String) {
        let verdict = if pass { "PASS" } else { "FAIL" };
        println!("criterion {criterion:>2}: {verdict} - {detail}");
        if !pass {
            self.failures.push(format!("criterion {criterion}: {detail}"));
        }
    }
}

fn gadc(g: f64, n: f64) -> StrategyChoi {
    gadc_choi(GadcParams { gamma: g, noise: n }).unwrap()
}

fn random_pair(seed: u64) -> (StrategyChoi, StrategyChoi) {
    (
        random_channel_choi(2, 2, seed).unwrap(),
        random_channel_choi(2, 2, seed + 1000).unwrap(),
    )
}

/// Seeded random channel pairs filtered to numerically comfortable
/// conditioning: the exact-cost scale in both directions stays below 6 per
/// use (so below ~36 at two uses). Random channel pairs with nearly singular
/// Choi operators have cost-program optima spanning several orders of
/// magnitude; there the dense f64 Schur factorization caps the attainable
/// relative gap above 1e-6 and the duality check stops measuring the
/// builders. The strong-duality invariant assumes well-conditioned
/// full-rank inputs.
fn conditioned_pairs(count: usize, mut seed: u64) -> Vec<(u64, StrategyChoi, StrategyChoi)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        seed += 1;
        let (a, b) = random_pair(seed);
        let fwd = qstrat_programs::dmax_linear_scale(&a, &b);
        let rev = qstrat_programs::dmax_linear_scale(&b, &a);
        if fwd <= 6.0 && rev <= 6.0 {
            out.push((seed, a, b));
        }
    }
    out
}

/// The two GADC channel pairs behind the shipped presets: the fig3 pair at a
/// representative common noise, and the fig4/fig5 pair at its reference
/// damping.
fn preset_pairs() -> Vec<(StrategyChoi, StrategyChoi)> {
    vec![
        (gadc(0.2, 0.2), gadc(0.3, 0.2)),
        (gadc(0.2, 0.2), gadc(0.2, 0.3)),
    ]
}

fn cross_opts() -> EvalOptions {
    EvalOptions {
        cross_check: CrossCheck::Always,
        ..Default::default()
    }
}

fn plain_opts() -> EvalOptions {
    EvalOptions::default()
}

fn criterion_1_duality(gate: &mut Gate) {
    let start = Instant::now();
    let mut pairs: Vec<(String, StrategyChoi, StrategyChoi)> = Vec::new();
    for (seed, a, b) in conditioned_pairs(20, 0) {
        pairs.push((format!("random#{seed}"), a, b));
    }
    for (k, (a, b)) in preset_pairs().into_iter().enumerate() {
        pairs.push((format!("preset#{k}"), a, b));
    }
    let mut worst: f64 = 0.0;
    let mut worst_case = String::new();
    let mut failed = Vec::new();
    for (name, a1, b1) in &pairs {
        for n in [1usize, 2] {
            let a = n_fold_sequential_choi(a1, n).unwrap();
            let b = n_fold_sequential_choi(b1, n).unwrap();
            for (q, eps) in [
                (Quantity::Distance, 0.0),
                (Quantity::Dmin, 0.05),
                (Quantity::Dmax, 0.05),
            ] {
                match evaluate(q, &a, &b, eps, Mode::Adaptive, &cross_opts()) {
                    Ok(r) => {
                        let rel = (r.primal_value - r.dual_value).abs()
                            / (1.0 + r.primal_value.abs());
                        if rel > worst {
                            worst = rel;
                            worst_case = format!("{name} n={n} {}", q.as_str());
                        }
                        if rel > 1e-6 {
                            failed.push(format!("{name} n={n} {} rel {rel:.3e}", q.as_str()));
                        }
                    }
                    Err(e) => failed.push(format!("{name} n={n} {}: {e}", q.as_str())),
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failed.is_empty() && elapsed.as_secs() < 600;
    gate.report(
        1,
        pass,
        format!(
            "duality on {} pairs x n in {{1,2}} x 3 quantities: worst relative split {worst:.3e} ({worst_case}), {:.1}s{}",
            pairs.len(),
            elapsed.as_secs_f64(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failed.join(", "))
            }
        ),
    );
}

struct SweepOutputs {
    fig3: Vec<ResultRow>,
    fig4: Vec<ResultRow>,
    fig5: Vec<ResultRow>,
    fig3_secs: f64,
    fig4_csv: std::path::PathBuf,
}

fn run_presets(dir: &std::path::Path) -> SweepOutputs {
    let run = |name: &str, out: &std::path::Path| -> (Vec<ResultRow>, f64) {
        let cfg = preset(name, Some(out.to_str().unwrap())).unwrap();
        let t = Instant::now();
        let rows = run_sweep(&cfg, 2).unwrap();
        (rows, t.elapsed().as_secs_f64())
    };
    let fig3_csv = dir.join("fig3.csv");
    let fig4_csv = dir.join("fig4.csv");
    let fig5_csv = dir.join("fig5.csv");
    let (fig3, fig3_secs) = run("fig3", &fig3_csv);
    println!("    [fig3 sweep done in {fig3_secs:.0}s]");
    let (fig4, fig4_secs) = run("fig4", &fig4_csv);
    println!("    [fig4 sweep done in {fig4_secs:.0}s]");
    let (fig5, fig5_secs) = run("fig5", &fig5_csv);
    println!("    [fig5 sweep done in {fig5_secs:.0}s]");
    SweepOutputs {
        fig3,
        fig4,
        fig5,
        fig3_secs,
        fig4_csv,
    }
}

fn criterion_2_ordering(gate: &mut Gate, sweeps: &SweepOutputs) {
    let mut problems = Vec::new();
    let mut max_gap_n2 = [(f64::NEG_INFINITY, ""); 3];
    let quantities = ["distance", "dmin", "dmax"];
    for (qi, (rows, quantity)) in [
        (&sweeps.fig3, "distance"),
        (&sweeps.fig4, "dmin"),
        (&sweeps.fig5, "dmax"),
    ]
    .into_iter()
    .enumerate()
    {
        // Group rows into (key-minus-mode) cells.
        for row in rows.iter().filter(|r| r.mode == "adaptive") {
            let partner = rows.iter().find(|r| {
                r.mode == "parallel"
                    && r.n == row.n
                    && r.quantity == row.quantity
                    && r.gamma1 == row.gamma1
                    && r.noise1 == row.noise1
                    && r.gamma2 == row.gamma2
                    && r.noise2 == row.noise2
            });
            let Some(par) = partner else {
                problems.push(format!("{quantity}: missing parallel partner"));
                continue;
            };
            // A cell is certified when the solver declared optimality or the
            // returned certificate meets the sweep gap bound anyway
            // (degenerate optima can stop just short of the strict internal
            // tolerances).
            let certified = |r: &ResultRow| {
                r.value.is_finite()
                    && (r.status == "optimal" || r.gap <= 1e-6 * (1.0 + r.value.abs()))
            };
            if !certified(row) || !certified(par) {
                problems.push(format!(
                    "{quantity} n={} grid ({},{}): uncertified cell, status {} / {}",
                    row.n, row.gamma1, row.noise1, row.status, par.status
                ));
                continue;
            }
            if !(row.value >= par.value - 1e-7) {
                problems.push(format!(
                    "{quantity} n={} grid ({},{}): adaptive {} < parallel {} - 1e-7",
                    row.n, row.gamma1, row.noise1, row.value, par.value
                ));
            }
            if row.n == 2 {
                let gap = row.value - par.value;
                if gap > max_gap_n2[qi].0 {
                    max_gap_n2[qi] = (gap, quantities[qi]);
                }
            }
        }
    }
    for (gap, q) in &max_gap_n2 {
        if !(*gap > 1e-4) {
            problems.push(format!("{q}: max n=2 gap {gap:.3e} <= 1e-4"));
        }
    }
    // Appending uses cannot reduce the adaptive distance: check value
    // ordering in n on the fig3 rows.
    for row in sweeps.fig3.iter().filter(|r| r.mode == "adaptive" && r.n == 1) {
        for bigger in [2usize, 3] {
            let up = sweeps.fig3.iter().find(|r| {
                r.mode == "adaptive" && r.n == bigger && r.noise1 == row.noise1
            });
            if let Some(up) = up {
                if up.value < row.value - 1e-6 {
                    problems.push(format!(
                        "distance decreased from n=1 to n={bigger} at N={}",
                        row.noise1
                    ));
                }
            }
        }
    }
    let hour_ok = sweeps.fig3_secs < 3600.0;
    if !hour_ok {
        problems.push(format!("fig3 preset took {:.0}s >= 1h", sweeps.fig3_secs));
    }
    let pass = problems.is_empty();
    gate.report(
        2,
        pass,
        format!(
            "fig3/fig4/fig5 ordering holds; n=2 max gaps: distance {:.2e}, dmin {:.2e}, dmax {:.2e}; fig3 in {:.0}s{}",
            max_gap_n2[0].0,
            max_gap_n2[1].0,
            max_gap_n2[2].0,
            sweeps.fig3_secs,
            if pass {
                String::new()
            } else {
                format!("; problems: {}", problems.join(" | "))
            }
        ),
    );
}

fn criterion_3_n1_coincidence(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (seed, a, b) in conditioned_pairs(10, 30) {
        for (q, eps) in [
            (Quantity::Distance, 0.0),
            (Quantity::Dmin, 0.05),
            (Quantity::Dmax, 0.05),
        ] {
            let ra = evaluate(q, &a, &b, eps, Mode::Adaptive, &plain_opts());
            let rp = evaluate(q, &a, &b, eps, Mode::Parallel, &plain_opts());
            match (ra, rp) {
                (Ok(ra), Ok(rp)) => {
                    let d = (ra.value - rp.value).abs();
                    worst = worst.max(d);
                    if d > 1e-7 {
                        failures.push(format!("seed {seed} {}: {d:.3e}", q.as_str()));
                    }
                }
                (a, b) => failures.push(format!(
                    "seed {seed} {}: {:?} / {:?}",
                    q.as_str(),
                    a.err().map(|e| e.to_string()),
                    b.err().map(|e| e.to_string())
                )),
            }
        }
    }
    gate.report(
        3,
        failures.is_empty(),
        format!(
            "n=1 adaptive vs parallel on 10 random pairs: worst |difference| {worst:.3e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    );
}

fn criterion_4_closed_forms(gate: &mut Gate) {
    let mut failures = Vec::new();
    let mut detail = String::new();

    // Dmin self-pair.
    let ch = gadc(0.3, 0.4);
    let mut worst_dmin: f64 = 0.0;
    for eps in [0.01, 0.05, 0.2] {
        let r = evaluate(Quantity::Dmin, &ch, &ch, eps, Mode::Adaptive, &cross_opts()).unwrap();
        let want = -(1.0f64 - eps).log2();
        let err = (r.value - want).abs();
        worst_dmin = worst_dmin.max(err);
        if err > 1e-6 {
            failures.push(format!("dmin self eps={eps}: err {err:.3e}"));
        }
    }
    let _ = write!(detail, "dmin self worst {worst_dmin:.2e}");

    // Dmax self-pair.
    let mut worst_dmax: f64 = 0.0;
    for eps in [0.0, 0.01, 0.05, 0.2] {
        let r = evaluate(Quantity::Dmax, &ch, &ch, eps, Mode::Adaptive, &cross_opts()).unwrap();
        worst_dmax = worst_dmax.max(r.value.abs());
        if r.value.abs() > 1e-6 {
            failures.push(format!("dmax self eps={eps}: value {:.3e}", r.value));
        }
    }
    let _ = write!(detail, ", dmax self worst {worst_dmax:.2e}");

    // State boxes.
    let zero = basis_preparation_choi(2, 0).unwrap();
    let mut worst_box: f64 = 0.0;
    for m in [2.0f64, 4.0, 8.0] {
        let mut pi_m = LabeledOperator::zero(vec![SystemLabel::new("q", 2).unwrap()]).unwrap();
        pi_m.set(0, 0, Complex64::new(1.0 / m, 0.0));
        pi_m.set(1, 1, Complex64::new(1.0 - 1.0 / m, 0.0));
        let box_m = preparation_choi(&pi_m).unwrap();
        let r = evaluate(Quantity::Dmin, &zero, &box_m, 0.0, Mode::Adaptive, &cross_opts())
            .unwrap();
        let err = (r.value - m.log2()).abs();
        worst_box = worst_box.max(err);
        if err > 1e-6 {
            failures.push(format!("state box M={m}: err {err:.3e}"));
        }
    }
    let _ = write!(detail, ", state boxes worst {worst_box:.2e}");

    // Exact dmax versus the eigenvalue oracle on full-rank random pairs.
    let mut worst_eig: f64 = 0.0;
    for (seed, a, b) in conditioned_pairs(10, 100) {
        let (wb, vb) = eigh(b.op()).unwrap();
        assert!(wb[0] > 1e-6, "conditioned pair has full-rank Choi");
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
        let conj = inv_sqrt.matmul(a.op()).unwrap().matmul(&inv_sqrt).unwrap();
        let (wc, _) = eigh(&conj).unwrap();
        let want = wc[d - 1].log2();
        let r = evaluate(Quantity::Dmax, &a, &b, 0.0, Mode::Adaptive, &cross_opts()).unwrap();
        let err = (r.value - want).abs();
        worst_eig = worst_eig.max(err);
        if err > 1e-6 {
            failures.push(format!("dmax eig oracle seed={seed}: err {err:.3e}"));
        }
    }
    let _ = write!(detail, ", eigenvalue oracle worst {worst_eig:.2e}");

    gate.report(
        4,
        failures.is_empty(),
        format!(
            "closed-form anchors: {detail}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    );
}

fn criterion_5_gw(gate: &mut Gate) {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (k, seed) in (51..=60u64).enumerate() {
        let (a1, b1) = random_pair(seed);
        // Two of the ten pairs run at two turns.
        let n = if k < 2 { 2 } else { 1 };
        let a = n_fold_sequential_choi(&a1, n).unwrap();
        let b = n_fold_sequential_choi(&b1, n).unwrap();
        let gw = build_distance_gw(&a, &b).unwrap();
        let lowered = lower_to_standard(&gw).unwrap();
        let report = solve(&lowered.sdp, &Default::default()).unwrap();
        let gw_value = lowered.sign * report.primal_value;
        let r = evaluate(Quantity::Distance, &a, &b, 0.0, Mode::Adaptive, &plain_opts()).unwrap();
        let err = (gw_value - 2.0 * r.value).abs() / (1.0 + gw_value.abs());
        worst = worst.max(err);
        if err > 1e-6 {
            failures.push(format!("seed {seed} n={n}: err {err:.3e}"));
        }
    }
    gate.report(
        5,
        failures.is_empty(),
        format!(
            "measuring co-strategy form = 2x normalized distance on 10 pairs: worst {worst:.3e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    );
}

fn random_herm_like(op: &LabeledOperator, rng: &mut SplitMix64) -> LabeledOperator {
    let d = op.side();
    let mut m = LabeledOperator::zero(op.systems().to_vec()).unwrap();
    for r in 0..d {
        m.set(r, r, Complex64::new(rng.next_centered(), 0.0));
        for c in r + 1..d {
            let z = Complex64::new(rng.next_centered(), rng.next_centered());
            m.set(r, c, z);
            m.set(c, r, z.conj());
        }
    }
    m
}

fn criterion_6_adjoints(gate: &mut Gate) {
    // Every term map of every built program, 100 random Hermitian inputs each.
    let a1 = random_channel_choi(2, 2, 71).unwrap();
    let b1 = random_channel_choi(2, 2, 72).unwrap();
    let a = n_fold_sequential_choi(&a1, 2).unwrap();
    let b = n_fold_sequential_choi(&b1, 2).unwrap();
    let programs: Vec<(&str, SdpProblem)> = vec![
        ("distance_primal", build_distance_primal(&a, &b).unwrap()),
        ("distance_dual", build_distance_dual(&a, &b).unwrap()),
        ("distance_gw", build_distance_gw(&a, &b).unwrap()),
        ("dmin_primal", build_dmin_primal(&a, &b, 0.05).unwrap()),
        ("dmin_dual", build_dmin_dual(&a, &b, 0.05).unwrap()),
        ("dmax_primal", build_dmax_primal(&a, &b, 0.05).unwrap()),
        ("dmax_dual", build_dmax_dual(&a, &b, 0.05).unwrap()),
    ];
    let mut rng = SplitMix64::new(616);
    let mut worst: f64 = 0.0;
    let mut maps = 0usize;
    let mut failures = Vec::new();
    for (pname, p) in &programs {
        for c in &p.constraints {
            for (ti, term) in c.terms.iter().enumerate() {
                maps += 1;
                let v = p.var(&term.var).unwrap();
                for _ in 0..100 {
                    // Random Hermitian input on the variable space (a random
                    // scalar for scalar variables).
                    let x = if v.is_scalar() {
                        qstrat_programs::ir::scalar_operator(rng.next_centered())
                    } else {
                        let mut proto =
                            LabeledOperator::zero(v.systems.clone()).unwrap();
                        proto = random_herm_like(&proto, &mut rng);
                        proto
                    };
                    let fwd = apply_term(term, &x, &c.target).unwrap();
                    // Random Hermitian on the output space.
                    let (lhs, rhs) = match &fwd {
                        TermOutput::Matrix(mat) => {
                            let y = random_herm_like(mat, &mut rng);
                            let lhs = mat.trace_product(&y).re;
                            let adj = apply_term_adjoint(term, v, &y).unwrap();
                            let rhs = match adj {
                                TermOutput::Matrix(am) => am.trace_product(&x).re,
                                TermOutput::Scalar(s) => s * x.at(0, 0).re,
                            };
                            (lhs, rhs)
                        }
                        TermOutput::Scalar(s) => {
                            let yv = rng.next_centered();
                            let y = qstrat_programs::ir::scalar_operator(yv);
                            let lhs = s * yv;
                            let adj = apply_term_adjoint(term, v, &y).unwrap();
                            let rhs = match adj {
                                TermOutput::Matrix(am) => am.trace_product(&x).re,
                                TermOutput::Scalar(sv) => sv * x.at(0, 0).re,
                            };
                            (lhs, rhs)
                        }
                    };
                    let err = (lhs - rhs).abs();
                    worst = worst.max(err);
                    if err > 1e-10 {
                        failures.push(format!(
                            "{pname}/{}/term{}: {err:.3e}",
                            c.label, ti
                        ));
                    }
                }
            }
        }
    }
    let _ = &mut failures;
    let uniq_failures: Vec<&String> = failures.iter().take(5).collect();
    gate.report(
        6,
        failures.is_empty(),
        format!(
            "adjoint identity over {maps} constraint maps x 100 inputs: worst |<Y,F(X)> - <F*(Y),X>| = {worst:.3e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; first failures: {uniq_failures:?}")
            }
        ),
    );
}

fn criterion_7_combs(gate: &mut Gate) {
    let mut failures = Vec::new();
    let mut checked = 0usize;
    let mut verify_ok = |s: &StrategyChoi, what: &str, tol: f64| {
        checked += 1;
        let report = verify_comb(s, tol);
        if !report.pass {
            failures.push(format!("{what}: {:?}", report.levels));
        }
    };
    verify_ok(&identity_choi(2).unwrap(), "identity(2)", 1e-9);
    verify_ok(&identity_choi(3).unwrap(), "identity(3)", 1e-9);
    verify_ok(&basis_preparation_choi(2, 1).unwrap(), "replace(2,1)", 1e-9);
    for (g, n) in [(0.2, 0.3), (0.7, 0.1), (1.0, 0.5)] {
        verify_ok(&gadc(g, n), &format!("gadc({g},{n})"), 1e-9);
    }
    for seed in [3u64, 4] {
        verify_ok(
            &random_channel_choi(2, 2, seed).unwrap(),
            &format!("random({seed})"),
            1e-9,
        );
        verify_ok(
            &random_channel_choi(2, 3, seed).unwrap(),
            &format!("random23({seed})"),
            1e-9,
        );
    }
    for n in [1usize, 2, 3] {
        verify_ok(
            &n_fold_sequential_choi(&gadc(0.3, 0.5), n).unwrap(),
            &format!("sequential({n})"),
            1e-9,
        );
    }
    verify_ok(
        &tensor_power_choi(&gadc(0.25, 0.65), 2).unwrap(),
        "tensor_power(2)",
        1e-9,
    );

    // Exact-cost witness combs on 5 GADC pairs.
    let pairs = [
        ((0.2, 0.2), (0.2, 0.35)),
        ((0.3, 0.1), (0.45, 0.3)),
        ((0.5, 0.5), (0.6, 0.4)),
        ((0.15, 0.6), (0.35, 0.55)),
        ((0.4, 0.25), (0.5, 0.45)),
    ];
    let mut min_neg: f64 = 0.0;
    for (pa, pb) in pairs {
        let a = gadc(pa.0, pa.1);
        let b = gadc(pb.0, pb.1);
        match exact_cost_comb(&a, &b, &plain_opts()) {
            Ok((witness, lambda)) => {
                checked += 1;
                let report = verify_comb(&witness, 1e-7);
                if !report.pass {
                    failures.push(format!(
                        "exact cost comb {pa:?}/{pb:?}: {:?}",
                        report.levels
                    ));
                }
                let below = exact_cost_comb_at(&a, &b, lambda - 1e-3).unwrap();
                let (w, _) = eigh(below.op()).unwrap();
                min_neg = min_neg.min(w[0]);
                if w[0] >= -1e-10 {
                    failures.push(format!(
                        "exact cost {pa:?}/{pb:?}: min eig {:.3e} not negative below lambda",
                        w[0]
                    ));
                }
            }
            Err(e) => failures.push(format!("exact cost {pa:?}/{pb:?}: {e}")),
        }
    }
    gate.report(
        7,
        failures.is_empty(),
        format!(
            "verify_comb on {checked} constructed combs; below-optimal witness dips to {min_neg:.2e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(" | "))
            }
        ),
    );
}

fn criterion_8_monotonicity(gate: &mut Gate) {
    let pairs = [
        ((0.2, 0.2), (0.2, 0.3)),
        ((0.3, 0.4), (0.5, 0.2)),
        ((0.6, 0.1), (0.4, 0.7)),
        ((0.25, 0.55), (0.35, 0.45)),
        ((0.5, 0.3), (0.7, 0.6)),
    ];
    let eps_grid = [0.0, 0.01, 0.05, 0.1, 0.2];
    let mut failures = Vec::new();
    let mut worst_violation: f64 = 0.0;
    for (pa, pb) in pairs {
        let a = gadc(pa.0, pa.1);
        let b = gadc(pb.0, pb.1);
        let mut last_dmin = f64::NEG_INFINITY;
        let mut last_dmax = f64::INFINITY;
        for eps in eps_grid {
            let rmin = evaluate(Quantity::Dmin, &a, &b, eps, Mode::Adaptive, &plain_opts());
            let rmax = evaluate(Quantity::Dmax, &a, &b, eps, Mode::Adaptive, &plain_opts());
            match (rmin, rmax) {
                (Ok(rmin), Ok(rmax)) => {
                    let vio_min = last_dmin - rmin.value;
                    let vio_max = rmax.value - last_dmax;
                    worst_violation = worst_violation.max(vio_min).max(vio_max);
                    if vio_min > 1e-7 {
                        failures.push(format!(
                            "dmin {pa:?}/{pb:?} decreased by {vio_min:.3e} at eps={eps}"
                        ));
                    }
                    if vio_max > 1e-7 {
                        failures.push(format!(
                            "dmax {pa:?}/{pb:?} increased by {vio_max:.3e} at eps={eps}"
                        ));
                    }
                    last_dmin = rmin.value.max(last_dmin);
                    last_dmax = rmax.value.min(last_dmax);
                }
                (a, b) => failures.push(format!(
                    "{pa:?}/{pb:?} eps={eps}: {:?} / {:?}",
                    a.err().map(|e| e.to_string()),
                    b.err().map(|e| e.to_string())
                )),
            }
        }
    }
    gate.report(
        8,
        failures.is_empty(),
        format!(
            "dmin nondecreasing / dmax nonincreasing over eps grid on 5 pairs: worst violation {worst_violation:.3e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    );
}

/// Best fixed-input trace distance over a 10^4-evaluation search: seeded
/// Haar-like samples plus local refinement around the running best.
fn brute_force_distance(a: &StrategyChoi, b: &StrategyChoi, seed: u64) -> f64 {
    let mut rng = SplitMix64::new(seed);
    let mut evals = 0usize;
    let mut best = f64::NEG_INFINITY;
    let mut best_psi: Vec<Complex64> = Vec::new();
    let eval = |psi: &[Complex64], best: &mut f64, best_psi: &mut Vec<Complex64>| {
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
        if dist > *best {
            *best = dist;
            *best_psi = psi.to_vec();
        }
    };
    // Random phase: 7000 Haar samples.
    while evals < 7000 {
        let psi = random_pure_state(4, &mut rng);
        eval(&psi, &mut best, &mut best_psi);
        evals += 1;
    }
    // Local refinement with shrinking radius: 3000 more evaluations.
    let mut radius = 0.5f64;
    while evals < 10_000 {
        for _ in 0..50 {
            if evals >= 10_000 {
                break;
            }
            let mut cand: Vec<Complex64> = best_psi
                .iter()
                .map(|z| {
                    z + Complex64::new(
                        radius * rng.next_gaussian(),
                        radius * rng.next_gaussian(),
                    )
                })
                .collect();
            let norm: f64 = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut cand {
                *z /= norm;
            }
            eval(&cand, &mut best, &mut best_psi);
            evals += 1;
        }
        radius *= 0.82;
    }
    best
}

fn criterion_9_distance_oracle(gate: &mut Gate) {
    let pairs = [
        ((0.2, 0.3), (0.3, 0.3)),
        ((0.2, 0.0), (0.3, 0.0)),
        ((0.4, 0.6), (0.55, 0.4)),
        ((0.1, 0.5), (0.35, 0.5)),
        ((0.6, 0.2), (0.75, 0.25)),
    ];
    let mut failures = Vec::new();
    let mut worst_excess: f64 = 0.0;
    for (k, (pa, pb)) in pairs.into_iter().enumerate() {
        let a = gadc(pa.0, pa.1);
        let b = gadc(pb.0, pb.1);
        let sdp = evaluate(Quantity::Distance, &a, &b, 0.0, Mode::Adaptive, &plain_opts())
            .unwrap()
            .value;
        let lower = brute_force_distance(&a, &b, 9000 + k as u64);
        if sdp < lower - 1e-7 {
            failures.push(format!(
                "{pa:?}/{pb:?}: SDP {sdp:.8} below sampled bound {lower:.8}"
            ));
        }
        let excess = sdp - lower;
        worst_excess = worst_excess.max(excess);
        if excess > 1e-3 {
            failures.push(format!(
                "{pa:?}/{pb:?}: SDP {sdp:.8} exceeds sampled bound {lower:.8} by {excess:.3e}"
            ));
        }
    }
    gate.report(
        9,
        failures.is_empty(),
        format!(
            "n=1 SDP distance within [bound, bound+1e-3] of 10^4-input search on 5 pairs: worst excess {worst_excess:.3e}{}",
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    );
}

fn criterion_10_determinism(gate: &mut Gate, sweeps: &SweepOutputs, dir: &std::path::Path) {
    let mut failures = Vec::new();
    // Re-run the fig4 preset from scratch in a fresh directory.
    let rerun_csv = dir.join("fig4_rerun.csv");
    let cfg = preset("fig4", Some(rerun_csv.to_str().unwrap())).unwrap();
    let _ = run_sweep(&cfg, 2).unwrap();
    let first = std::fs::read(&sweeps.fig4_csv).unwrap();
    let second = std::fs::read(&rerun_csv).unwrap();
    if first != second {
        failures.push("fig4 rerun CSV differs".into());
    }
    // SVGs from both CSVs.
    let svg1 = dir.join("fig4_a.svg");
    let svg2 = dir.join("fig4_b.svg");
    render_plot(&sweeps.fig4_csv, "dmin", &svg1).unwrap();
    render_plot(&rerun_csv, "dmin", &svg2).unwrap();
    if std::fs::read(&svg1).unwrap() != std::fs::read(&svg2).unwrap() {
        failures.push("fig4 SVG differs between reruns".into());
    }
    // Resume on the finished CSV must leave it untouched.
    let before = std::fs::read(&rerun_csv).unwrap();
    let rows = run_sweep(&cfg, 1).unwrap();
    let after = std::fs::read(&rerun_csv).unwrap();
    if before != after {
        failures.push("resume on a complete CSV rewrote bytes".into());
    }
    // Lossless parse/emit roundtrip.
    let text = String::from_utf8(after).unwrap();
    let parsed = parse_rows(&text).unwrap();
    if emit_rows(&parsed) != text {
        failures.push("CSV parse/emit roundtrip not lossless".into());
    }
    if parsed.len() != rows.len() {
        failures.push(format!(
            "row count mismatch: file {} vs runner {}",
            parsed.len(),
            rows.len()
        ));
    }
    gate.report(
        10,
        failures.is_empty(),
        format!(
            "byte-identical rerun of fig4 CSV+SVG, stable resume, lossless roundtrip ({} rows){}",
            parsed.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {}", failures.join(", "))
            }
        ),
    );
}

#[test]
fn acceptance_gate() {
    let mut gate = Gate::new();
    let dir = std::env::temp_dir().join(format!("qstrat_acceptance_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();

    criterion_1_duality(&mut gate);
    let sweeps = run_presets(&dir);
    criterion_2_ordering(&mut gate, &sweeps);
    criterion_3_n1_coincidence(&mut gate);
    criterion_4_closed_forms(&mut gate);
    criterion_5_gw(&mut gate);
    criterion_6_adjoints(&mut gate);
    criterion_7_combs(&mut gate);
    criterion_8_monotonicity(&mut gate);
    criterion_9_distance_oracle(&mut gate);
    criterion_10_determinism(&mut gate, &sweeps, &dir);

    std::fs::remove_dir_all(&dir).ok();
    assert!(
        gate.failures.is_empty(),
        "acceptance failures:\n{}",
        gate.failures.join("\n")
    );
}
