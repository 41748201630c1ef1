use qstrat_comb::{gadc_choi, n_fold_sequential_choi, GadcParams};
use qstrat_programs::{evaluate, CrossCheck, EvalOptions, Mode, Quantity};

fn main() {
    let opts = EvalOptions {
        cross_check: CrossCheck::Never,
        ..Default::default()
    };
    println!("== dmin/dmax gaps (n=2), N 0.2 vs 0.3, sweeping common gamma, eps=0.05:");
    for k in 1..=19 {
        let g = k as f64 / 20.0;
        let a = n_fold_sequential_choi(&gadc_choi(GadcParams { gamma: g, noise: 0.2 }).unwrap(), 2).unwrap();
        let b = n_fold_sequential_choi(&gadc_choi(GadcParams { gamma: g, noise: 0.3 }).unwrap(), 2).unwrap();
        for q in [Quantity::Dmin, Quantity::Dmax] {
            let ra = evaluate(q, &a, &b, 0.05, Mode::Adaptive, &opts);
            let rp = evaluate(q, &a, &b, 0.05, Mode::Parallel, &opts);
            match (ra, rp) {
                (Ok(ra), Ok(rp)) => println!(
                    "  g={g:.2} {}: adaptive {:.9}  parallel {:.9}  gap {:+.3e}",
                    q.as_str(), ra.value, rp.value, ra.value - rp.value
                ),
                (a, b) => println!("  g={g:.2} {}: FAILED {:?} / {:?}", q.as_str(), a.err().map(|e| e.to_string()), b.err().map(|e| e.to_string())),
            }
        }
    }
}
