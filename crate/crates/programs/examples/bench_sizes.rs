use std::time::Instant;

use qstrat_comb::{gadc_choi, n_fold_sequential_choi, GadcParams};
use qstrat_programs::{evaluate, CrossCheck, EvalOptions, Mode, Quantity};

fn main() {
    let ch_a = gadc_choi(GadcParams { gamma: 0.2, noise: 0.3 }).unwrap();
    let ch_b = gadc_choi(GadcParams { gamma: 0.3, noise: 0.3 }).unwrap();
    let opts = EvalOptions {
        cross_check: CrossCheck::Never,
        ..Default::default()
    };
    for n in [1usize, 2, 3] {
        let a = n_fold_sequential_choi(&ch_a, n).unwrap();
        let b = n_fold_sequential_choi(&ch_b, n).unwrap();
        for (q, eps) in [
            (Quantity::Distance, 0.0),
            (Quantity::Dmin, 0.05),
            (Quantity::Dmax, 0.05),
        ] {
            for mode in [Mode::Adaptive, Mode::Parallel] {
                let t = Instant::now();
                let r = evaluate(q, &a, &b, eps, mode, &opts).unwrap();
                println!(
                    "n={n} {:>8} {:>8}: value {:+.9e}  iters {:>3}  {:?}",
                    q.as_str(),
                    mode.as_str(),
                    r.value,
                    r.solver.iterations,
                    t.elapsed()
                );
            }
        }
    }
}
