//! Deterministic random matrices for tests across the workspace.

use num_complex::Complex64;

use crate::rng::SplitMix64;
use crate::{LabeledOperator, SystemLabel};

pub fn random_hermitian(name: &str, d: usize, seed: u64) -> LabeledOperator {
    let mut rng = SplitMix64::new(seed);
    let mut op = LabeledOperator::zero(vec![SystemLabel::new(name, d).unwrap()]).unwrap();
    for r in 0..d {
        op.set(r, r, Complex64::new(rng.next_centered(), 0.0));
        for c in r + 1..d {
            let z = Complex64::new(rng.next_centered(), rng.next_centered());
            op.set(r, c, z);
            op.set(c, r, z.conj());
        }
    }
    op
}

pub fn random_real_symmetric(name: &str, d: usize, seed: u64) -> LabeledOperator {
    let mut rng = SplitMix64::new(seed);
    let mut op = LabeledOperator::zero(vec![SystemLabel::new(name, d).unwrap()]).unwrap();
    for r in 0..d {
        op.set(r, r, Complex64::new(rng.next_centered(), 0.0));
        for c in r + 1..d {
            let z = Complex64::new(rng.next_centered(), 0.0);
            op.set(r, c, z);
            op.set(c, r, z);
        }
    }
    op
}

/// Random pure state vector of dimension d, normalized.
pub fn random_pure_state(d: usize, rng: &mut SplitMix64) -> Vec<Complex64> {
    let mut psi: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.next_gaussian(), rng.next_gaussian()))
        .collect();
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut psi {
        *z /= norm;
    }
    psi
}
