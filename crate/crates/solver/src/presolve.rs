//! Row scaling plus rank-revealing removal of dependent equality rows.
//!
//! Rows that carry a fresh slack coordinate are independent by construction
//! (the slack appears in no other row), so only slack-free rows enter the
//! rank check. Their Gram matrix goes through pivoted Cholesky;
//! a pivot below threshold means the row is numerically dependent on the
//! rows already kept and gets dropped.

use crate::types::{Row, SolverError, StandardSdp};

/// Pivot threshold of the rank-revealing factorization on unit-normalized
/// rows. Exact dependencies land near machine epsilon, independent comb-chain
/// rows keep pivots of order one.
const PIVOT_TOL: f64 = 1e-10;

pub struct Presolved {
    /// Scaled copies of the kept rows.
    pub rows: Vec<Row>,
    /// Scaled right-hand side.
    pub b: Vec<f64>,
    /// Original index of each kept row.
    pub kept: Vec<usize>,
    /// Scale applied to each kept row (row' = scale * row).
    pub scale: Vec<f64>,
    pub dropped: Vec<usize>,
}

/// Inner product of two rows as vectors in the product space. Off-diagonal
/// PSD entries count twice, matching the full matrix Frobenius pairing.
fn row_inner(a: &Row, b: &Row) -> f64 {
    let mut acc = 0.0;
    for (ba, fa) in &a.mat {
        for (bb, fb) in &b.mat {
            if ba != bb {
                continue;
            }
            // Both entry lists are small; quadratic matching is fine here.
            for &(i1, j1, v1) in &fa.entries {
                for &(i2, j2, v2) in &fb.entries {
                    if i1 == i2 && j1 == j2 {
                        acc += if i1 == j1 { v1 * v2 } else { 2.0 * v1 * v2 };
                    }
                }
            }
        }
    }
    for &(i1, v1) in &a.nonneg {
        for &(i2, v2) in &b.nonneg {
            if i1 == i2 {
                acc += v1 * v2;
            }
        }
    }
    for &(i1, v1) in &a.free {
        for &(i2, v2) in &b.free {
            if i1 == i2 {
                acc += v1 * v2;
            }
        }
    }
    acc
}

pub fn presolve(p: &StandardSdp) -> Result<Presolved, SolverError> {
    let m = p.rows.len();
    // Unit-normalize every row first.
    let mut scaled: Vec<Row> = Vec::with_capacity(m);
    let mut b: Vec<f64> = Vec::with_capacity(m);
    let mut scale: Vec<f64> = Vec::with_capacity(m);
    let mut zero_rows: Vec<usize> = Vec::new();
    for (k, row) in p.rows.iter().enumerate() {
        let norm = row_inner(row, row).sqrt();
        if norm <= 0.0 {
            if p.b[k].abs() > 0.0 {
                return Err(SolverError::Build(format!(
                    "row {k} is identically zero with nonzero target {}",
                    p.b[k]
                )));
            }
            zero_rows.push(k);
            scaled.push(row.clone());
            b.push(0.0);
            scale.push(1.0);
            continue;
        }
        let s = 1.0 / norm;
        let mut r = row.clone();
        r.scale(s);
        scaled.push(r);
        b.push(p.b[k] * s);
        scale.push(s);
    }

    // Rank check restricted to slack-free rows.
    let candidates: Vec<usize> = (0..m)
        .filter(|&k| !p.rows[k].carries_slack && !zero_rows.contains(&k))
        .collect();
    let r = candidates.len();
    let mut dropped: Vec<usize> = zero_rows.clone();
    if r > 0 {
        let mut gram = vec![0.0f64; r * r];
        for i in 0..r {
            for j in 0..=i {
                let g = row_inner(&scaled[candidates[i]], &scaled[candidates[j]]);
                gram[i * r + j] = g;
                gram[j * r + i] = g;
            }
        }
        // Pivoted Cholesky; remaining pivots below threshold mark rows that
        // lie in the span of the rows already accepted.
        let mut perm: Vec<usize> = (0..r).collect();
        let mut k = 0usize;
        while k < r {
            let mut best = k;
            for t in k + 1..r {
                if gram[perm[t] * r + perm[t]] > gram[perm[best] * r + perm[best]] {
                    best = t;
                }
            }
            perm.swap(k, best);
            let pk = perm[k];
            let piv = gram[pk * r + pk];
            if piv <= PIVOT_TOL {
                break;
            }
            let inv = 1.0 / piv;
            for ti in k + 1..r {
                let pi = perm[ti];
                let lik = gram[pi * r + pk];
                for tj in k + 1..=ti {
                    let pj = perm[tj];
                    let v = gram[pi * r + pj] - lik * gram[pj * r + pk] * inv;
                    gram[pi * r + pj] = v;
                    gram[pj * r + pi] = v;
                }
            }
            k += 1;
        }
        for t in k..r {
            dropped.push(candidates[perm[t]]);
        }
    }
    dropped.sort_unstable();

    let kept: Vec<usize> = (0..m).filter(|k| !dropped.contains(k)).collect();
    Ok(Presolved {
        rows: kept.iter().map(|&k| scaled[k].clone()).collect(),
        b: kept.iter().map(|&k| b[k]).collect(),
        scale: kept.iter().map(|&k| scale[k]).collect(),
        kept,
        dropped,
    })
}
