//! Symmetric/Hermitian eigendecomposition.
//!
//! The real path is Householder tridiagonalization followed by implicit-shift
//! QL iteration (the classic EISPACK tred2/tql2 pair). Hermitian operators go
//! through the real embedding of [`realify`]: each complex eigenvector u+iv
//! corresponds to real embedding eigenvectors (u; v) and (-v; u), so complex
//! eigenvectors are recovered by greedy orthonormalization inside each
//! eigenvalue cluster.

use num_complex::Complex64;

use crate::real::{realify, RealMat};
use crate::{LabeledOperator, TensorError};

/// Eigendecomposition of a real symmetric matrix: `values` ascending,
/// `vectors` orthogonal with eigenvectors in columns.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: RealMat,
}

/// Eigendecomposition of a real symmetric matrix.
pub fn eigh_real(m: &RealMat) -> Result<SymEig, TensorError> {
    if m.rows != m.cols {
        return Err(TensorError::NumericContract(format!(
            "eigh_real needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let scale = m.max_abs();
    if m.symmetry_defect() > 1e-10 * (1.0 + scale) {
        return Err(TensorError::NumericContract(format!(
            "eigh_real needs a symmetric matrix (defect {:.3e})",
            m.symmetry_defect()
        )));
    }
    let n = m.rows;
    if n == 0 {
        return Ok(SymEig {
            values: Vec::new(),
            vectors: RealMat::zeros(0, 0),
        });
    }
    let mut v = m.clone();
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut v, &mut d, &mut e)?;
    sort_ascending(&mut v, &mut d);
    Ok(SymEig {
        values: d,
        vectors: v,
    })
}

/// Householder reduction to tridiagonal form with accumulation of the
/// orthogonal transform in `v`. On exit `d` holds the diagonal and `e` the
/// subdiagonal (e[0] unused).
fn tridiagonalize(v: &mut RealMat, d: &mut [f64], e: &mut [f64]) {
    let n = v.rows;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v.set(j, i, f);
                let mut g = e[j] + v.at(j, j) * f;
                for k in j + 1..i {
                    g += v.at(k, j) * d[k];
                    e[k] += v.at(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let val = v.at(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }
    // Accumulate transformations.
    for i in 0..n - 1 {
        let tmp = v.at(i, i);
        v.set(n - 1, i, tmp);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.at(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.at(k, i + 1) * v.at(k, j);
                }
                for k in 0..=i {
                    let val = v.at(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal (d, e), accumulating the
/// rotations into the columns of `v`.
fn ql_implicit(v: &mut RealMat, d: &mut [f64], e: &mut [f64]) -> Result<(), TensorError> {
    let n = v.rows;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m -= 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 64 {
                    return Err(TensorError::NumericContract(
                        "QL iteration failed to converge".into(),
                    ));
                }
                // Wilkinson shift.
                let g = d[l];
                let p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                let mut p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    let r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let h = v.at(k, i + 1);
                        let val_i = v.at(k, i);
                        v.set(k, i + 1, s * val_i + c * h);
                        v.set(k, i, c * val_i - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_ascending(v: &mut RealMat, d: &mut [f64]) {
    let n = d.len();
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            for r in 0..n {
                let tmp = v.at(r, i);
                v.set(r, i, v.at(r, k));
                v.set(r, k, tmp);
            }
        }
    }
}

/// Eigendecomposition of a Hermitian labeled operator.
///
/// Returns eigenvalues ascending and a unitary whose columns are the
/// eigenvectors, so `V diag(w) V†` reconstructs the input.
pub fn eigh(h: &LabeledOperator) -> Result<(Vec<f64>, LabeledOperator), TensorError> {
    if !h.is_hermitian(1e-10) {
        return Err(TensorError::NumericContract(format!(
            "eigh needs a Hermitian input (defect {:.3e})",
            h.hermiticity_defect()
        )));
    }
    let d = h.side();
    let emb = realify(h)?;
    let eig = eigh_real(&emb)?;
    let scale = 1.0f64.max(emb.max_abs());

    // Eigenvalues come in near-identical pairs; average each pair.
    let mut values = Vec::with_capacity(d);
    for k in 0..d {
        values.push(0.5 * (eig.values[2 * k] + eig.values[2 * k + 1]));
    }

    // Recover complex eigenvectors cluster by cluster.
    let mut vecs: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    let cluster_tol = 1e-12 * scale;
    let mut start = 0usize;
    while start < 2 * d {
        let mut end = start + 1;
        while end < 2 * d && (eig.values[end] - eig.values[end - 1]).abs() <= cluster_tol {
            end += 1;
        }
        // Candidates: complex vectors u + iv from each real eigenvector (u; v).
        let mut candidates: Vec<Vec<Complex64>> = (start..end)
            .map(|col| {
                (0..d)
                    .map(|r| Complex64::new(eig.vectors.at(r, col), eig.vectors.at(d + r, col)))
                    .collect()
            })
            .collect();
        let want = (end - start) / 2;
        for _ in 0..want {
            // Orthogonalize candidates against accepted vectors, keep the largest.
            let mut best: Option<(f64, usize)> = None;
            for (ci, cand) in candidates.iter().enumerate() {
                let norm2: f64 = cand.iter().map(|z| z.norm_sqr()).sum();
                if best.map(|(b, _)| norm2 > b).unwrap_or(true) {
                    best = Some((norm2, ci));
                }
            }
            let (_, ci) = best.expect("cluster candidates exhausted");
            let mut chosen = candidates.swap_remove(ci);
            let norm: f64 = chosen.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut chosen {
                *z /= norm;
            }
            // Remove the chosen direction from the remaining candidates.
            for cand in &mut candidates {
                let ip: Complex64 = chosen
                    .iter()
                    .zip(cand.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                for (cz, az) in cand.iter_mut().zip(chosen.iter()) {
                    *cz -= ip * az;
                }
            }
            vecs.push(chosen);
        }
        start = end;
    }
    debug_assert_eq!(vecs.len(), d);

    let mut unitary = LabeledOperator::zero(h.systems().to_vec())?;
    for (col, vecv) in vecs.iter().enumerate() {
        for (row, &z) in vecv.iter().enumerate() {
            unitary.set(row, col, z);
        }
    }
    Ok((values, unitary))
}

/// Trace norm (sum of absolute eigenvalues) of a Hermitian operator.
pub fn trace_norm(h: &LabeledOperator) -> Result<f64, TensorError> {
    let (values, _) = eigh(h)?;
    Ok(values.iter().map(|v| v.abs()).sum())
}
