//! Dense f64 kernels for the interior-point method. Row-major storage,
//! single-threaded, fixed summation order.

/// Dot product with eight accumulators so the compiler can keep several
/// FMA chains in flight.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 8];
    let chunks = a.len() / 8;
    for c in 0..chunks {
        let off = c * 8;
        for l in 0..8 {
            acc[l] += a[off + l] * b[off + l];
        }
    }
    let mut tail = 0.0;
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[4]) + (acc[1] + acc[5]) + (acc[2] + acc[6]) + (acc[3] + acc[7]) + tail
}

/// Four simultaneous dot products of one row against four rows, sharing the
/// row-a loads. The backbone of the symmetric rank-k update.
#[inline]
fn dot4(a: &[f64], b0: &[f64], b1: &[f64], b2: &[f64], b3: &[f64]) -> [f64; 4] {
    let len = a.len();
    let mut acc0 = [0.0f64; 8];
    let mut acc1 = [0.0f64; 8];
    let mut acc2 = [0.0f64; 8];
    let mut acc3 = [0.0f64; 8];
    let chunks = len / 8;
    for c in 0..chunks {
        let off = c * 8;
        for l in 0..8 {
            let av = a[off + l];
            acc0[l] += av * b0[off + l];
            acc1[l] += av * b1[off + l];
            acc2[l] += av * b2[off + l];
            acc3[l] += av * b3[off + l];
        }
    }
    let fold = |acc: [f64; 8]| {
        (acc[0] + acc[4]) + (acc[1] + acc[5]) + (acc[2] + acc[6]) + (acc[3] + acc[7])
    };
    let mut out = [fold(acc0), fold(acc1), fold(acc2), fold(acc3)];
    for i in chunks * 8..len {
        let av = a[i];
        out[0] += av * b0[i];
        out[1] += av * b1[i];
        out[2] += av * b2[i];
        out[3] += av * b3[i];
    }
    out
}

/// C (p x r) += A (p x q) * B (q x r), all row-major.
pub fn gemm_acc(c: &mut [f64], a: &[f64], b: &[f64], p: usize, q: usize, r: usize) {
    for i in 0..p {
        let arow = &a[i * q..(i + 1) * q];
        let crow = &mut c[i * r..(i + 1) * r];
        for (k, &aik) in arow.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let brow = &b[k * r..(k + 1) * r];
            for j in 0..r {
                crow[j] += aik * brow[j];
            }
        }
    }
}

/// C (p x r) = A (p x q) * B (q x r).
pub fn gemm(a: &[f64], b: &[f64], p: usize, q: usize, r: usize) -> Vec<f64> {
    let mut c = vec![0.0; p * r];
    gemm_acc(&mut c, a, b, p, q, r);
    c
}

/// Out-of-place transpose of a (p x q) row-major matrix.
pub fn transpose(a: &[f64], p: usize, q: usize) -> Vec<f64> {
    let mut t = vec![0.0; p * q];
    for i in 0..p {
        for j in 0..q {
            t[j * p + i] = a[i * q + j];
        }
    }
    t
}

/// In-place lower Cholesky of a symmetric positive definite matrix; only the
/// lower triangle is referenced and written. Returns the failing pivot index
/// on breakdown.
pub fn chol_in_place(a: &mut [f64], n: usize) -> Result<(), usize> {
    const NB: usize = 96;
    const TI: usize = 64;
    let mut panel_i = vec![0.0f64; TI * NB];
    let mut panel_j = vec![0.0f64; TI * NB];
    let mut k0 = 0;
    while k0 < n {
        let kb = NB.min(n - k0);
        // Factor the diagonal block (trailing updates from earlier panels
        // were applied eagerly, so only columns k0.. matter here).
        for k in k0..k0 + kb {
            let s = dot(&a[k * n + k0..k * n + k], &a[k * n + k0..k * n + k]);
            let d = a[k * n + k] - s;
            if d <= 0.0 || !d.is_finite() {
                return Err(k);
            }
            let d = d.sqrt();
            a[k * n + k] = d;
            let inv = 1.0 / d;
            for r in k + 1..k0 + kb {
                let s = dot_rows(a, n, r, k, k0, k);
                a[r * n + k] = (a[r * n + k] - s) * inv;
            }
        }
        // Triangular solve for the panel below the diagonal block.
        for r in k0 + kb..n {
            for k in k0..k0 + kb {
                let s = dot_rows(a, n, r, k, k0, k);
                a[r * n + k] = (a[r * n + k] - s) / a[k * n + k];
            }
        }
        // Trailing symmetric update A[i, j] -= L_panel[i] . L_panel[j] for
        // start <= j <= i < n, tiled, with panel rows copied out so the dots
        // run over short contiguous slices.
        let start = k0 + kb;
        let mut i0 = start;
        while i0 < n {
            let ib = TI.min(n - i0);
            for t in 0..ib {
                panel_i[t * kb..(t + 1) * kb]
                    .copy_from_slice(&a[(i0 + t) * n + k0..(i0 + t) * n + k0 + kb]);
            }
            let mut j0 = start;
            while j0 < i0 + ib && j0 < n {
                let jb = TI.min(n - j0);
                for t in 0..jb {
                    panel_j[t * kb..(t + 1) * kb]
                        .copy_from_slice(&a[(j0 + t) * n + k0..(j0 + t) * n + k0 + kb]);
                }
                for i in 0..ib {
                    let gi = i0 + i;
                    let row_i = &panel_i[i * kb..(i + 1) * kb];
                    let jmax = (j0 + jb).min(gi + 1);
                    let mut j = j0;
                    while j + 4 <= jmax {
                        let t = j - j0;
                        let s = dot4(
                            row_i,
                            &panel_j[t * kb..(t + 1) * kb],
                            &panel_j[(t + 1) * kb..(t + 2) * kb],
                            &panel_j[(t + 2) * kb..(t + 3) * kb],
                            &panel_j[(t + 3) * kb..(t + 4) * kb],
                        );
                        a[gi * n + j] -= s[0];
                        a[gi * n + j + 1] -= s[1];
                        a[gi * n + j + 2] -= s[2];
                        a[gi * n + j + 3] -= s[3];
                        j += 4;
                    }
                    while j < jmax {
                        let s = dot(row_i, &panel_j[(j - j0) * kb..(j - j0 + 1) * kb]);
                        a[gi * n + j] -= s;
                        j += 1;
                    }
                }
                j0 += TI;
            }
            i0 += TI;
        }
        k0 += kb;
    }
    Ok(())
}

/// Dot of row segments a[r, c0..c1] . a[k, c0..c1] (helper for the panel
/// factorization).
#[inline]
fn dot_rows(a: &[f64], n: usize, r: usize, k: usize, c0: usize, c1: usize) -> f64 {
    dot(&a[r * n + c0..r * n + c1], &a[k * n + c0..k * n + c1])
}

/// Solves L y = rhs in place (forward substitution, lower triangular L).
pub fn solve_lower(l: &[f64], n: usize, rhs: &mut [f64]) {
    for i in 0..n {
        let s = dot(&l[i * n..i * n + i], &rhs[..i]);
        rhs[i] = (rhs[i] - s) / l[i * n + i];
    }
}

/// Solves L^T y = rhs in place (backward substitution).
pub fn solve_lower_t(l: &[f64], n: usize, rhs: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for r in i + 1..n {
            s -= l[r * n + i] * rhs[r];
        }
        rhs[i] = s / l[i * n + i];
    }
}

/// Solves (L L^T) y = rhs in place.
pub fn solve_chol(l: &[f64], n: usize, rhs: &mut [f64]) {
    solve_lower(l, n, rhs);
    solve_lower_t(l, n, rhs);
}

/// Solves L Y = RHS for a dense RHS (n x r), in place, with panel updates so
/// the inner loops run over contiguous RHS rows.
pub fn solve_lower_multi(l: &[f64], n: usize, rhs: &mut [f64], r: usize) {
    const NB: usize = 64;
    let mut k0 = 0;
    while k0 < n {
        let kb = NB.min(n - k0);
        // Solve the diagonal panel rows.
        for i in k0..k0 + kb {
            let (above, below) = rhs.split_at_mut(i * r);
            let xrow = &mut below[..r];
            for k in k0..i {
                let lik = l[i * n + k];
                if lik == 0.0 {
                    continue;
                }
                let yrow = &above[k * r..(k + 1) * r];
                for j in 0..r {
                    xrow[j] -= lik * yrow[j];
                }
            }
            let inv = 1.0 / l[i * n + i];
            for v in xrow.iter_mut() {
                *v *= inv;
            }
        }
        // Update the rows below the panel.
        for i in k0 + kb..n {
            let (solved, rest) = rhs.split_at_mut((k0 + kb) * r);
            let xrow = &mut rest[(i - k0 - kb) * r..(i - k0 - kb + 1) * r];
            for k in k0..k0 + kb {
                let lik = l[i * n + k];
                if lik == 0.0 {
                    continue;
                }
                let yrow = &solved[k * r..(k + 1) * r];
                for j in 0..r {
                    xrow[j] -= lik * yrow[j];
                }
            }
        }
        k0 += kb;
    }
}

/// Solves L^T Y = RHS for a dense RHS (n x r), in place.
pub fn solve_lower_t_multi(l: &[f64], n: usize, rhs: &mut [f64], r: usize) {
    let mut i = n;
    while i > 0 {
        i -= 1;
        let (above, below) = rhs.split_at_mut((i + 1) * r);
        let xrow = &mut above[i * r..(i + 1) * r];
        for k in i + 1..n {
            let lki = l[k * n + i];
            if lki == 0.0 {
                continue;
            }
            let yrow = &below[(k - i - 1) * r..(k - i) * r];
            for j in 0..r {
                xrow[j] -= lki * yrow[j];
            }
        }
        let inv = 1.0 / l[i * n + i];
        for v in xrow.iter_mut() {
            *v *= inv;
        }
    }
}
