//! Nesterov-Todd primal-dual predictor-corrector.

use qstrat_tensor::{eigh_real, RealMat};

use crate::kern;
use crate::presolve::presolve;
use crate::types::{Point, Row, SolveReport, SolveStatus, SolverError, SolverOptions, StandardSdp};

/// Regularization added to the free-variable Schur block.
const FREE_REG: f64 = 1e-10;
/// Iterate blow-up threshold for the divergence heuristic.
const DIVERGENCE: f64 = 1e12;

type KktSolve<'a> = dyn Fn(&[f64], &[f64]) -> (Vec<f64>, Vec<f64>) + 'a;

struct BlockScaling {
    /// NT scaling W = R R^T with W Z W = X.
    w: Vec<f64>,
    r: Vec<f64>,
    r_inv: Vec<f64>,
    /// Scaled point lambda = R^T Z R = R^{-1} X R^{-T}, diagonal.
    lam: Vec<f64>,
    chol_x: Vec<f64>,
    chol_z: Vec<f64>,
    side: usize,
}

fn chol_lower_of(m: &RealMat) -> Result<Vec<f64>, ()> {
    let n = m.rows;
    let mut l = m.data.clone();
    kern::chol_in_place(&mut l, n).map_err(|_| ())?;
    for i in 0..n {
        for j in i + 1..n {
            l[i * n + j] = 0.0;
        }
    }
    Ok(l)
}

fn block_scaling(x: &RealMat, z: &RealMat) -> Result<BlockScaling, ()> {
    let n = x.rows;
    let chol_x = chol_lower_of(x)?;
    let chol_z = chol_lower_of(z)?;
    // M1 = L_x^T Z L_x, eigendecomposed to build the NT factor.
    let zt = kern::gemm(&z.data, &chol_x, n, n, n);
    let lxt = kern::transpose(&chol_x, n, n);
    let m1 = kern::gemm(&lxt, &zt, n, n, n);
    let mut m1m = RealMat {
        rows: n,
        cols: n,
        data: m1,
    };
    // Symmetrize rounding noise before the eig call.
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m1m.data[i * n + j] + m1m.data[j * n + i]);
            m1m.data[i * n + j] = avg;
            m1m.data[j * n + i] = avg;
        }
    }
    let eig = eigh_real(&m1m).map_err(|_| ())?;
    if eig.values.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(());
    }
    let s4: Vec<f64> = eig.values.iter().map(|s| s.powf(0.25)).collect();
    // R = L_x Q diag(1/s4)
    let mut r = kern::gemm(&chol_x, &eig.vectors.data, n, n, n);
    for row in 0..n {
        for col in 0..n {
            r[row * n + col] /= s4[col];
        }
    }
    // R^{-1} = diag(s4) Q^T L_x^{-1} = diag(s4) (L_x^{-T} Q)^T
    let mut w_tmp = eig.vectors.data.clone();
    kern::solve_lower_t_multi(&chol_x, n, &mut w_tmp, n);
    let mut r_inv = kern::transpose(&w_tmp, n, n);
    for row in 0..n {
        for col in 0..n {
            r_inv[row * n + col] *= s4[row];
        }
    }
    let rt = kern::transpose(&r, n, n);
    let w = kern::gemm(&r, &rt, n, n, n);
    let lam: Vec<f64> = eig.values.iter().map(|s| s.sqrt()).collect();
    Ok(BlockScaling {
        w,
        r,
        r_inv,
        lam,
        chol_x,
        chol_z,
        side: n,
    })
}

/// Largest step alpha with X + alpha D staying PSD, given chol(X).
fn max_step(chol_x: &[f64], n: usize, d: &RealMat) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    // G = L^{-1} D L^{-T}; min eigenvalue bounds the step.
    let mut y1 = d.data.clone();
    kern::solve_lower_multi(chol_x, n, &mut y1, n);
    let mut y1t = kern::transpose(&y1, n, n);
    kern::solve_lower_multi(chol_x, n, &mut y1t, n);
    let mut g = RealMat {
        rows: n,
        cols: n,
        data: kern::transpose(&y1t, n, n),
    };
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (g.data[i * n + j] + g.data[j * n + i]);
            g.data[i * n + j] = avg;
            g.data[j * n + i] = avg;
        }
    }
    match eigh_real(&g) {
        Ok(eig) => {
            let lo = eig.values[0];
            if lo >= 0.0 {
                f64::INFINITY
            } else {
                -1.0 / lo
            }
        }
        Err(_) => 0.0,
    }
}

/// W F W for a sparse row coefficient; dense fallback when the coefficient
/// has many entries.
fn w_conjugate(
    f: &crate::types::SparseSym,
    w: &[f64],
    n: usize,
    buf: &mut [f64],
    dense_buf: &mut [f64],
) {
    buf[..n * n].fill(0.0);
    if f.entries.len() * 2 > n {
        // Dense path: T = W F W via two products.
        dense_buf[..n * n].fill(0.0);
        for &(i, j, v) in &f.entries {
            let (i, j) = (i as usize, j as usize);
            dense_buf[i * n + j] += v;
            if i != j {
                dense_buf[j * n + i] += v;
            }
        }
        let t1 = kern::gemm(&dense_buf[..n * n], w, n, n, n);
        let t2 = kern::gemm(w, &t1, n, n, n);
        buf[..n * n].copy_from_slice(&t2);
        return;
    }
    for &(i, j, v) in &f.entries {
        let (i, j) = (i as usize, j as usize);
        let wi = &w[i * n..(i + 1) * n];
        let wj = &w[j * n..(j + 1) * n];
        if i == j {
            for r in 0..n {
                let a = v * wi[r];
                let out = &mut buf[r * n..(r + 1) * n];
                for c in 0..n {
                    out[c] += a * wj[c];
                }
            }
        } else {
            for r in 0..n {
                let a = v * wi[r];
                let b = v * wj[r];
                let out = &mut buf[r * n..(r + 1) * n];
                for c in 0..n {
                    out[c] += a * wj[c] + b * wi[c];
                }
            }
        }
    }
}

struct RowIndex {
    /// For each PSD block: (row index, slot in row.mat).
    by_block: Vec<Vec<(usize, usize)>>,
    /// For each nonneg coordinate: (row index, coefficient).
    by_nonneg: Vec<Vec<(usize, f64)>>,
}

fn index_rows(rows: &[Row], n_blocks: usize, n_nonneg: usize) -> RowIndex {
    let mut by_block = vec![Vec::new(); n_blocks];
    let mut by_nonneg = vec![Vec::new(); n_nonneg];
    for (k, row) in rows.iter().enumerate() {
        for (slot, (bi, _)) in row.mat.iter().enumerate() {
            by_block[*bi].push((k, slot));
        }
        for &(i, v) in &row.nonneg {
            by_nonneg[i].push((k, v));
        }
    }
    RowIndex {
        by_block,
        by_nonneg,
    }
}

/// Solves the lowered standard-form problem.
pub fn solve(p: &StandardSdp, opts: &SolverOptions) -> Result<SolveReport, SolverError> {
    p.validate()?;
    opts.validate()?;
    let trace = opts.trace || std::env::var("QSTRAT_SOLVER_TRACE").as_deref() == Ok("1");

    let nu = p.cone_degree();
    if nu == 0 {
        return trivial_no_cone(p);
    }

    let pre = presolve(p)?;
    if trace && !pre.dropped.is_empty() {
        eprintln!("presolve: dropped {} dependent rows", pre.dropped.len());
    }
    let rows = &pre.rows;
    let b = &pre.b;
    let m = rows.len();
    let n_blocks = p.psd_sides.len();
    let idx = index_rows(rows, n_blocks, p.nonneg);

    // Dense free-column matrix (constant across iterations).
    let f_dim = p.free;
    let mut a_free = vec![0.0f64; m * f_dim];
    for (k, row) in rows.iter().enumerate() {
        for &(i, v) in &row.free {
            a_free[k * f_dim + i] = v;
        }
    }

    // Initialization: identity-scaled cone point (spec'd cold start).
    let b_inf = p.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let c_inf = p.cost.max_abs();
    let tau_p = 1.0 + b_inf;
    let tau_d = 1.0 + c_inf;
    let mut x = Point::cone_identity(&p.psd_sides, p.nonneg, p.free, tau_p);
    let mut z = Point::cone_identity(&p.psd_sides, p.nonneg, p.free, tau_d);
    let mut y = vec![0.0f64; m]; // multipliers of the scaled rows
    let x0_inf = x.max_abs();

    let report = |status: SolveStatus, x: &Point, y: &[f64], z: &Point, iters: usize, mus: &[f64]| {
        finish(p, &pre, status, x, y, z, iters, mus)
    };

    let mut stall_count = 0usize;
    let mut iterations = 0usize;
    let mut schur = vec![0.0f64; m * m];
    let mut mu_history: Vec<f64> = Vec::new();
    // Best iterate so far by worst-of relative metrics; late iterations can
    // regress when the Schur system degenerates, so failures return this.
    let mut best: Option<(f64, Point, Vec<f64>, Point, usize)> = None;

    for iter in 0..opts.max_iters {
        iterations = iter;
        // Residuals in the scaled row system.
        let ax = apply_rows(rows, &x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bk, axk)| bk - axk).collect();
        let aty = adjoint_rows(rows, &y, p);
        let mut rd = p.cost.clone();
        rd.axpy(-1.0, &aty);
        // Cone coordinates subtract z; free coordinates have no z.
        for (rb, zb) in rd.mats.iter_mut().zip(&z.mats) {
            for (a, b) in rb.data.iter_mut().zip(&zb.data) {
                *a -= b;
            }
        }
        for (a, b) in rd.nonneg.iter_mut().zip(&z.nonneg) {
            *a -= b;
        }

        // Original-problem quantities for termination and reporting.
        let pobj = p.cost.dot(&x);
        let dobj: f64 = pre
            .kept
            .iter()
            .zip(y.iter())
            .zip(pre.scale.iter())
            .map(|((&ko, yk), sk)| p.b[ko] * yk * sk)
            .sum();
        let gap = (pobj - dobj).abs();
        let rp_orig = primal_residual_original(p, &x);
        let rd_rel = point_inf(&rd) / (1.0 + c_inf);
        let mu = x.dot_cone(&z) / nu as f64;
        mu_history.push(mu);

        if gap <= opts.gap_tol * (1.0 + pobj.abs())
            && rp_orig <= opts.feas_tol
            && rd_rel <= opts.feas_tol
        {
            return Ok(report(SolveStatus::Optimal, &x, &y, &z, iter, &mu_history));
        }
        let merit = (gap / (1.0 + pobj.abs())).max(rp_orig).max(rd_rel);
        if best.as_ref().map(|(bm, ..)| merit < *bm).unwrap_or(true) {
            best = Some((merit, x.clone(), y.clone(), z.clone(), iter));
        }
        if x.max_abs() > DIVERGENCE * (1.0 + x0_inf) || pobj.abs() > 1e14 {
            return Ok(report(SolveStatus::InfeasibleCertificate, &x, &y, &z, iter, &mu_history));
        }
        // Unbounded dual objective certifies primal infeasibility.
        if dobj.abs() > 1e13 * (1.0 + b_inf) {
            return Ok(report(SolveStatus::InfeasibleCertificate, &x, &y, &z, iter, &mu_history));
        }

        // NT scalings per cone block.
        let mut scalings: Vec<BlockScaling> = Vec::with_capacity(n_blocks);
        let mut scaling_failed = false;
        for (xb, zb) in x.mats.iter().zip(&z.mats) {
            match block_scaling(xb, zb) {
                Ok(s) => scalings.push(s),
                Err(()) => {
                    scaling_failed = true;
                    break;
                }
            }
        }
        if scaling_failed {
            return Ok(finish_best(p, &pre, opts, best, &x, &y, &z, iter, &mu_history));
        }
        let w_nn: Vec<f64> = x
            .nonneg
            .iter()
            .zip(&z.nonneg)
            .map(|(&xv, &zv)| (xv / zv).sqrt())
            .collect();

        // Schur complement M = A W^2 A^T over cone coordinates.
        assemble_schur(&mut schur, rows, &idx, &scalings, &w_nn, m);
        let diag_scale: f64 = {
            let mut s = 0.0f64;
            for i in 0..m {
                s = s.max(schur[i * m + i].abs());
            }
            s.max(1.0)
        };
        let mut chol_m = schur.clone();
        let mut reg = 0.0f64;
        loop {
            match kern::chol_in_place(&mut chol_m, m) {
                Ok(()) => break,
                Err(_) => {
                    reg = if reg == 0.0 { 1e-13 * diag_scale } else { reg * 100.0 };
                    if reg > 1e-4 * diag_scale {
                        return Ok(finish_best(p, &pre, opts, best, &x, &y, &z, iter, &mu_history));
                    }
                    chol_m.copy_from_slice(&schur);
                    for i in 0..m {
                        chol_m[i * m + i] += reg;
                    }
                }
            }
        }
        for i in 0..m {
            for j in i + 1..m {
                chol_m[i * m + j] = 0.0;
            }
        }

        // Free-variable elimination: S_f = A_f^T M^{-1} A_f + delta I.
        let mut u = a_free.clone();
        let mut chol_sf = Vec::new();
        if f_dim > 0 {
            kern::solve_lower_multi(&chol_m, m, &mut u, f_dim);
            kern::solve_lower_t_multi(&chol_m, m, &mut u, f_dim);
            let aft = kern::transpose(&a_free, m, f_dim);
            let mut sf = kern::gemm(&aft, &u, f_dim, m, f_dim);
            for i in 0..f_dim {
                sf[i * f_dim + i] += FREE_REG;
            }
            chol_sf = sf;
            if kern::chol_in_place(&mut chol_sf, f_dim).is_err() {
                return Ok(report(SolveStatus::NumericalFailure, &x, &y, &z, iter, &mu_history));
            }
            for i in 0..f_dim {
                for j in i + 1..f_dim {
                    chol_sf[i * f_dim + j] = 0.0;
                }
            }
        }

        let solve_kkt = |r1: &[f64], r2: &[f64]| -> (Vec<f64>, Vec<f64>) {
            // Iterative refinement against the true KKT system
            // (regularization enters only through the factorization).
            // Guarded: keep the iterate with the smallest residual and stop
            // as soon as refinement stops helping.
            let mut dy = vec![0.0; m];
            let mut dxf = vec![0.0; f_dim];
            let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
            for pass in 0..4 {
                let mut res1 = r1.to_vec();
                let mut res2 = r2.to_vec();
                if pass > 0 {
                    let mdy = sym_apply(&schur, m, &dy);
                    for k in 0..m {
                        res1[k] -= mdy[k];
                        res1[k] -= kern::dot(&a_free[k * f_dim..(k + 1) * f_dim], &dxf);
                    }
                    for i in 0..f_dim {
                        let mut s = 0.0;
                        for k in 0..m {
                            s += a_free[k * f_dim + i] * dy[k];
                        }
                        res2[i] -= s - FREE_REG * dxf[i];
                    }
                    let res_norm = res1
                        .iter()
                        .chain(res2.iter())
                        .fold(0.0f64, |acc, v| acc.max(v.abs()));
                    match &best {
                        Some((bn, ..)) if res_norm >= *bn => break,
                        _ => best = Some((res_norm, dy.clone(), dxf.clone())),
                    }
                }
                let (ddy, ddxf) = solve_kkt_once(
                    &chol_m, &chol_sf, &u, &a_free, m, f_dim, &res1, &res2,
                );
                for k in 0..m {
                    dy[k] += ddy[k];
                }
                for i in 0..f_dim {
                    dxf[i] += ddxf[i];
                }
            }
            if let Some((bn, bdy, bdxf)) = best {
                // Final candidate loses only if its residual is worse.
                let mut res1 = r1.to_vec();
                let mut res2 = r2.to_vec();
                let mdy = sym_apply(&schur, m, &dy);
                for k in 0..m {
                    res1[k] -= mdy[k];
                    res1[k] -= kern::dot(&a_free[k * f_dim..(k + 1) * f_dim], &dxf);
                }
                for i in 0..f_dim {
                    let mut s = 0.0;
                    for k in 0..m {
                        s += a_free[k * f_dim + i] * dy[k];
                    }
                    res2[i] -= s - FREE_REG * dxf[i];
                }
                let final_norm = res1
                    .iter()
                    .chain(res2.iter())
                    .fold(0.0f64, |acc, v| acc.max(v.abs()));
                if final_norm > bn {
                    return (bdy, bdxf);
                }
            }
            (dy, dxf)
        };

        // Predictor (affine direction): E = -X.
        let e_aff = {
            let mut e = x.clone();
            for mat in &mut e.mats {
                for v in &mut mat.data {
                    *v = -*v;
                }
            }
            for v in &mut e.nonneg {
                *v = -*v;
            }
            e.free.iter_mut().for_each(|v| *v = 0.0);
            e
        };
        let (dx_aff, dy_aff, dz_aff) = newton_direction_refined(
            rows, p, &scalings, &w_nn, &rp, &rd, &e_aff, &solve_kkt,
        );
        let _ = dy_aff;

        let (ap_aff, ad_aff) = step_lengths(&x, &z, &dx_aff, &dz_aff, &scalings, 1.0);
        let mut x_try = x.clone();
        x_try.axpy(ap_aff.min(1.0), &dx_aff);
        let mut z_try = z.clone();
        z_try.axpy(ad_aff.min(1.0), &dz_aff);
        let mu_aff = x_try.dot_cone(&z_try) / nu as f64;
        let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

        // Corrector: E = R Linv(sigma mu I - sym(dXs dZs)) R^T - X per block.
        let mut e_corr = Point::zeros(&p.psd_sides, p.nonneg, p.free);
        for (bi, scal) in scalings.iter().enumerate() {
            let n = scal.side;
            let dxs = conj_apply(&scal.r_inv, &dx_aff.mats[bi].data, n);
            let rt = kern::transpose(&scal.r, n, n);
            let dzs = {
                // R^T dZ R
                let t1 = kern::gemm(&dz_aff.mats[bi].data, &scal.r, n, n, n);
                kern::gemm(&rt, &t1, n, n, n)
            };
            let prod1 = kern::gemm(&dxs, &dzs, n, n, n);
            let mut g = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] = -0.5 * (prod1[i * n + j] + prod1[j * n + i]);
                }
            }
            for i in 0..n {
                g[i * n + i] += sigma * mu;
            }
            // K = Linv_lambda(G), entrywise 2 G_ij / (lam_i + lam_j).
            for i in 0..n {
                for j in 0..n {
                    g[i * n + j] *= 2.0 / (scal.lam[i] + scal.lam[j]);
                }
            }
            // E = R K R^T - X
            let t1 = kern::gemm(&g, &rt, n, n, n);
            let mut e = kern::gemm(&scal.r, &t1, n, n, n);
            for (ev, xv) in e.iter_mut().zip(&x.mats[bi].data) {
                *ev -= xv;
            }
            // Symmetrize.
            for i in 0..n {
                for j in 0..i {
                    let avg = 0.5 * (e[i * n + j] + e[j * n + i]);
                    e[i * n + j] = avg;
                    e[j * n + i] = avg;
                }
            }
            e_corr.mats[bi].data.copy_from_slice(&e);
        }
        for i in 0..p.nonneg {
            e_corr.nonneg[i] =
                (sigma * mu - dx_aff.nonneg[i] * dz_aff.nonneg[i]) / z.nonneg[i] - x.nonneg[i];
        }

        let (dx, dy, dz) = newton_direction_refined(
            rows, p, &scalings, &w_nn, &rp, &rd, &e_corr, &solve_kkt,
        );

        let (ap, ad) = step_lengths(&x, &z, &dx, &dz, &scalings, opts.step_fraction);
        let ap = ap.min(1.0);
        let ad = ad.min(1.0);
        if trace {
            eprintln!(
                "iter {iter}: mu={mu:.3e} gap={gap:.3e} rp={rp_orig:.3e} rd={rd_rel:.3e} pobj={pobj:.9e} dobj={dobj:.9e} sigma={sigma:.3e} ap={ap:.3e} ad={ad:.3e}"
            );
        }

        x.axpy(ap, &dx);
        for (k, dyk) in dy.iter().enumerate() {
            y[k] += ad * dyk;
        }
        z.axpy(ad, &dz);

        if ap < 1e-8 && ad < 1e-8 {
            stall_count += 1;
            if stall_count >= 3 {
                return Ok(finish_best(p, &pre, opts, best, &x, &y, &z, iter + 1, &mu_history));
            }
        } else {
            stall_count = 0;
        }
    }

    let mut out = finish_best(p, &pre, opts, best, &x, &y, &z, iterations + 1, &mu_history);
    if out.status == SolveStatus::NumericalFailure {
        out.status = SolveStatus::MaxIters;
    }
    Ok(out)
}

/// A(x) over a row list.
fn apply_rows(rows: &[Row], x: &Point) -> Vec<f64> {
    rows.iter()
        .map(|row| {
            let mut acc = 0.0;
            for (bi, f) in &row.mat {
                acc += f.dot(&x.mats[*bi]);
            }
            for &(i, v) in &row.nonneg {
                acc += v * x.nonneg[i];
            }
            for &(i, v) in &row.free {
                acc += v * x.free[i];
            }
            acc
        })
        .collect()
}

/// adjoint(y) over a row list.
fn adjoint_rows(rows: &[Row], y: &[f64], p: &StandardSdp) -> Point {
    let mut out = Point::zeros(&p.psd_sides, p.nonneg, p.free);
    for (row, &yk) in rows.iter().zip(y) {
        if yk == 0.0 {
            continue;
        }
        for (bi, f) in &row.mat {
            f.scatter(yk, &mut out.mats[*bi]);
        }
        for &(i, v) in &row.nonneg {
            out.nonneg[i] += yk * v;
        }
        for &(i, v) in &row.free {
            out.free[i] += yk * v;
        }
    }
    out
}

fn point_inf(p: &Point) -> f64 {
    p.max_abs()
}

/// ||b - A(x)||_inf / (1 + ||b||_inf) against the original rows.
fn primal_residual_original(p: &StandardSdp, x: &Point) -> f64 {
    let ax = p.apply(x);
    let mut worst = 0.0f64;
    for (bk, axk) in p.b.iter().zip(&ax) {
        worst = worst.max((bk - axk).abs());
    }
    let b_inf = p.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    worst / (1.0 + b_inf)
}

/// Conjugation helper: B X B^T for row-major square matrices.
fn conj_apply(b: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    let t1 = kern::gemm(x, &kern::transpose(b, n, n), n, n, n);
    kern::gemm(b, &t1, n, n, n)
}

/// Symmetric matrix-vector product where only the lower triangle of `s` is
/// meaningful (the upper mirror is still stored, so a plain product works).
fn sym_apply(s: &[f64], m: usize, v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for i in 0..m {
        out[i] = kern::dot(&s[i * m..(i + 1) * m], v);
    }
    out
}

fn assemble_schur(
    schur: &mut [f64],
    rows: &[Row],
    idx: &RowIndex,
    scalings: &[BlockScaling],
    w_nn: &[f64],
    m: usize,
) {
    schur[..m * m].fill(0.0);
    let max_side = scalings.iter().map(|s| s.side).max().unwrap_or(0);
    let mut buf = vec![0.0f64; max_side * max_side];
    let mut dense_buf = vec![0.0f64; max_side * max_side];
    for (bi, scal) in scalings.iter().enumerate() {
        let n = scal.side;
        let touching = &idx.by_block[bi];
        for (pos, &(k, slot_k)) in touching.iter().enumerate() {
            let fk = &rows[k].mat[slot_k].1;
            w_conjugate(fk, &scal.w, n, &mut buf, &mut dense_buf);
            let t = RealMat {
                rows: n,
                cols: n,
                data: buf[..n * n].to_vec(),
            };
            for &(l, slot_l) in touching.iter().take(pos + 1) {
                let fl = &rows[l].mat[slot_l].1;
                let v = fl.dot(&t);
                if l <= k {
                    schur[k * m + l] += v;
                } else {
                    schur[l * m + k] += v;
                }
            }
        }
    }
    for (i, wi) in w_nn.iter().enumerate() {
        let w2 = wi * wi;
        let touching = &idx.by_nonneg[i];
        for (pos, &(k, fk)) in touching.iter().enumerate() {
            for &(l, fl) in touching.iter().take(pos + 1) {
                let v = w2 * fk * fl;
                if l <= k {
                    schur[k * m + l] += v;
                } else {
                    schur[l * m + k] += v;
                }
            }
        }
    }
    // Mirror to the upper triangle so dense products work.
    for i in 0..m {
        for j in 0..i {
            schur[j * m + i] = schur[i * m + j];
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn solve_kkt_once(
    chol_m: &[f64],
    chol_sf: &[f64],
    u: &[f64],
    a_free: &[f64],
    m: usize,
    f_dim: usize,
    r1: &[f64],
    r2: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let mut minv_r1 = r1.to_vec();
    kern::solve_chol(chol_m, m, &mut minv_r1);
    if f_dim == 0 {
        return (minv_r1, Vec::new());
    }
    // dxf = Sf^{-1} (U^T r1 - r2)
    let mut rhs_f = vec![0.0; f_dim];
    for i in 0..f_dim {
        let mut s = 0.0;
        for k in 0..m {
            s += u[k * f_dim + i] * r1[k];
        }
        rhs_f[i] = s - r2[i];
    }
    kern::solve_chol(chol_sf, f_dim, &mut rhs_f);
    // dy = M^{-1}(r1 - A_f dxf)
    let mut r1b = r1.to_vec();
    for k in 0..m {
        r1b[k] -= kern::dot(&a_free[k * f_dim..(k + 1) * f_dim], &rhs_f);
    }
    kern::solve_chol(chol_m, m, &mut r1b);
    (r1b, rhs_f)
}

/// Computes the Newton direction for a given complementarity target E:
///   A dx = rp,  adjoint(dy) + dz = rd,  dx = E - W dz W (cone coords).
///
/// One pass solves the Schur system; because the assembled Schur matrix
/// differs from the exact operator by rounding amplified by the scaling
/// magnitudes, the wrapper below re-measures the true equation residuals of
/// the computed direction and solves corrections with the same
/// factorization until they stop improving.
#[allow(clippy::too_many_arguments)]
fn newton_direction_refined(
    rows: &[Row],
    p: &StandardSdp,
    scalings: &[BlockScaling],
    w_nn: &[f64],
    rp: &[f64],
    rd: &Point,
    e: &Point,
    solve_kkt: &KktSolve,
) -> (Point, Vec<f64>, Point) {
    let (mut dx, mut dy, mut dz) =
        newton_direction(rows, p, scalings, w_nn, rp, rd, e, solve_kkt);
    let residuals = |dx: &Point, dy: &[f64]| -> (Vec<f64>, Vec<f64>, f64) {
        // Primal rows and the free part of the dual equation; the cone dual
        // equation and the complementarity relation hold by construction.
        let adx = apply_rows(rows, dx);
        let e1: Vec<f64> = rp.iter().zip(&adx).map(|(r, a)| r - a).collect();
        let aty = adjoint_rows(rows, dy, p);
        let e2f: Vec<f64> = rd
            .free
            .iter()
            .zip(&aty.free)
            .map(|(r, a)| r - a)
            .collect();
        let norm = e1
            .iter()
            .chain(e2f.iter())
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        (e1, e2f, norm)
    };
    let (mut e1, mut e2f, mut norm) = residuals(&dx, &dy);
    let zero_e = Point::zeros(&p.psd_sides, p.nonneg, p.free);
    for _ in 0..2 {
        let rp_scale = rp.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if norm <= 1e-13 * rp_scale {
            break;
        }
        let mut rd_corr = Point::zeros(&p.psd_sides, p.nonneg, p.free);
        rd_corr.free.copy_from_slice(&e2f);
        let (cx, cy, cz) =
            newton_direction(rows, p, scalings, w_nn, &e1, &rd_corr, &zero_e, solve_kkt);
        let mut tx = dx.clone();
        tx.axpy(1.0, &cx);
        let ty: Vec<f64> = dy.iter().zip(&cy).map(|(a, b)| a + b).collect();
        let (n1, n2, nn) = residuals(&tx, &ty);
        if nn >= norm {
            break;
        }
        dx = tx;
        dy = ty;
        dz.axpy(1.0, &cz);
        e1 = n1;
        e2f = n2;
        norm = nn;
    }
    (dx, dy, dz)
}

#[allow(clippy::too_many_arguments)]
fn newton_direction(
    rows: &[Row],
    p: &StandardSdp,
    scalings: &[BlockScaling],
    w_nn: &[f64],
    rp: &[f64],
    rd: &Point,
    e: &Point,
    solve_kkt: &KktSolve,
) -> (Point, Vec<f64>, Point) {
    let m = rows.len();
    // H = E - W rd W on cone coordinates.
    let mut h = e.clone();
    for (bi, scal) in scalings.iter().enumerate() {
        let n = scal.side;
        let wrdw = conj_apply(&scal.w, &rd.mats[bi].data, n);
        for (hv, val) in h.mats[bi].data.iter_mut().zip(&wrdw) {
            *hv -= val;
        }
    }
    for i in 0..p.nonneg {
        h.nonneg[i] -= w_nn[i] * w_nn[i] * rd.nonneg[i];
    }
    // r1 = rp - A(H) over cone coordinates (H.free is zero).
    let ah = apply_rows(rows, &h);
    let r1: Vec<f64> = rp.iter().zip(&ah).map(|(a, b)| a - b).collect();
    let r2 = rd.free.clone();

    let (dy, dxf) = solve_kkt(&r1, &r2);

    // dz = rd - adjoint(dy) on cone coordinates.
    let aty = adjoint_rows(rows, &dy, p);
    let mut dz = Point::zeros(&p.psd_sides, p.nonneg, p.free);
    for bi in 0..p.psd_sides.len() {
        for (dzv, (rdv, atv)) in dz.mats[bi]
            .data
            .iter_mut()
            .zip(rd.mats[bi].data.iter().zip(&aty.mats[bi].data))
        {
            *dzv = rdv - atv;
        }
    }
    for i in 0..p.nonneg {
        dz.nonneg[i] = rd.nonneg[i] - aty.nonneg[i];
    }

    // dx = E - W dz W on cone coordinates; free part from the KKT solve.
    let mut dx = Point::zeros(&p.psd_sides, p.nonneg, p.free);
    for (bi, scal) in scalings.iter().enumerate() {
        let n = scal.side;
        let wdzw = conj_apply(&scal.w, &dz.mats[bi].data, n);
        for (dxv, (ev, wv)) in dx.mats[bi]
            .data
            .iter_mut()
            .zip(e.mats[bi].data.iter().zip(&wdzw))
        {
            *dxv = ev - wv;
        }
        // Symmetrize rounding noise.
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (dx.mats[bi].data[i * n + j] + dx.mats[bi].data[j * n + i]);
                dx.mats[bi].data[i * n + j] = avg;
                dx.mats[bi].data[j * n + i] = avg;
            }
        }
    }
    for i in 0..p.nonneg {
        dx.nonneg[i] = e.nonneg[i] - w_nn[i] * w_nn[i] * dz.nonneg[i];
    }
    dx.free.copy_from_slice(&dxf);
    let _ = m;
    (dx, dy, dz)
}

/// Fraction-to-boundary step sizes for the primal and dual cone variables.
fn step_lengths(
    x: &Point,
    z: &Point,
    dx: &Point,
    dz: &Point,
    scalings: &[BlockScaling],
    fraction: f64,
) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (bi, scal) in scalings.iter().enumerate() {
        ap = ap.min(max_step(&scal.chol_x, scal.side, &dx.mats[bi]));
        ad = ad.min(max_step(&scal.chol_z, scal.side, &dz.mats[bi]));
    }
    for i in 0..x.nonneg.len() {
        if dx.nonneg[i] < 0.0 {
            ap = ap.min(-x.nonneg[i] / dx.nonneg[i]);
        }
        if dz.nonneg[i] < 0.0 {
            ad = ad.min(-z.nonneg[i] / dz.nonneg[i]);
        }
    }
    (fraction * ap, fraction * ad)
}

/// Final report against the original (unscaled, full) problem.
#[allow(clippy::too_many_arguments)]
fn finish(
    p: &StandardSdp,
    pre: &crate::presolve::Presolved,
    status: SolveStatus,
    x: &Point,
    y_scaled: &[f64],
    z: &Point,
    iterations: usize,
    mus: &[f64],
) -> SolveReport {
    // Map the multipliers of scaled kept rows back to the original rows;
    // dropped rows keep multiplier zero.
    let mut y = vec![0.0f64; p.rows.len()];
    for ((&ko, yk), sk) in pre.kept.iter().zip(y_scaled).zip(&pre.scale) {
        y[ko] = yk * sk;
    }
    let pobj = p.cost.dot(x);
    let dobj = kern::dot(&p.b, &y);
    let gap = (pobj - dobj).abs();
    let rp = primal_residual_original(p, x);
    let aty = p.apply_adjoint(&y);
    let mut rd = p.cost.clone();
    rd.axpy(-1.0, &aty);
    for (rb, zb) in rd.mats.iter_mut().zip(&z.mats) {
        for (a, b) in rb.data.iter_mut().zip(&zb.data) {
            *a -= b;
        }
    }
    for (a, b) in rd.nonneg.iter_mut().zip(&z.nonneg) {
        *a -= b;
    }
    let c_inf = p.cost.max_abs();
    let rd_rel = point_inf(&rd) / (1.0 + c_inf);
    SolveReport {
        status,
        primal_value: pobj,
        dual_value: dobj,
        gap,
        primal_residual: rp,
        dual_residual: rd_rel,
        iterations,
        x: x.clone(),
        y,
        z: z.clone(),
        mu_history: mus.to_vec(),
    }
}

/// Returns the best recorded iterate; upgrades to Optimal when it meets the
/// tolerances, otherwise reports a numerical failure with that iterate.
#[allow(clippy::too_many_arguments)]
fn finish_best(
    p: &StandardSdp,
    pre: &crate::presolve::Presolved,
    opts: &SolverOptions,
    best: Option<(f64, Point, Vec<f64>, Point, usize)>,
    x: &Point,
    y: &[f64],
    z: &Point,
    iterations: usize,
    mus: &[f64],
) -> SolveReport {
    if let Some((_, bx, by, bz, _biter)) = best {
        let rep = finish(p, pre, SolveStatus::NumericalFailure, &bx, &by, &bz, iterations, mus);
        let ok = rep.gap <= opts.gap_tol * (1.0 + rep.primal_value.abs())
            && rep.primal_residual <= opts.feas_tol
            && rep.dual_residual <= opts.feas_tol;
        if ok {
            return SolveReport {
                status: SolveStatus::Optimal,
                ..rep
            };
        }
        return rep;
    }
    finish(p, pre, SolveStatus::NumericalFailure, x, y, z, iterations, mus)
}

/// Degenerate instance with no cone coordinates at all.
fn trivial_no_cone(p: &StandardSdp) -> Result<SolveReport, SolverError> {
    if !p.rows.is_empty() {
        return Err(SolverError::Build(
            "constraints present but no cone coordinates".into(),
        ));
    }
    if p.cost.free.iter().any(|&c| c != 0.0) {
        return Err(SolverError::Build(
            "unbounded free objective with no constraints".into(),
        ));
    }
    let x = Point::zeros(&p.psd_sides, p.nonneg, p.free);
    Ok(SolveReport {
        status: SolveStatus::Optimal,
        primal_value: 0.0,
        dual_value: 0.0,
        gap: 0.0,
        primal_residual: 0.0,
        dual_residual: 0.0,
        iterations: 0,
        x: x.clone(),
        y: Vec::new(),
        z: x,
        mu_history: Vec::new(),
    })
}
