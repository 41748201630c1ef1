//! Lowering from the structured problem to solver standard form.
//!
//! Hermitian blocks embed as real symmetric blocks: when every kernel in the
//! problem is exactly real, a Hermitian optimum can be taken real symmetric
//! (conjugation symmetry), so blocks keep their side; otherwise each side-d
//! block becomes the side-2d real embedding, with a factor-1/2 on
//! coefficients because <realify(A), realify(B)> = 2 Tr[A B]. Inequalities
//! gain PSD or orthant slacks; Hermitian-free variables become free scalar
//! coordinates in an svec layout. Both directions preserve the optimum.

use std::collections::BTreeMap;

use num_complex::Complex64;
use qstrat_solver::{Point, Row, SparseSym, StandardSdp};
use qstrat_tensor::LabeledOperator;

use crate::ir::{Constraint, ObjCoeff, Rel, SdpProblem, Sense, Target, Term, TermMap, VarBlock, VarCone};
use crate::ProgramError;

const SQRT2: f64 = std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarLoc {
    Psd { block: usize },
    FreeHerm { start: usize, side: usize },
    Nonneg { index: usize },
    Free { index: usize },
}

#[derive(Debug, Clone)]
pub struct Lowered {
    pub sdp: StandardSdp,
    /// Problem optimum = sign * lowered optimum.
    pub sign: f64,
    /// Real-symmetric fast path in effect (no doubling).
    pub real_path: bool,
    pub var_locs: Vec<(String, VarLoc)>,
}

impl Lowered {
    pub fn loc(&self, name: &str) -> Option<VarLoc> {
        self.var_locs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, l)| *l)
    }

    /// Reads a named Hermitian variable out of a solution point.
    pub fn extract_var(
        &self,
        p: &SdpProblem,
        x: &Point,
        name: &str,
    ) -> Result<LabeledOperator, ProgramError> {
        let v = p.var(name)?;
        let d = v.side();
        let loc = self
            .loc(name)
            .ok_or_else(|| ProgramError::Build(format!("variable '{name}' not lowered")))?;
        let mut out = if v.systems.is_empty() {
            LabeledOperator::scalar(Complex64::new(0.0, 0.0))
        } else {
            LabeledOperator::zero(v.systems.clone())?
        };
        match loc {
            VarLoc::Psd { block } => {
                let m = &x.mats[block];
                if self.real_path {
                    for r in 0..d {
                        for c in 0..d {
                            out.set(r, c, Complex64::new(m.at(r, c), 0.0));
                        }
                    }
                } else {
                    // Project onto the realified subspace and read out the
                    // Hermitian matrix.
                    for r in 0..d {
                        for c in 0..d {
                            let re = 0.5 * (m.at(r, c) + m.at(d + r, d + c));
                            let im = 0.5 * (m.at(d + r, c) - m.at(r, d + c));
                            out.set(r, c, Complex64::new(re, im));
                        }
                    }
                }
            }
            VarLoc::FreeHerm { start, .. } => {
                let coords = &x.free[start..];
                let mut k = 0usize;
                for r in 0..d {
                    out.set(r, r, Complex64::new(coords[k], 0.0));
                    k += 1;
                }
                for r in 0..d {
                    for c in r + 1..d {
                        let re = coords[k] / SQRT2;
                        k += 1;
                        let im = if self.real_path {
                            0.0
                        } else {
                            let v = coords[k] / SQRT2;
                            k += 1;
                            v
                        };
                        out.set(r, c, Complex64::new(re, im));
                        out.set(c, r, Complex64::new(re, -im));
                    }
                }
            }
            VarLoc::Nonneg { index } => {
                out.set(0, 0, Complex64::new(x.nonneg[index], 0.0));
            }
            VarLoc::Free { index } => {
                out.set(0, 0, Complex64::new(x.free[index], 0.0));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoweringStyle {
    /// Real fast path when the data allows it; slacks appended after the
    /// constraint terms.
    Primary,
    /// Always realifies, processes constraints in reverse, and writes
    /// inequality rows negated with leading slacks. Used as the independent
    /// cross-check of the primary path.
    Alternate,
}

/// Lowers a structured problem to standard conic form (primary style).
pub fn lower_to_standard(p: &SdpProblem) -> Result<Lowered, ProgramError> {
    lower_with_style(p, LoweringStyle::Primary)
}

pub fn lower_with_style(p: &SdpProblem, style: LoweringStyle) -> Result<Lowered, ProgramError> {
    p.validate()?;
    let real = match style {
        LoweringStyle::Primary => p.is_real(),
        LoweringStyle::Alternate => false,
    };

    // Assign variable locations.
    let mut psd_sides: Vec<usize> = Vec::new();
    let mut nonneg = 0usize;
    let mut free = 0usize;
    let mut var_locs: Vec<(String, VarLoc)> = Vec::new();
    let var_order: Vec<&VarBlock> = match style {
        LoweringStyle::Primary => p.vars.iter().collect(),
        LoweringStyle::Alternate => p.vars.iter().rev().collect(),
    };
    for v in var_order {
        let d = v.side();
        let loc = match v.cone {
            VarCone::Psd => {
                psd_sides.push(if real { d } else { 2 * d });
                VarLoc::Psd {
                    block: psd_sides.len() - 1,
                }
            }
            VarCone::HermFree => {
                let len = if real { d * (d + 1) / 2 } else { d * d };
                let start = free;
                free += len;
                VarLoc::FreeHerm { start, side: d }
            }
            VarCone::NonnegScalar => {
                nonneg += 1;
                VarLoc::Nonneg { index: nonneg - 1 }
            }
            VarCone::FreeScalar => {
                free += 1;
                VarLoc::Free { index: free - 1 }
            }
        };
        var_locs.push((v.name.clone(), loc));
    }
    let find_loc = |name: &str| -> VarLoc {
        var_locs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, l)| *l)
            .expect("validated variable")
    };

    // Constraint rows (slack blocks appended as they appear).
    let mut rows: Vec<Row> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let constraints: Vec<&Constraint> = match style {
        LoweringStyle::Primary => p.constraints.iter().collect(),
        LoweringStyle::Alternate => p.constraints.iter().rev().collect(),
    };
    for c in constraints {
        // Row orientation: Eq and Le keep the terms' sign; Ge negates so the
        // slack is always added on the left. The alternate style further
        // negates inequality rows.
        let base_sign = match c.rel {
            Rel::Eq | Rel::Le => 1.0,
            Rel::Ge => -1.0,
        };
        let flip = match (style, c.rel) {
            (LoweringStyle::Alternate, Rel::Le | Rel::Ge) => -1.0,
            _ => 1.0,
        };
        let sign = base_sign * flip;
        let slack_sign = flip;
        match &c.target {
            Target::Scalar(t) => {
                let mut row = Row {
                    mat: Vec::new(),
                    nonneg: Vec::new(),
                    free: Vec::new(),
                    carries_slack: c.rel != Rel::Eq,
                };
                for term in &c.terms {
                    let v = p.var(&term.var)?;
                    scalar_row_term(term, v, find_loc(&term.var), sign, real, &mut row)?;
                }
                if c.rel != Rel::Eq {
                    nonneg += 1;
                    row.nonneg.push((nonneg - 1, slack_sign));
                }
                rows.push(row);
                b.push(sign * t);
            }
            Target::Matrix(t) => {
                let side = t.side();
                let slack_block = if c.rel != Rel::Eq {
                    psd_sides.push(if real { side } else { 2 * side });
                    Some(psd_sides.len() - 1)
                } else {
                    None
                };
                // Per-variable accumulated functionals for each basis element.
                for e in hermitian_basis(side, real) {
                    let mut row = Row {
                        mat: Vec::new(),
                        nonneg: Vec::new(),
                        free: Vec::new(),
                        carries_slack: c.rel != Rel::Eq,
                    };
                    let mut acc: BTreeMap<String, BTreeMap<(usize, usize), Complex64>> =
                        BTreeMap::new();
                    let mut scalar_acc: BTreeMap<String, f64> = BTreeMap::new();
                    for term in &c.terms {
                        let v = p.var(&term.var)?;
                        apply_adjoint_sparse(
                            term,
                            v,
                            &e,
                            sign,
                            &mut acc,
                            &mut scalar_acc,
                        )?;
                    }
                    for (name, f) in &acc {
                        let side = p.var(name)?.side();
                        push_matrix_coeff(&mut row, find_loc(name), side, f, real);
                    }
                    for (name, coeff) in &scalar_acc {
                        push_scalar_coeff(&mut row, find_loc(name), *coeff);
                    }
                    if let Some(blk) = slack_block {
                        let f = basis_as_functional(&e);
                        let entries = if real {
                            f_to_real_entries(&f)
                        } else {
                            f_to_realified_entries(&f, side)
                        };
                        let mut ss = SparseSym::new(entries);
                        ss.scale(slack_sign);
                        row.mat.push((blk, ss));
                    }
                    row.mat.sort_by_key(|(bi, _)| *bi);
                    rows.push(row);
                    b.push(sign * basis_target_value(&e, t));
                }
            }
        }
    }

    // Objective.
    let mut cost = Point::zeros(&psd_sides, nonneg, free);
    let obj_sign = match p.sense {
        Sense::Min => 1.0,
        Sense::Max => -1.0,
    };
    for (name, coeff) in &p.objective {
        let loc = find_loc(name);
        match coeff {
            ObjCoeff::Scalar(s) => match loc {
                VarLoc::Nonneg { index } => cost.nonneg[index] += obj_sign * s,
                VarLoc::Free { index } => cost.free[index] += obj_sign * s,
                _ => unreachable!("validated scalar objective"),
            },
            ObjCoeff::Matrix(k) => {
                let v = p.var(name)?;
                let d = v.side();
                match loc {
                    VarLoc::Psd { block } => {
                        let m = &mut cost.mats[block];
                        if real {
                            for r in 0..d {
                                for c2 in 0..d {
                                    m.data[r * d + c2] += obj_sign * k.at(r, c2).re;
                                }
                            }
                        } else {
                            let dd = 2 * d;
                            for r in 0..d {
                                for c2 in 0..d {
                                    let z = k.at(r, c2);
                                    m.data[r * dd + c2] += obj_sign * 0.5 * z.re;
                                    m.data[(d + r) * dd + (d + c2)] += obj_sign * 0.5 * z.re;
                                    m.data[r * dd + (d + c2)] += obj_sign * 0.5 * (-z.im);
                                    m.data[(d + r) * dd + c2] += obj_sign * 0.5 * z.im;
                                }
                            }
                        }
                    }
                    VarLoc::FreeHerm { start, .. } => {
                        let coords = herm_svec(k, d, real);
                        for (i, v) in coords.iter().enumerate() {
                            cost.free[start + i] += obj_sign * v;
                        }
                    }
                    _ => unreachable!("validated matrix objective"),
                }
            }
        }
    }

    let sdp = StandardSdp {
        psd_sides,
        nonneg,
        free,
        cost,
        rows,
        b,
    };
    Ok(Lowered {
        sdp,
        sign: obj_sign,
        real_path: real,
        var_locs,
    })
}

/// Basis element of the Hermitian (or real symmetric) space, as sparse
/// complex triplets.
#[derive(Debug, Clone)]
pub struct BasisElem {
    pub triplets: Vec<(usize, usize, Complex64)>,
}

fn hermitian_basis(side: usize, real: bool) -> Vec<BasisElem> {
    let mut out = Vec::new();
    for i in 0..side {
        out.push(BasisElem {
            triplets: vec![(i, i, Complex64::new(1.0, 0.0))],
        });
    }
    for i in 0..side {
        for j in i + 1..side {
            out.push(BasisElem {
                triplets: vec![
                    (i, j, Complex64::new(1.0, 0.0)),
                    (j, i, Complex64::new(1.0, 0.0)),
                ],
            });
            if !real {
                out.push(BasisElem {
                    triplets: vec![
                        (i, j, Complex64::new(0.0, 1.0)),
                        (j, i, Complex64::new(0.0, -1.0)),
                    ],
                });
            }
        }
    }
    out
}

/// Tr[E T] for a basis element.
fn basis_target_value(e: &BasisElem, t: &LabeledOperator) -> f64 {
    let mut acc = 0.0;
    for &(r, c, v) in &e.triplets {
        acc += (v * t.at(c, r)).re;
    }
    acc
}

fn basis_as_functional(e: &BasisElem) -> BTreeMap<(usize, usize), Complex64> {
    let mut f = BTreeMap::new();
    for &(r, c, v) in &e.triplets {
        *f.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += v;
    }
    f
}

/// Applies a term's adjoint to a basis element, accumulating sparse
/// Hermitian functionals per matrix variable and coefficients per scalar
/// variable.
fn apply_adjoint_sparse(
    term: &Term,
    v: &VarBlock,
    e: &BasisElem,
    sign: f64,
    acc: &mut BTreeMap<String, BTreeMap<(usize, usize), Complex64>>,
    scalar_acc: &mut BTreeMap<String, f64>,
) -> Result<(), ProgramError> {
    let w = sign * term.coeff;
    match &term.map {
        TermMap::Identity => {
            let f = acc.entry(term.var.clone()).or_default();
            for &(r, c, z) in &e.triplets {
                *f.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += z * w;
            }
        }
        TermMap::TraceOut(names) => {
            // adjoint: E x I on the traced systems, re-slotted to the
            // variable's digit positions.
            let dims: Vec<usize> = v.systems.iter().map(|s| s.dim).collect();
            let strides = mixed_strides(&dims);
            let traced: Vec<usize> = v
                .systems
                .iter()
                .enumerate()
                .filter(|(_, s)| names.contains(&s.name))
                .map(|(i, _)| i)
                .collect();
            let kept: Vec<usize> = (0..dims.len()).filter(|i| !traced.contains(i)).collect();
            let kept_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
            let kept_strides = mixed_strides(&kept_dims);
            let tr_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
            let tr_count: usize = tr_dims.iter().product();
            let tr_strides = mixed_strides(&tr_dims);
            let embed = |idx_kept: usize, idx_tr: usize| -> usize {
                let mut full = 0usize;
                for (k, &pos) in kept.iter().enumerate() {
                    let digit = (idx_kept / kept_strides[k]) % kept_dims[k];
                    full += digit * strides[pos];
                }
                for (k, &pos) in traced.iter().enumerate() {
                    let digit = (idx_tr / tr_strides[k]) % tr_dims[k];
                    full += digit * strides[pos];
                }
                full
            };
            let f = acc.entry(term.var.clone()).or_default();
            for &(r, c, z) in &e.triplets {
                for t in 0..tr_count {
                    let rr = embed(r, t);
                    let cc = embed(c, t);
                    *f.entry((rr, cc)).or_insert(Complex64::new(0.0, 0.0)) += z * w;
                }
            }
        }
        TermMap::TensorId(extra) => {
            // adjoint: partial trace over the appended systems, which occupy
            // the least significant digits.
            let d_extra: usize = extra.iter().map(|s| s.dim).product();
            let f = acc.entry(term.var.clone()).or_default();
            for &(r, c, z) in &e.triplets {
                if r % d_extra == c % d_extra {
                    *f.entry((r / d_extra, c / d_extra))
                        .or_insert(Complex64::new(0.0, 0.0)) += z * w;
                }
            }
        }
        TermMap::InnerProduct(k) => {
            // Scalar-target rows only: the "basis element" is the scalar 1.
            let f = acc.entry(term.var.clone()).or_default();
            let side = k.side();
            for r in 0..side {
                for c in 0..side {
                    let z = k.at(r, c);
                    if z != Complex64::new(0.0, 0.0) {
                        *f.entry((r, c)).or_insert(Complex64::new(0.0, 0.0)) += z * w;
                    }
                }
            }
        }
        TermMap::ScalarKernel(k) => {
            let mut s = 0.0;
            for &(r, c, z) in &e.triplets {
                s += (z * k.at(c, r)).re;
            }
            *scalar_acc.entry(term.var.clone()).or_insert(0.0) += w * s;
        }
        TermMap::ScalarIdentity => {
            let mut s = 0.0;
            for &(r, c, z) in &e.triplets {
                if r == c {
                    s += z.re;
                }
            }
            *scalar_acc.entry(term.var.clone()).or_insert(0.0) += w * s;
        }
    }
    Ok(())
}

fn mixed_strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Upper-triangle entries of a real symmetric functional.
fn f_to_real_entries(f: &BTreeMap<(usize, usize), Complex64>) -> Vec<(u32, u32, f64)> {
    let mut out = Vec::new();
    for (&(r, c), &z) in f {
        if r <= c && z.re != 0.0 {
            out.push((r as u32, c as u32, z.re));
        }
    }
    out
}

/// Upper-triangle entries of half the realified functional,
/// so that <entries, realify(X)> = Tr[F X].
fn f_to_realified_entries(
    f: &BTreeMap<(usize, usize), Complex64>,
    d: usize,
) -> Vec<(u32, u32, f64)> {
    let mut out = Vec::new();
    for (&(r, c), &z) in f {
        if r > c {
            continue;
        }
        let (a, bim) = (0.5 * z.re, 0.5 * z.im);
        if r == c {
            if a != 0.0 {
                out.push((r as u32, c as u32, a));
                out.push(((d + r) as u32, (d + c) as u32, a));
            }
        } else {
            if a != 0.0 {
                out.push((r as u32, c as u32, a));
                out.push(((d + r) as u32, (d + c) as u32, a));
            }
            if bim != 0.0 {
                out.push((r as u32, (d + c) as u32, -bim));
                out.push((c as u32, (d + r) as u32, bim));
            }
        }
    }
    out
}

/// svec coordinates of a Hermitian kernel in the free-block layout.
fn herm_svec(k: &LabeledOperator, d: usize, real: bool) -> Vec<f64> {
    let mut out = Vec::new();
    for r in 0..d {
        out.push(k.at(r, r).re);
    }
    for r in 0..d {
        for c in r + 1..d {
            out.push(SQRT2 * k.at(r, c).re);
            if !real {
                out.push(SQRT2 * k.at(r, c).im);
            }
        }
    }
    out
}

fn push_matrix_coeff(
    row: &mut Row,
    loc: VarLoc,
    side: usize,
    f: &BTreeMap<(usize, usize), Complex64>,
    real: bool,
) {
    match loc {
        VarLoc::Psd { block } => {
            let entries = if real {
                f_to_real_entries(f)
            } else {
                f_to_realified_entries(f, side)
            };
            if !entries.is_empty() {
                row.mat.push((block, SparseSym::new(entries)));
            }
        }
        VarLoc::FreeHerm { start, side } => {
            // Functional against the svec layout.
            for (&(r, c), &z) in f {
                if r > c {
                    continue;
                }
                if r == c {
                    if z.re != 0.0 {
                        row.free.push((start + r, z.re));
                    }
                } else {
                    let off = offdiag_index(side, r, c, real);
                    if z.re != 0.0 {
                        row.free.push((start + off, SQRT2 * z.re));
                    }
                    if !real && z.im != 0.0 {
                        row.free.push((start + off + 1, SQRT2 * z.im));
                    }
                }
            }
        }
        _ => unreachable!("matrix coefficient on scalar variable"),
    }
}

/// Index of the off-diagonal (r, c) svec coordinate within a Hermitian free
/// block of the given side (after the `side` diagonal coordinates).
fn offdiag_index(side: usize, r: usize, c: usize, real: bool) -> usize {
    // Pairs (r, c) with r < c in row-major order.
    let pair_pos = r * side - r * (r + 1) / 2 + (c - r - 1);
    if real {
        side + pair_pos
    } else {
        side + 2 * pair_pos
    }
}

fn push_scalar_coeff(row: &mut Row, loc: VarLoc, coeff: f64) {
    if coeff == 0.0 {
        return;
    }
    match loc {
        VarLoc::Nonneg { index } => row.nonneg.push((index, coeff)),
        VarLoc::Free { index } => row.free.push((index, coeff)),
        _ => unreachable!("scalar coefficient on matrix variable"),
    }
}

/// Contribution of one term to a scalar-target row.
fn scalar_row_term(
    term: &Term,
    v: &VarBlock,
    loc: VarLoc,
    sign: f64,
    real: bool,
    row: &mut Row,
) -> Result<(), ProgramError> {
    let w = sign * term.coeff;
    match &term.map {
        TermMap::InnerProduct(k) => {
            let side = v.side();
            let mut f: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
            for r in 0..side {
                for c in 0..side {
                    let z = k.at(r, c);
                    if z != Complex64::new(0.0, 0.0) {
                        f.insert((r, c), z * w);
                    }
                }
            }
            push_matrix_coeff(row, loc, side, &f, real);
        }
        TermMap::Identity if v.is_scalar() => {
            push_scalar_coeff(row, loc, w);
        }
        other => {
            return Err(ProgramError::Build(format!(
                "unsupported map {:?} against a scalar target",
                other
            )));
        }
    }
    Ok(())
}
