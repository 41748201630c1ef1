use qstrat_tensor::{fmt_f64_17, RealMat};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error("build error: {0}")]
    Build(String),

    #[error("contract error: {0}")]
    Contract(String),
}

/// Sparse symmetric coefficient on one PSD block: entries (i, j, v) with
/// i <= j, each representing v at (i,j) and, for i < j, also at (j,i).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    pub entries: Vec<(u32, u32, f64)>,
}

impl SparseSym {
    pub fn new(mut entries: Vec<(u32, u32, f64)>) -> Self {
        for e in &mut entries {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
        }
        SparseSym { entries }
    }

    /// <F, X> against a dense symmetric block.
    pub fn dot(&self, x: &RealMat) -> f64 {
        let mut acc = 0.0;
        for &(i, j, v) in &self.entries {
            let t = x.at(i as usize, j as usize);
            acc += if i == j { v * t } else { 2.0 * v * t };
        }
        acc
    }

    /// Adds y * F into a dense symmetric accumulator.
    pub fn scatter(&self, y: f64, out: &mut RealMat) {
        for &(i, j, v) in &self.entries {
            let (i, j) = (i as usize, j as usize);
            out.data[i * out.cols + j] += y * v;
            if i != j {
                out.data[j * out.cols + i] += y * v;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, e| m.max(e.2.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        for e in &mut self.entries {
            e.2 *= s;
        }
    }
}

/// One equality functional of the lowered problem.
#[derive(Debug, Clone)]
pub struct Row {
    /// (psd block index, coefficient) pairs.
    pub mat: Vec<(usize, SparseSym)>,
    /// (nonneg coordinate, coefficient) pairs.
    pub nonneg: Vec<(usize, f64)>,
    /// (free coordinate, coefficient) pairs.
    pub free: Vec<(usize, f64)>,
    /// True when this row introduces a fresh slack coordinate no other row
    /// touches. Such rows are linearly independent by construction and are
    /// exempt from the presolve rank check.
    pub carries_slack: bool,
}

impl Row {
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for (_, f) in &self.mat {
            m = m.max(f.max_abs());
        }
        for &(_, v) in &self.nonneg {
            m = m.max(v.abs());
        }
        for &(_, v) in &self.free {
            m = m.max(v.abs());
        }
        m
    }

    pub fn scale(&mut self, s: f64) {
        for (_, f) in &mut self.mat {
            f.scale(s);
        }
        for e in &mut self.nonneg {
            e.1 *= s;
        }
        for e in &mut self.free {
            e.1 *= s;
        }
    }
}

/// A point in the product space (PSD blocks, nonneg orthant, free scalars).
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub mats: Vec<RealMat>,
    pub nonneg: Vec<f64>,
    pub free: Vec<f64>,
}

impl Point {
    pub fn zeros(psd_sides: &[usize], nonneg: usize, free: usize) -> Self {
        Point {
            mats: psd_sides.iter().map(|&s| RealMat::zeros(s, s)).collect(),
            nonneg: vec![0.0; nonneg],
            free: vec![0.0; free],
        }
    }

    /// Identity-scaled point on the cone coordinates (free part zero).
    pub fn cone_identity(psd_sides: &[usize], nonneg: usize, free: usize, tau: f64) -> Self {
        let mut p = Self::zeros(psd_sides, nonneg, free);
        for m in &mut p.mats {
            let n = m.rows;
            for i in 0..n {
                m.data[i * n + i] = tau;
            }
        }
        for v in &mut p.nonneg {
            *v = tau;
        }
        p
    }

    /// Inner product over every coordinate (PSD blocks use the full matrix
    /// Frobenius pairing).
    pub fn dot(&self, other: &Point) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.mats.iter().zip(&other.mats) {
            acc += a.dot(b);
        }
        for (a, b) in self.nonneg.iter().zip(&other.nonneg) {
            acc += a * b;
        }
        for (a, b) in self.free.iter().zip(&other.free) {
            acc += a * b;
        }
        acc
    }

    /// Inner product over cone coordinates only.
    pub fn dot_cone(&self, other: &Point) -> f64 {
        let mut acc = 0.0;
        for (a, b) in self.mats.iter().zip(&other.mats) {
            acc += a.dot(b);
        }
        for (a, b) in self.nonneg.iter().zip(&other.nonneg) {
            acc += a * b;
        }
        acc
    }

    pub fn axpy(&mut self, alpha: f64, other: &Point) {
        for (a, b) in self.mats.iter_mut().zip(&other.mats) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += alpha * y;
            }
        }
        for (a, b) in self.nonneg.iter_mut().zip(&other.nonneg) {
            *a += alpha * b;
        }
        for (a, b) in self.free.iter_mut().zip(&other.free) {
            *a += alpha * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for mat in &self.mats {
            m = m.max(mat.max_abs());
        }
        for v in &self.nonneg {
            m = m.max(v.abs());
        }
        for v in &self.free {
            m = m.max(v.abs());
        }
        m
    }
}

/// Lowered standard conic form: minimize <C, X> subject to A(X) = b with X in
/// a product of PSD blocks, a nonnegative orthant, and free scalars.
#[derive(Debug, Clone)]
pub struct StandardSdp {
    pub psd_sides: Vec<usize>,
    pub nonneg: usize,
    pub free: usize,
    pub cost: Point,
    pub rows: Vec<Row>,
    pub b: Vec<f64>,
}

impl StandardSdp {
    /// Structural consistency of cone sides, cost layout, and row indices.
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.cost.mats.len() != self.psd_sides.len()
            || self.cost.nonneg.len() != self.nonneg
            || self.cost.free.len() != self.free
        {
            return Err(SolverError::Build(
                "cost layout does not match cone specification".into(),
            ));
        }
        for (m, &s) in self.cost.mats.iter().zip(&self.psd_sides) {
            if s == 0 {
                return Err(SolverError::Build("PSD block of side 0".into()));
            }
            if m.rows != s || m.cols != s {
                return Err(SolverError::Build(format!(
                    "cost block is {}x{}, expected {s}x{s}",
                    m.rows, m.cols
                )));
            }
        }
        if self.rows.len() != self.b.len() {
            return Err(SolverError::Build(format!(
                "{} rows but {} right-hand sides",
                self.rows.len(),
                self.b.len()
            )));
        }
        for (k, row) in self.rows.iter().enumerate() {
            for (bi, f) in &row.mat {
                let side = *self.psd_sides.get(*bi).ok_or_else(|| {
                    SolverError::Build(format!("row {k} references missing block {bi}"))
                })?;
                for &(i, j, _) in &f.entries {
                    if i as usize >= side || j as usize >= side {
                        return Err(SolverError::Build(format!(
                            "row {k} indexes outside block {bi} (side {side})"
                        )));
                    }
                }
            }
            for &(i, _) in &row.nonneg {
                if i >= self.nonneg {
                    return Err(SolverError::Build(format!(
                        "row {k} references nonneg coordinate {i} out of {}",
                        self.nonneg
                    )));
                }
            }
            for &(i, _) in &row.free {
                if i >= self.free {
                    return Err(SolverError::Build(format!(
                        "row {k} references free coordinate {i} out of {}",
                        self.free
                    )));
                }
            }
        }
        Ok(())
    }

    /// Total barrier degree: sum of PSD sides plus the orthant size.
    pub fn cone_degree(&self) -> usize {
        self.psd_sides.iter().sum::<usize>() + self.nonneg
    }

    /// Applies the constraint map A to a point.
    pub fn apply(&self, x: &Point) -> Vec<f64> {
        self.rows.iter().map(|row| self.row_dot(row, x)).collect()
    }

    pub fn row_dot(&self, row: &Row, x: &Point) -> f64 {
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
    }

    /// Applies the adjoint map: adjoint(y) = sum_k y_k F_k as a point.
    pub fn apply_adjoint(&self, y: &[f64]) -> Point {
        let mut out = Point::zeros(&self.psd_sides, self.nonneg, self.free);
        for (row, &yk) in self.rows.iter().zip(y) {
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

    /// Debugging dump of the full lowered problem.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\"psd_sides\":[");
        out.push_str(
            &self
                .psd_sides
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push_str(&format!(
            "],\"nonneg\":{},\"free\":{},\"b\":[",
            self.nonneg, self.free
        ));
        out.push_str(
            &self
                .b
                .iter()
                .map(|v| fmt_f64_17(*v))
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push_str("],\"cost\":");
        out.push_str(&point_json(&self.cost));
        out.push_str(",\"rows\":[");
        for (k, row) in self.rows.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&row_json(row));
        }
        out.push_str("]}");
        out
    }
}

fn row_json(row: &Row) -> String {
    let mut out = String::from("{\"mat\":[");
    for (k, (bi, f)) in row.mat.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format!("{{\"block\":{bi},\"entries\":["));
        for (t, &(i, j, v)) in f.entries.iter().enumerate() {
            if t > 0 {
                out.push(',');
            }
            out.push_str(&format!("[{},{},{}]", i, j, fmt_f64_17(v)));
        }
        out.push_str("]}");
    }
    out.push_str("],\"nonneg\":[");
    for (t, &(i, v)) in row.nonneg.iter().enumerate() {
        if t > 0 {
            out.push(',');
        }
        out.push_str(&format!("[{},{}]", i, fmt_f64_17(v)));
    }
    out.push_str("],\"free\":[");
    for (t, &(i, v)) in row.free.iter().enumerate() {
        if t > 0 {
            out.push(',');
        }
        out.push_str(&format!("[{},{}]", i, fmt_f64_17(v)));
    }
    out.push_str("]}");
    out
}

fn point_json(p: &Point) -> String {
    let mut out = String::from("{\"mats\":[");
    for (k, m) in p.mats.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push('[');
        for (t, v) in m.data.iter().enumerate() {
            if t > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64_17(*v));
        }
        out.push(']');
    }
    out.push_str("],\"nonneg\":[");
    for (t, v) in p.nonneg.iter().enumerate() {
        if t > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64_17(*v));
    }
    out.push_str("],\"free\":[");
    for (t, v) in p.free.iter().enumerate() {
        if t > 0 {
            out.push(',');
        }
        out.push_str(&fmt_f64_17(*v));
    }
    out.push_str("]}");
    out
}

/// Interior-point options.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Relative duality-gap tolerance.
    pub gap_tol: f64,
    /// Primal/dual residual tolerance.
    pub feas_tol: f64,
    pub max_iters: usize,
    /// Fraction-to-boundary step damping.
    pub step_fraction: f64,
    /// One log line per iteration to stderr. Also enabled by the
    /// QSTRAT_SOLVER_TRACE=1 environment variable.
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            gap_tol: 1e-8,
            feas_tol: 1e-8,
            max_iters: 200,
            step_fraction: 0.98,
            trace: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.gap_tol <= 0.0 || self.feas_tol <= 0.0 {
            return Err(SolverError::Build("tolerances must be positive".into()));
        }
        if !(0.0 < self.step_fraction && self.step_fraction < 1.0) {
            return Err(SolverError::Build(
                "step_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    MaxIters,
    NumericalFailure,
    InfeasibleCertificate,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::NumericalFailure => "numerical_failure",
            SolveStatus::InfeasibleCertificate => "infeasible_certificate",
        }
    }
}

/// Outcome of a solve. On `Optimal`, gap <= gap_tol * (1 + |primal_value|)
/// and both residuals are at most feas_tol.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub primal_value: f64,
    pub dual_value: f64,
    /// |primal_value - dual_value|.
    pub gap: f64,
    /// Scaled residual norms: ||b - A(x)||_inf / (1 + ||b||_inf) and
    /// ||C - adjoint(y) - Z||_inf / (1 + ||C||_inf).
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub x: Point,
    pub y: Vec<f64>,
    pub z: Point,
    /// Complementarity <X, Z>/nu at the start of each iteration.
    pub mu_history: Vec<f64>,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"status\":\"{}\",\"primal_value\":{},\"dual_value\":{},\"gap\":{},\"primal_residual\":{},\"dual_residual\":{},\"iterations\":{}}}",
            self.status.as_str(),
            fmt_f64_17(self.primal_value),
            fmt_f64_17(self.dual_value),
            fmt_f64_17(self.gap),
            fmt_f64_17(self.primal_residual),
            fmt_f64_17(self.dual_residual),
            self.iterations
        )
    }
}
