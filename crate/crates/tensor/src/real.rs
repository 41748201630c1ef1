use serde::{Deserialize, Serialize};

use crate::{LabeledOperator, TensorError};

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RealMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RealMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r + 1..self.cols {
                worst = worst.max((self.at(r, c) - self.at(c, r)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Frobenius inner product <A, B> = sum_ij A_ij B_ij.
    pub fn dot(&self, other: &RealMat) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }
}

/// Embeds a Hermitian operator H = Re + i Im as the real symmetric matrix
/// [[Re, -Im], [Im, Re]] of doubled side. The embedding doubles eigenvalue
/// multiplicities and satisfies <realify(A), realify(B)> = 2 Tr[A B].
pub fn realify(h: &LabeledOperator) -> Result<RealMat, TensorError> {
    if !h.is_hermitian(1e-10) {
        return Err(TensorError::NumericContract(format!(
            "realify needs a Hermitian input (defect {:.3e})",
            h.hermiticity_defect()
        )));
    }
    let d = h.side();
    let mut m = RealMat::zeros(2 * d, 2 * d);
    for r in 0..d {
        for c in 0..d {
            let z = h.at(r, c);
            m.set(r, c, z.re);
            m.set(r, d + c, -z.im);
            m.set(d + r, c, z.im);
            m.set(d + r, d + c, z.re);
        }
    }
    Ok(m)
}
