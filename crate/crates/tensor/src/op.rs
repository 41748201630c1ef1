use num_complex::Complex64;

use crate::system::check_unique_names;
use crate::{SystemLabel, TensorError};

/// A dense complex square matrix over an ordered list of named subsystems.
///
/// The matrix side is the product of the subsystem dimensions. Row/column
/// indices are mixed-radix over the subsystem dimensions in listed order,
/// with the first system as the most significant digit, so
/// `kron(a, b)` concatenates system lists without any reindexing.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    systems: Vec<SystemLabel>,
    side: usize,
    entries: Vec<Complex64>,
}

impl LabeledOperator {
    pub fn new(systems: Vec<SystemLabel>, entries: Vec<Complex64>) -> Result<Self, TensorError> {
        check_unique_names(&systems)?;
        let side: usize = systems.iter().map(|s| s.dim).product();
        if entries.len() != side * side {
            return Err(TensorError::Labeling(format!(
                "entry count {} does not match side {} squared",
                entries.len(),
                side
            )));
        }
        Ok(LabeledOperator {
            systems,
            side,
            entries,
        })
    }

    pub fn zero(systems: Vec<SystemLabel>) -> Result<Self, TensorError> {
        check_unique_names(&systems)?;
        let side: usize = systems.iter().map(|s| s.dim).product();
        Ok(LabeledOperator {
            systems,
            side,
            entries: vec![Complex64::new(0.0, 0.0); side * side],
        })
    }

    pub fn identity(systems: Vec<SystemLabel>) -> Result<Self, TensorError> {
        let mut op = Self::zero(systems)?;
        for i in 0..op.side {
            op.entries[i * op.side + i] = Complex64::new(1.0, 0.0);
        }
        Ok(op)
    }

    /// A 1x1 operator holding a scalar (empty system list).
    pub fn scalar(v: Complex64) -> Self {
        LabeledOperator {
            systems: Vec::new(),
            side: 1,
            entries: vec![v],
        }
    }

    /// Builds from a real matrix given row-major.
    pub fn from_real(systems: Vec<SystemLabel>, re: &[f64]) -> Result<Self, TensorError> {
        let entries = re.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::new(systems, entries)
    }

    pub fn systems(&self) -> &[SystemLabel] {
        &self.systems
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.side + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        let side = self.side;
        self.entries[r * side + c] = v;
    }

    pub fn position_of(&self, name: &str) -> Result<usize, TensorError> {
        self.systems
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| TensorError::Labeling(format!("unknown system '{name}'")))
    }

    fn positions_of(&self, names: &[&str]) -> Result<Vec<usize>, TensorError> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let p = self.position_of(n)?;
            if out.contains(&p) {
                return Err(TensorError::Labeling(format!(
                    "system '{n}' listed twice"
                )));
            }
            out.push(p);
        }
        Ok(out)
    }

    fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    /// Renames systems in place (dimension-preserving relabel).
    pub fn relabel(&self, names: &[&str]) -> Result<Self, TensorError> {
        if names.len() != self.systems.len() {
            return Err(TensorError::Labeling(format!(
                "relabel expects {} names, got {}",
                self.systems.len(),
                names.len()
            )));
        }
        let systems: Vec<SystemLabel> = self
            .systems
            .iter()
            .zip(names)
            .map(|(s, n)| SystemLabel {
                name: (*n).to_string(),
                dim: s.dim,
            })
            .collect();
        check_unique_names(&systems)?;
        Ok(LabeledOperator {
            systems,
            side: self.side,
            entries: self.entries.clone(),
        })
    }

    /// Replaces the system list with one of identical total dimension.
    /// Pure relabel of the index structure; entries are untouched.
    pub fn regroup(&self, systems: Vec<SystemLabel>) -> Result<Self, TensorError> {
        check_unique_names(&systems)?;
        let side: usize = systems.iter().map(|s| s.dim).product();
        if side != self.side {
            return Err(TensorError::Labeling(format!(
                "regroup changes total dimension {} -> {}",
                self.side, side
            )));
        }
        Ok(LabeledOperator {
            systems,
            side,
            entries: self.entries.clone(),
        })
    }

    /// Tensor product. System lists concatenate; names must stay disjoint.
    pub fn kron(&self, other: &LabeledOperator) -> Result<Self, TensorError> {
        let mut systems = self.systems.clone();
        systems.extend(other.systems.iter().cloned());
        check_unique_names(&systems)?;
        let (sa, sb) = (self.side, other.side);
        let side = sa * sb;
        let mut entries = vec![Complex64::new(0.0, 0.0); side * side];
        for ia in 0..sa {
            for ja in 0..sa {
                let a = self.entries[ia * sa + ja];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for ib in 0..sb {
                    let row = (ia * sb + ib) * side + ja * sb;
                    let brow = ib * sb;
                    for jb in 0..sb {
                        entries[row + jb] = a * other.entries[brow + jb];
                    }
                }
            }
        }
        Ok(LabeledOperator {
            systems,
            side,
            entries,
        })
    }

    /// Reorders the system list by `order` (indices into the current list).
    /// The operator is unchanged as an abstract tensor.
    pub fn permute_systems(&self, order: &[usize]) -> Result<Self, TensorError> {
        let k = self.systems.len();
        if order.len() != k {
            return Err(TensorError::Labeling(format!(
                "permutation length {} != system count {}",
                order.len(),
                k
            )));
        }
        let mut seen = vec![false; k];
        for &p in order {
            if p >= k || seen[p] {
                return Err(TensorError::Labeling(format!(
                    "invalid permutation {order:?}"
                )));
            }
            seen[p] = true;
        }
        let dims = self.dims();
        let new_systems: Vec<SystemLabel> = order.iter().map(|&p| self.systems[p].clone()).collect();
        let new_dims: Vec<usize> = new_systems.iter().map(|s| s.dim).collect();
        let new_strides = strides(&new_dims);
        // translate[i] = index of old digit-vector i in the new digit order
        let old_strides = strides(&dims);
        let mut translate = vec![0usize; self.side];
        for (i, t) in translate.iter_mut().enumerate() {
            let mut acc = 0usize;
            for (new_pos, &old_pos) in order.iter().enumerate() {
                let digit = (i / old_strides[old_pos]) % dims[old_pos];
                acc += digit * new_strides[new_pos];
            }
            *t = acc;
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); self.side * self.side];
        for r in 0..self.side {
            let tr = translate[r] * self.side;
            let sr = r * self.side;
            for c in 0..self.side {
                entries[tr + translate[c]] = self.entries[sr + c];
            }
        }
        Ok(LabeledOperator {
            systems: new_systems,
            side: self.side,
            entries,
        })
    }

    /// Reorders systems so their names appear in the order given.
    pub fn permute_to_names(&self, names: &[&str]) -> Result<Self, TensorError> {
        if names.len() != self.systems.len() {
            return Err(TensorError::Labeling(format!(
                "permutation names {:?} do not cover {} systems",
                names,
                self.systems.len()
            )));
        }
        let order = self.positions_of(names)?;
        self.permute_systems(&order)
    }

    /// Traces out the named systems; remaining systems keep their relative order.
    pub fn partial_trace(&self, names: &[&str]) -> Result<Self, TensorError> {
        let traced = self.positions_of(names)?;
        let dims = self.dims();
        let keep: Vec<usize> = (0..self.systems.len())
            .filter(|p| !traced.contains(p))
            .collect();
        let keep_systems: Vec<SystemLabel> = keep.iter().map(|&p| self.systems[p].clone()).collect();
        let keep_side: usize = keep_systems.iter().map(|s| s.dim).product();
        let tr_side: usize = traced.iter().map(|&p| dims[p]).product();
        let old_strides = strides(&dims);

        // Row offsets of each kept index and each traced index in the full space.
        let keep_offsets = subindex_offsets(&keep, &dims, &old_strides, keep_side);
        let tr_offsets = subindex_offsets(&traced, &dims, &old_strides, tr_side);

        let mut entries = vec![Complex64::new(0.0, 0.0); keep_side * keep_side];
        for (rk, &ro) in keep_offsets.iter().enumerate() {
            for (ck, &co) in keep_offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &tr_offsets {
                    acc += self.entries[(ro + t) * self.side + (co + t)];
                }
                entries[rk * keep_side + ck] = acc;
            }
        }
        Ok(LabeledOperator {
            systems: keep_systems,
            side: keep_side,
            entries,
        })
    }

    /// Transposes only the named tensor factors. Involution.
    pub fn partial_transpose(&self, names: &[&str]) -> Result<Self, TensorError> {
        let flipped = self.positions_of(names)?;
        let dims = self.dims();
        let old_strides = strides(&dims);
        let mut entries = vec![Complex64::new(0.0, 0.0); self.side * self.side];
        for r in 0..self.side {
            for c in 0..self.side {
                // Swap the digits of the flipped positions between row and column.
                let (mut nr, mut nc) = (r, c);
                for &p in &flipped {
                    let dr = (r / old_strides[p]) % dims[p];
                    let dc = (c / old_strides[p]) % dims[p];
                    nr = nr - dr * old_strides[p] + dc * old_strides[p];
                    nc = nc - dc * old_strides[p] + dr * old_strides[p];
                }
                entries[nr * self.side + nc] = self.entries[r * self.side + c];
            }
        }
        Ok(LabeledOperator {
            systems: self.systems.clone(),
            side: self.side,
            entries,
        })
    }

    pub fn conj_transpose(&self) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); self.side * self.side];
        for r in 0..self.side {
            for c in 0..self.side {
                entries[c * self.side + r] = self.entries[r * self.side + c].conj();
            }
        }
        LabeledOperator {
            systems: self.systems.clone(),
            side: self.side,
            entries,
        }
    }

    pub fn transpose(&self) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); self.side * self.side];
        for r in 0..self.side {
            for c in 0..self.side {
                entries[c * self.side + r] = self.entries[r * self.side + c];
            }
        }
        LabeledOperator {
            systems: self.systems.clone(),
            side: self.side,
            entries,
        }
    }

    pub fn conj(&self) -> Self {
        LabeledOperator {
            systems: self.systems.clone(),
            side: self.side,
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Largest absolute deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.side {
            for c in r..self.side {
                let d = (self.entries[r * self.side + c]
                    - self.entries[c * self.side + r].conj())
                .norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * (1.0 + self.max_abs())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.side).map(|i| self.entries[i * self.side + i]).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    /// Hilbert-Schmidt inner product Tr[A† B].
    pub fn inner(&self, other: &LabeledOperator) -> Complex64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Tr[A B] without conjugation (what SDP objectives use).
    pub fn trace_product(&self, other: &LabeledOperator) -> Complex64 {
        let n = self.side;
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..n {
            for c in 0..n {
                acc += self.entries[r * n + c] * other.entries[c * n + r];
            }
        }
        acc
    }

    pub fn matmul(&self, other: &LabeledOperator) -> Result<Self, TensorError> {
        if self.side != other.side {
            return Err(TensorError::Labeling(format!(
                "matmul dimension mismatch {} vs {}",
                self.side, other.side
            )));
        }
        let n = self.side;
        let mut entries = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.entries[k * n + j];
                }
            }
        }
        Ok(LabeledOperator {
            systems: self.systems.clone(),
            side: n,
            entries,
        })
    }

    pub fn add(&self, other: &LabeledOperator) -> Result<Self, TensorError> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &LabeledOperator) -> Result<Self, TensorError> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(
        &self,
        other: &LabeledOperator,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, TensorError> {
        if self.side != other.side {
            return Err(TensorError::Labeling(format!(
                "elementwise op on mismatched sides {} vs {}",
                self.side, other.side
            )));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(LabeledOperator {
            systems: self.systems.clone(),
            side: self.side,
            entries,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        LabeledOperator {
            systems: self.systems.clone(),
            side: self.side,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }
}

/// strides[k] = product of dims[k+1..].
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Offsets contributed to a full mixed-radix index by each joint value of the
/// digits at `positions`, enumerated in the mixed-radix order of those
/// positions themselves.
fn subindex_offsets(
    positions: &[usize],
    dims: &[usize],
    full_strides: &[usize],
    count: usize,
) -> Vec<usize> {
    let sub_dims: Vec<usize> = positions.iter().map(|&p| dims[p]).collect();
    let sub_strides = strides(&sub_dims);
    let mut out = vec![0usize; count];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0usize;
        for (k, &p) in positions.iter().enumerate() {
            let digit = (i / sub_strides[k]) % sub_dims[k];
            acc += digit * full_strides[p];
        }
        *o = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_hermitian as test_random_hermitian;

    fn sys(name: &str, dim: usize) -> SystemLabel {
        SystemLabel::new(name, dim).unwrap()
    }

    fn diag(name: &str, vals: &[f64]) -> LabeledOperator {
        let d = vals.len();
        let mut op = LabeledOperator::zero(vec![sys(name, d)]).unwrap();
        for (i, &v) in vals.iter().enumerate() {
            op.set(i, i, Complex64::new(v, 0.0));
        }
        op
    }

    /// Unnormalized maximally entangled |Γ><Γ| on two systems of dim d.
    fn gamma_pair(a: &str, b: &str, d: usize) -> LabeledOperator {
        let mut op = LabeledOperator::zero(vec![sys(a, d), sys(b, d)]).unwrap();
        for i in 0..d {
            for j in 0..d {
                op.set(i * d + i, j * d + j, Complex64::new(1.0, 0.0));
            }
        }
        op
    }

    #[test]
    fn kron_identities() {
        let i2 = LabeledOperator::identity(vec![sys("a", 2)]).unwrap();
        let i2b = LabeledOperator::identity(vec![sys("b", 2)]).unwrap();
        let i4 = i2.kron(&i2b).unwrap();
        assert_eq!(i4.side(), 4);
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert_eq!(i4.at(r, c), Complex64::new(want, 0.0));
            }
        }
    }

    #[test]
    fn kron_diagonals() {
        let a = diag("a", &[1.0, 0.0]);
        let b = diag("b", &[0.0, 1.0]);
        let ab = a.kron(&b).unwrap();
        let got: Vec<f64> = (0..4).map(|i| ab.at(i, i).re).collect();
        assert_eq!(got, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn kron_duplicate_name_rejected() {
        let a = diag("a", &[1.0, 0.0]);
        let b = diag("a", &[0.0, 1.0]);
        assert!(matches!(a.kron(&b), Err(TensorError::Labeling(_))));
    }

    #[test]
    fn kron_trace_multiplies() {
        let a = test_random_hermitian("a", 3, 7);
        let b = test_random_hermitian("b", 2, 9);
        let ab = a.kron(&b).unwrap();
        let want = a.trace() * b.trace();
        assert!((ab.trace() - want).norm() <= 1e-12);
    }

    #[test]
    fn permute_identity_is_bit_identical() {
        let a = test_random_hermitian("a", 2, 3);
        let b = test_random_hermitian("b", 3, 4);
        let ab = a.kron(&b).unwrap();
        let same = ab.permute_systems(&[0, 1]).unwrap();
        assert_eq!(ab, same);
    }

    #[test]
    fn permute_gamma_swap_symmetric() {
        let g = gamma_pair("a", "b", 2);
        let swapped = g.permute_systems(&[1, 0]).unwrap();
        assert_eq!(g.entries(), swapped.entries());
    }

    #[test]
    fn permute_roundtrip_bit_exact() {
        let a = test_random_hermitian("a", 2, 1);
        let b = test_random_hermitian("b", 2, 2);
        let c = test_random_hermitian("c", 3, 3);
        let abc = a.kron(&b).unwrap().kron(&c).unwrap();
        let p = abc.permute_systems(&[2, 0, 1]).unwrap();
        let back = p.permute_systems(&[1, 2, 0]).unwrap();
        assert_eq!(abc, back);
    }

    #[test]
    fn invalid_permutation_rejected() {
        let a = diag("a", &[1.0, 2.0]);
        assert!(a.permute_systems(&[0, 0]).is_err());
        assert!(a.permute_systems(&[1]).is_err());
    }

    #[test]
    fn partial_trace_gamma_gives_identity() {
        let g = gamma_pair("a", "b", 3);
        let ia = g.partial_trace(&["b"]).unwrap();
        assert_eq!(ia.systems().len(), 1);
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((ia.at(r, c) - Complex64::new(want, 0.0)).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_product_case() {
        let rho = test_random_hermitian("a", 2, 11);
        let sig = test_random_hermitian("b", 3, 12);
        let prod = rho.kron(&sig).unwrap();
        let got = prod.partial_trace(&["a"]).unwrap();
        let want = sig.scale(1.0); // compare against Tr[rho] * sigma
        let tr = rho.trace();
        for r in 0..3 {
            for c in 0..3 {
                assert!((got.at(r, c) - tr * want.at(r, c)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_unknown_system() {
        let a = diag("a", &[1.0, 2.0]);
        assert!(matches!(
            a.partial_trace(&["zz"]),
            Err(TensorError::Labeling(_))
        ));
    }

    #[test]
    fn partial_trace_disjoint_sets_commute() {
        let a = test_random_hermitian("a", 2, 21);
        let b = test_random_hermitian("b", 2, 22);
        let c = test_random_hermitian("c", 2, 23);
        let abc = a.kron(&b).unwrap().kron(&c).unwrap();
        let x = abc.partial_trace(&["a"]).unwrap().partial_trace(&["c"]).unwrap();
        let y = abc.partial_trace(&["c"]).unwrap().partial_trace(&["a"]).unwrap();
        let diff = x.sub(&y).unwrap().max_abs();
        assert!(diff <= 1e-12);
    }

    #[test]
    fn partial_transpose_gamma_is_swap() {
        let g = gamma_pair("a", "b", 2);
        let sw = g.partial_transpose(&["b"]).unwrap();
        // SWAP operator: |ij><ji|
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let want = if i == l && j == k { 1.0 } else { 0.0 };
                        assert_eq!(sw.at(i * 2 + j, k * 2 + l).re, want);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_transpose_involution_bit_exact() {
        let a = test_random_hermitian("a", 2, 31);
        let b = test_random_hermitian("b", 3, 32);
        let ab = a.kron(&b).unwrap();
        let twice = ab
            .partial_transpose(&["b"])
            .unwrap()
            .partial_transpose(&["b"])
            .unwrap();
        assert_eq!(ab, twice);
    }

    #[test]
    fn partial_transpose_product_case() {
        let a = test_random_hermitian("a", 2, 41);
        let b = test_random_hermitian("b", 2, 42);
        let ab = a.kron(&b).unwrap();
        let got = ab.partial_transpose(&["b"]).unwrap();
        let want = a.kron(&b.transpose()).unwrap();
        assert!(got.sub(&want).unwrap().max_abs() <= 1e-15);
    }

    #[test]
    fn kron_associativity_up_to_relabeling() {
        let a = test_random_hermitian("a", 2, 51);
        let b = test_random_hermitian("b", 2, 52);
        let c = test_random_hermitian("c", 3, 53);
        let left = a.kron(&b).unwrap().kron(&c).unwrap();
        let right = a.kron(&b.kron(&c).unwrap()).unwrap();
        assert!(left.sub(&right).unwrap().max_abs() <= 1e-12);
    }

}
