use std::ops::BitOr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{clamp_mi, COV_TOL, DET_REL_TOL, GAUSSIAN_CLAMP_TOL};
use crate::error::{Error, Result};

/// Scalar field of a Gaussian system.
///
/// Real variables carry `1/2 log2` per determinant ratio, circularly-symmetric
/// complex ones a full `log2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Real,
    ComplexCircular,
}

impl FieldKind {
    pub fn prefactor(self) -> f64 {
        match self {
            FieldKind::Real => 0.5,
            FieldKind::ComplexCircular => 1.0,
        }
    }
}

/// A subset of the variables of one [`GaussianSystem`], as a bitmask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct VarSet(u64);

impl VarSet {
    pub const EMPTY: VarSet = VarSet(0);

    pub fn single(index: usize) -> Self {
        VarSet(1 << index)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersects(self, other: VarSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn without(self, other: VarSet) -> VarSet {
        VarSet(self.0 & !other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits & (1 << i) != 0)
    }
}

impl BitOr for VarSet {
    type Output = VarSet;
    fn bitor(self, rhs: VarSet) -> VarSet {
        VarSet(self.0 | rhs.0)
    }
}

/// Jointly Gaussian, zero-mean scalar variables with a labelled covariance.
///
/// Variables with exactly zero variance are constants: they are dropped from
/// every determinant, so conditioning on them (or asking about them) is a
/// no-op rather than a degeneracy.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSystem {
    labels: Vec<String>,
    cov: Vec<Complex64>,
    field: FieldKind,
    constants: VarSet,
}

impl GaussianSystem {
    /// Builds a system from an explicit row-major covariance matrix.
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        cov: Vec<Complex64>,
        field: FieldKind,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if n > 64 {
            return Err(Error::Argument("at most 64 variables per system".into()));
        }
        if cov.len() != n * n {
            return Err(Error::Argument(format!(
                "covariance has {} entries, expected {}",
                cov.len(),
                n * n
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Argument(format!("duplicate label `{l}`")));
            }
        }
        if cov.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("covariance entries must be finite".into()));
        }
        let scale = (0..n).map(|i| cov[i * n + i].re.abs()).fold(1.0, f64::max);
        let tol = COV_TOL * scale;
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (cov[i * n + j], cov[j * n + i]);
                if (a - b.conj()).norm() > tol {
                    return Err(Error::Argument(format!(
                        "covariance is not Hermitian at ({i}, {j})"
                    )));
                }
                if field == FieldKind::Real && a.im.abs() > tol {
                    return Err(Error::Argument(
                        "real system with complex covariance entry".into(),
                    ));
                }
            }
        }
        if !is_psd(&cov, n, tol) {
            return Err(Error::Argument(
                "covariance is not positive semidefinite".into(),
            ));
        }
        Ok(Self::assemble(labels, cov, field))
    }

    /// Builds the system of `V = coeffs * S`, with `S` independent sources of
    /// the given variances. PSD by construction.
    ///
    /// `coeffs[i][k]` is the weight of source `k` in variable `i`.
    pub fn from_linear_model<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        coeffs: &[Vec<Complex64>],
        source_vars: &[f64],
        field: FieldKind,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let n = labels.len();
        if coeffs.len() != n || coeffs.iter().any(|row| row.len() != source_vars.len()) {
            return Err(Error::Argument("linear model shape mismatch".into()));
        }
        if source_vars.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Argument(
                "source variances must be finite and >= 0".into(),
            ));
        }
        let mut cov = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in i..n {
                let v: Complex64 = coeffs[i]
                    .iter()
                    .zip(&coeffs[j])
                    .zip(source_vars)
                    .map(|((a, b), s)| a * b.conj() * s)
                    .sum();
                cov[i * n + j] = v;
                cov[j * n + i] = v.conj();
            }
            // exact real diagonal
            cov[i * n + i] = Complex64::new(cov[i * n + i].re, 0.0);
        }
        if cov.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Argument("covariance entries must be finite".into()));
        }
        Ok(Self::assemble(labels, cov, field))
    }

    fn assemble(labels: Vec<String>, cov: Vec<Complex64>, field: FieldKind) -> Self {
        let n = labels.len();
        let constants = (0..n)
            .filter(|&i| cov[i * n + i].re <= 0.0)
            .fold(VarSet::EMPTY, |acc, i| acc | VarSet::single(i));
        Self {
            labels,
            cov,
            field,
            constants,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn field(&self) -> FieldKind {
        self.field
    }

    pub fn covariance(&self, i: usize, j: usize) -> Complex64 {
        self.cov[i * self.dim() + j]
    }

    /// Variance of the named variable.
    pub fn variance(&self, label: &str) -> Result<f64> {
        let i = self.index_of(label)?;
        Ok(self.covariance(i, i).re)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn set(&self, labels: &[&str]) -> Result<VarSet> {
        labels.iter().try_fold(VarSet::EMPTY, |acc, l| {
            Ok(acc | VarSet::single(self.index_of(l)?))
        })
    }

    /// Like [`set`](Self::set) for one label, but absent labels give the empty set.
    pub fn set_if_present(&self, label: &str) -> VarSet {
        self.index_of(label).map(VarSet::single).unwrap_or_default()
    }

    fn names(&self, set: VarSet) -> Vec<String> {
        set.indices().map(|i| self.labels[i].clone()).collect()
    }

    /// `log2 det` of the covariance restricted to `set` (constants removed).
    pub fn log2_det(&self, set: VarSet) -> Result<f64> {
        let set = set.without(self.constants);
        if set.is_empty() {
            return Ok(0.0);
        }
        let idx: Vec<usize> = set.indices().collect();
        let k = idx.len();
        let n = self.dim();
        let mut m: Vec<Complex64> = Vec::with_capacity(k * k);
        let mut diag_product = 1.0;
        for &i in &idx {
            diag_product *= self.cov[i * n + i].re;
            m.extend(idx.iter().map(|&j| self.cov[i * n + j]));
        }
        let det = lu_determinant(&mut m, k).re;
        let relative = det / diag_product;
        if !(relative >= DET_REL_TOL) {
            return Err(Error::Degenerate {
                subset: self.names(set),
                relative_det: relative,
            });
        }
        Ok(det.log2())
    }

    /// `I(A;B|C)` in bits over bitmask sets.
    pub fn mutual_info(&self, a: VarSet, b: VarSet, c: VarSet) -> Result<f64> {
        self.evaluator().mi(a, b, c)
    }

    /// An evaluator that memoises sub-determinants across many MI terms.
    pub fn evaluator(&self) -> MiEvaluator<'_> {
        MiEvaluator {
            sys: self,
            cache: if self.dim() <= 12 {
                vec![f64::NAN; 1 << self.dim()]
            } else {
                Vec::new()
            },
        }
    }
}

/// Memoising MI evaluator over a single [`GaussianSystem`].
pub struct MiEvaluator<'a> {
    sys: &'a GaussianSystem,
    cache: Vec<f64>,
}

impl MiEvaluator<'_> {
    pub fn system(&self) -> &GaussianSystem {
        self.sys
    }

    fn log2_det(&mut self, set: VarSet) -> Result<f64> {
        let set = set.without(self.sys.constants);
        let key = set.bits() as usize;
        if let Some(&v) = self.cache.get(key) {
            if !v.is_nan() {
                return Ok(v);
            }
        }
        let v = self.sys.log2_det(set)?;
        if let Some(slot) = self.cache.get_mut(key) {
            *slot = v;
        }
        Ok(v)
    }

    /// `I(A;B|C)` in bits; `A`, `B`, `C` must be pairwise disjoint.
    pub fn mi(&mut self, a: VarSet, b: VarSet, c: VarSet) -> Result<f64> {
        if a.intersects(b) || a.intersects(c) || b.intersects(c) {
            return Err(Error::Argument(
                "label sets passed to mutual information must be disjoint".into(),
            ));
        }
        let k = self.sys.constants;
        let (a, b, c) = (a.without(k), b.without(k), c.without(k));
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        let raw = self.log2_det(a | c)? + self.log2_det(b | c)?
            - self.log2_det(c)?
            - self.log2_det(a | b | c)?;
        clamp_mi(self.sys.field.prefactor() * raw, GAUSSIAN_CLAMP_TOL)
    }
}

/// `I(A;B|C)` in bits for labelled subsets of a Gaussian system.
pub fn mutual_info_gaussian(
    sys: &GaussianSystem,
    a: &[&str],
    b: &[&str],
    c: &[&str],
) -> Result<f64> {
    let (ia, ib, ic) = (
        labels_to_indices(sys, a)?,
        labels_to_indices(sys, b)?,
        labels_to_indices(sys, c)?,
    );
    super::check_disjoint([&ia, &ib, &ic])?;
    sys.mutual_info(sys.set(a)?, sys.set(b)?, sys.set(c)?)
}

fn labels_to_indices(sys: &GaussianSystem, labels: &[&str]) -> Result<Vec<usize>> {
    labels.iter().map(|l| sys.index_of(l)).collect()
}

/// Determinant by LU with partial pivoting; `m` is overwritten.
fn lu_determinant(m: &mut [Complex64], n: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i * n + col].norm().total_cmp(&m[j * n + col].norm()))
            .unwrap_or(col);
        if m[pivot * n + col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        let p = m[col * n + col];
        det *= p;
        for i in col + 1..n {
            let f = m[i * n + col] / p;
            if f.norm() != 0.0 {
                for j in col + 1..n {
                    let v = m[col * n + j];
                    m[i * n + j] -= f * v;
                }
            }
        }
    }
    det
}

/// Diagonally pivoted Cholesky test for positive semidefiniteness.
fn is_psd(cov: &[Complex64], n: usize, tol: f64) -> bool {
    let mut a = cov.to_vec();
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        let (pos, &p) = remaining
            .iter()
            .enumerate()
            .max_by(|x, y| a[x.1 * n + x.1].re.total_cmp(&a[y.1 * n + y.1].re))
            .expect("non-empty");
        let d = a[p * n + p].re;
        if d < -tol {
            return false;
        }
        if d <= tol {
            // The remaining Schur block has a negligible diagonal; a PSD block
            // then has negligible off-diagonals as well.
            let bound = tol.sqrt();
            return remaining
                .iter()
                .all(|&i| remaining.iter().all(|&j| a[i * n + j].norm() <= bound));
        }
        remaining.swap_remove(pos);
        for &i in &remaining {
            for &j in &remaining {
                let delta = a[i * n + p] * a[j * n + p].conj() / d;
                a[i * n + j] -= delta;
            }
        }
    }
    true
}
