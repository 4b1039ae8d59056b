use super::{check_disjoint, clamp_mi, DISCRETE_CLAMP_TOL, PMF_MASS_TOL};
use crate::error::{Error, Result};

/// Dense joint pmf over named finite-alphabet variables.
///
/// Entries are stored row-major with the first variable varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    labels: Vec<String>,
    sizes: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        sizes: Vec<usize>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != sizes.len() {
            return Err(Error::Argument(format!(
                "{} labels but {} alphabet sizes",
                labels.len(),
                sizes.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Argument(format!("duplicate label `{l}`")));
            }
        }
        if sizes.contains(&0) {
            return Err(Error::Argument("alphabet sizes must be >= 1".into()));
        }
        let cells: usize = sizes.iter().product();
        if probs.len() != cells {
            return Err(Error::Argument(format!(
                "expected {cells} probabilities, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Argument("probabilities must lie in [0, 1]".into()));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > PMF_MASS_TOL {
            return Err(Error::Argument(format!("total mass {mass} is not 1")));
        }
        Ok(Self {
            labels,
            sizes,
            probs,
        })
    }

    /// Product pmf of independent single-variable marginals.
    pub fn independent(marginals: &[(&str, &[f64])]) -> Result<Self> {
        let labels: Vec<&str> = marginals.iter().map(|(l, _)| *l).collect();
        let sizes: Vec<usize> = marginals.iter().map(|(_, p)| p.len()).collect();
        let mut probs = vec![1.0];
        for (_, p) in marginals {
            probs = probs
                .iter()
                .flat_map(|a| p.iter().map(move |b| a * b))
                .collect();
        }
        Self::new(labels, sizes, probs)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    fn indices(&self, labels: &[&str]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l)).collect()
    }

    /// Marginal table over `vars` (in the given order).
    pub fn marginal(&self, labels: &[&str]) -> Result<JointPmf> {
        let vars = self.indices(labels)?;
        let probs = self.marginal_by_index(&vars);
        Ok(JointPmf {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            sizes: vars.iter().map(|&v| self.sizes[v]).collect(),
            probs,
        })
    }

    fn marginal_by_index(&self, vars: &[usize]) -> Vec<f64> {
        let out_len: usize = vars.iter().map(|&v| self.sizes[v]).product();
        let mut out = vec![0.0; out_len];
        let mut digits = vec![0usize; self.sizes.len()];
        for &p in &self.probs {
            if p > 0.0 {
                let idx = vars
                    .iter()
                    .fold(0usize, |acc, &v| acc * self.sizes[v] + digits[v]);
                out[idx] += p;
            }
            // odometer increment, last variable fastest
            for d in (0..digits.len()).rev() {
                digits[d] += 1;
                if digits[d] < self.sizes[d] {
                    break;
                }
                digits[d] = 0;
            }
        }
        out
    }

    fn entropy_by_index(&self, vars: &[usize]) -> f64 {
        if vars.is_empty() {
            return 0.0;
        }
        self.marginal_by_index(vars)
            .into_iter()
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum()
    }
}

/// Shannon entropy `H(subset)` in bits.
pub fn entropy_discrete(pmf: &JointPmf, subset: &[&str]) -> Result<f64> {
    let vars = pmf.indices(subset)?;
    Ok(pmf.entropy_by_index(&vars).max(0.0))
}

/// Conditional mutual information `I(A;B|C)` in bits.
pub fn mutual_info_discrete(pmf: &JointPmf, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    let (a, b, c) = (pmf.indices(a)?, pmf.indices(b)?, pmf.indices(c)?);
    check_disjoint([&a, &b, &c])?;
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let union = |x: &[usize], y: &[usize]| -> Vec<usize> { x.iter().chain(y).copied().collect() };
    let ac = union(&a, &c);
    let bc = union(&b, &c);
    let abc = union(&ac, &b);
    let raw = pmf.entropy_by_index(&ac) + pmf.entropy_by_index(&bc)
        - pmf.entropy_by_index(&c)
        - pmf.entropy_by_index(&abc);
    clamp_mi(raw, DISCRETE_CLAMP_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h2(p: f64) -> f64 {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }

    #[test]
    fn uniform_bit_has_one_bit() {
        let pmf = JointPmf::new(["X"], vec![2], vec![0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(
            entropy_discrete(&pmf, &["X"]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn point_mass_has_zero_entropy() {
        let pmf = JointPmf::new(["X"], vec![3], vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(entropy_discrete(&pmf, &["X"]).unwrap(), 0.0);
    }

    #[test]
    fn three_point_entropy() {
        let pmf = JointPmf::new(["X"], vec![3], vec![0.5, 0.25, 0.25]).unwrap();
        assert_abs_diff_eq!(
            entropy_discrete(&pmf, &["X"]).unwrap(),
            1.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn independent_variables_share_nothing() {
        let pmf = JointPmf::independent(&[("A", &[0.3, 0.7]), ("B", &[0.1, 0.6, 0.3])]).unwrap();
        assert_abs_diff_eq!(
            mutual_info_discrete(&pmf, &["A"], &["B"], &[]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn copy_carries_one_bit() {
        let pmf = JointPmf::new(["A", "B"], vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(
            mutual_info_discrete(&pmf, &["A"], &["B"], &[]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn binary_symmetric_channel() {
        let e = 0.11;
        let pmf = JointPmf::new(
            ["X", "Y"],
            vec![2, 2],
            vec![0.5 * (1.0 - e), 0.5 * e, 0.5 * e, 0.5 * (1.0 - e)],
        )
        .unwrap();
        let mi = mutual_info_discrete(&pmf, &["X"], &["Y"], &[]).unwrap();
        assert_abs_diff_eq!(mi, 1.0 - h2(e), epsilon = 1e-12);
        assert!((mi - 0.5).abs() < 0.001);
    }

    #[test]
    fn xor_needs_conditioning() {
        // Z = X xor Y with X, Y uniform: I(X;Z) = 0 but I(X;Z|Y) = 1.
        let mut probs = vec![0.0; 8];
        for x in 0..2 {
            for y in 0..2 {
                probs[x * 4 + y * 2 + (x ^ y)] = 0.25;
            }
        }
        let pmf = JointPmf::new(["X", "Y", "Z"], vec![2, 2, 2], probs).unwrap();
        assert_abs_diff_eq!(
            mutual_info_discrete(&pmf, &["X"], &["Z"], &[]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            mutual_info_discrete(&pmf, &["X"], &["Z"], &["Y"]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(JointPmf::new(["X"], vec![2], vec![0.5, 0.6]).is_err());
        assert!(JointPmf::new(["X"], vec![0], vec![]).is_err());
        assert!(JointPmf::new(["X", "X"], vec![1, 1], vec![1.0]).is_err());
        let pmf = JointPmf::new(["A", "B"], vec![2, 2], vec![0.25; 4]).unwrap();
        assert!(matches!(
            mutual_info_discrete(&pmf, &["A"], &["A"], &[]),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            entropy_discrete(&pmf, &["Q"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn marginal_keeps_requested_order() {
        let pmf = JointPmf::new(["A", "B"], vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let m = pmf.marginal(&["B", "A"]).unwrap();
        assert_eq!(m.probs(), &[0.1, 0.3, 0.2, 0.4]);
    }
}
