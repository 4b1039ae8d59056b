//! Exact mutual-information engines.
//!
//! Two evaluators share one convention: `I(A;B|C)` in bits for pairwise
//! disjoint label sets, with an empty `C` meaning no conditioning.
//!
//! - [`JointPmf`] works on dense finite-alphabet tables.
//! - [`GaussianSystem`] works on a covariance matrix through determinant
//!   ratios, `c * log2(|S_AC| |S_BC| / (|S_C| |S_ABC|))`, where `c` is 1/2 for
//!   real variables and 1 for circularly-symmetric complex ones.

mod discrete;
mod gaussian;

pub use discrete::{entropy_discrete, mutual_info_discrete, JointPmf};
pub use gaussian::{mutual_info_gaussian, FieldKind, GaussianSystem, MiEvaluator, VarSet};

use crate::error::{Error, Result};

/// Total mass tolerance for pmfs.
pub const PMF_MASS_TOL: f64 = 1e-12;
/// Symmetry / PSD tolerance for covariances.
pub const COV_TOL: f64 = 1e-10;
/// Relative tolerance below which a sub-determinant is considered singular.
pub const DET_REL_TOL: f64 = 1e-12;
/// Largest negative Gaussian MI that is silently clamped to zero.
pub const GAUSSIAN_CLAMP_TOL: f64 = 1e-9;
/// Largest negative discrete MI that is silently clamped to zero.
pub const DISCRETE_CLAMP_TOL: f64 = 1e-12;

fn check_disjoint(sets: [&[usize]; 3]) -> Result<()> {
    for (i, a) in sets.iter().enumerate() {
        for b in sets.iter().skip(i + 1) {
            if a.iter().any(|x| b.contains(x)) {
                return Err(Error::Argument(
                    "label sets passed to mutual information must be disjoint".into(),
                ));
            }
        }
    }
    Ok(())
}

fn clamp_mi(raw: f64, tol: f64) -> Result<f64> {
    if raw >= 0.0 {
        Ok(raw)
    } else if raw >= -tol {
        Ok(0.0)
    } else {
        Err(Error::Invariant(format!(
            "mutual information {raw:e} is negative beyond tolerance"
        )))
    }
}
