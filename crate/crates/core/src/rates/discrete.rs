//! GQF and CF regions on discrete memoryless channels, evaluated exactly on
//! the composed joint pmfs of the two slots.
//!
//! The input distribution factors as
//! `p(x11) p(x21) p(x12) p(x22) p(xR) p(ŷR | yR)`. Slot 1 is described by
//! `p(yD1, yR | x11, x21)` and slot 2 by `p(yD2 | x12, x22, xR)`. The bound
//! expressions are the same as in [`gqf`](super::gqf).

use crate::channel::{SlotSplit, X11, X12, X21, X22, XR, YD1, YD2, YR, YR_HAT};
use crate::error::{Error, Result};
use crate::info::{mutual_info_discrete, JointPmf, PMF_MASS_TOL};

use super::gqf::GqfBounds;
use super::{Achievability, RateRegion};

/// A discrete memoryless half-duplex MARC with a fixed input distribution and
/// relay quantizer.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMarc {
    /// Marginals of X11, X21, X12, X22, XR.
    inputs: [Vec<f64>; 5],
    /// `slot1[x11][x21][yd1][yr]`, flattened row-major.
    slot1: Vec<f64>,
    yd1_size: usize,
    yr_size: usize,
    /// `quantizer[yr][yq]`, flattened row-major.
    quantizer: Vec<f64>,
    yq_size: usize,
    /// `slot2[x12][x22][xr][yd2]`, flattened row-major.
    slot2: Vec<f64>,
    yd2_size: usize,
}

fn check_pmf(p: &[f64], what: &str) -> Result<()> {
    if p.is_empty() || p.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Argument(format!(
            "{what}: entries must lie in [0, 1]"
        )));
    }
    let mass: f64 = p.iter().sum();
    if (mass - 1.0).abs() > PMF_MASS_TOL {
        return Err(Error::Argument(format!("{what}: mass {mass} is not 1")));
    }
    Ok(())
}

/// Checks that `table` holds `rows` conditional pmfs of length `width`.
fn check_kernel(table: &[f64], rows: usize, width: usize, what: &str) -> Result<()> {
    if width == 0 || table.len() != rows * width {
        return Err(Error::Argument(format!(
            "{what}: expected {rows} x {width} entries, got {}",
            table.len()
        )));
    }
    table
        .chunks(width)
        .enumerate()
        .try_for_each(|(i, row)| check_pmf(row, &format!("{what} row {i}")))
}

impl DiscreteMarc {
    /// `inputs` are the marginals of `[X11, X21, X12, X22, XR]`. Alphabet sizes
    /// of the outputs are `yd1_size`, `yr_size`, `yq_size` and `yd2_size`; the
    /// kernel tables are row-major with the conditioning variables first.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        inputs: [Vec<f64>; 5],
        slot1: Vec<f64>,
        yd1_size: usize,
        yr_size: usize,
        quantizer: Vec<f64>,
        yq_size: usize,
        slot2: Vec<f64>,
        yd2_size: usize,
    ) -> Result<Self> {
        let names = [X11, X21, X12, X22, XR];
        for (p, name) in inputs.iter().zip(names) {
            check_pmf(p, &format!("marginal of {name}"))?;
        }
        let [s11, s21, s12, s22, sr] = [0, 1, 2, 3, 4].map(|i| inputs[i].len());
        check_kernel(&slot1, s11 * s21, yd1_size * yr_size, "slot-1 channel")?;
        check_kernel(&quantizer, yr_size, yq_size, "quantizer")?;
        check_kernel(&slot2, s12 * s22 * sr, yd2_size, "slot-2 channel")?;
        Ok(Self {
            inputs,
            slot1,
            yd1_size,
            yr_size,
            quantizer,
            yq_size,
            slot2,
            yd2_size,
        })
    }

    /// Builds the model from a joint input pmf over `X11, X21, X12, X22, XR`,
    /// which must factor into its marginals.
    #[allow(clippy::too_many_arguments)]
    pub fn from_joint_inputs(
        joint: &JointPmf,
        slot1: Vec<f64>,
        yd1_size: usize,
        yr_size: usize,
        quantizer: Vec<f64>,
        yq_size: usize,
        slot2: Vec<f64>,
        yd2_size: usize,
    ) -> Result<Self> {
        let names = [X11, X21, X12, X22, XR];
        let ordered = joint.marginal(&names)?;
        let marginals: Vec<Vec<f64>> = names
            .iter()
            .map(|n| Ok(joint.marginal(&[n])?.probs().to_vec()))
            .collect::<Result<_>>()?;
        let pairs: Vec<(&str, &[f64])> = names
            .iter()
            .zip(&marginals)
            .map(|(n, p)| (*n, p.as_slice()))
            .collect();
        let product = JointPmf::independent(&pairs)?;
        let worst = product
            .probs()
            .iter()
            .zip(ordered.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if worst > PMF_MASS_TOL {
            return Err(Error::Argument(format!(
                "input distribution does not factor (max deviation {worst:e})"
            )));
        }
        let inputs: [Vec<f64>; 5] = marginals
            .try_into()
            .map_err(|_| Error::Invariant("five marginals expected".into()))?;
        Self::new(
            inputs, slot1, yd1_size, yr_size, quantizer, yq_size, slot2, yd2_size,
        )
    }

    /// Joint pmf over `X11, X21, YR, YR_hat, YD1`.
    pub fn slot1_pmf(&self) -> Result<JointPmf> {
        let (p11, p21) = (&self.inputs[0], &self.inputs[1]);
        let (nd, nr, nq) = (self.yd1_size, self.yr_size, self.yq_size);
        let mut probs = Vec::with_capacity(p11.len() * p21.len() * nr * nq * nd);
        for (a, pa) in p11.iter().enumerate() {
            for (b, pb) in p21.iter().enumerate() {
                let row = &self.slot1[(a * p21.len() + b) * nd * nr..][..nd * nr];
                for r in 0..nr {
                    for q in 0..nq {
                        let pq = self.quantizer[r * nq + q];
                        for d in 0..nd {
                            probs.push(pa * pb * row[d * nr + r] * pq);
                        }
                    }
                }
            }
        }
        JointPmf::new(
            [X11, X21, YR, YR_HAT, YD1],
            vec![p11.len(), p21.len(), nr, nq, nd],
            probs,
        )
    }

    /// Joint pmf over `X12, X22, XR, YD2`.
    pub fn slot2_pmf(&self) -> Result<JointPmf> {
        let (p12, p22, pr) = (&self.inputs[2], &self.inputs[3], &self.inputs[4]);
        let nd = self.yd2_size;
        let mut probs = Vec::with_capacity(p12.len() * p22.len() * pr.len() * nd);
        let mut row = self.slot2.chunks(nd);
        for pa in p12 {
            for pb in p22 {
                for pc in pr {
                    let kernel = row.next().expect("kernel size checked in new");
                    probs.extend(kernel.iter().map(|k| pa * pb * pc * k));
                }
            }
        }
        JointPmf::new(
            [X12, X22, XR, YD2],
            vec![p12.len(), p22.len(), pr.len(), nd],
            probs,
        )
    }
}

/// The six GQF right-hand sides together with the quantizer floor
/// `beta I(YR; ŶR)` and the CF side quantities.
struct DiscreteTerms {
    bounds: GqfBounds,
    floor: f64,
    cf_needed: f64,
    cf_available: f64,
}

fn discrete_terms(model: &DiscreteMarc, beta: SlotSplit) -> Result<DiscreteTerms> {
    let s1 = model.slot1_pmf()?;
    let s2 = model.slot2_pmf()?;
    let i1 = |a: &[&str], b: &[&str], c: &[&str]| mutual_info_discrete(&s1, a, b, c);
    let i2 = |a: &[&str], b: &[&str], c: &[&str]| mutual_info_discrete(&s2, a, b, c);
    let (w1, w2) = (beta.value(), beta.second());
    let q = YR_HAT;
    let bounds = GqfBounds {
        b_r1: w1 * i1(&[X11], &[YD1, q], &[X21])? + w2 * i2(&[X12], &[YD2], &[X22, XR])?,
        b_r1u: w1 * (i1(&[X11, q], &[X21, YD1], &[])? + i1(&[X11], &[q], &[])?)
            + w2 * i2(&[X12, XR], &[YD2], &[X22])?,
        b_r2: w1 * i1(&[X21], &[YD1, q], &[X11])? + w2 * i2(&[X22], &[YD2], &[X12, XR])?,
        b_r2u: w1 * (i1(&[X21, q], &[X11, YD1], &[])? + i1(&[X21], &[q], &[])?)
            + w2 * i2(&[X22, XR], &[YD2], &[X12])?,
        b_r12: w1 * i1(&[X11, X21], &[YD1, q], &[])? + w2 * i2(&[X12, X22], &[YD2], &[XR])?,
        b_r12u: w1 * (i1(&[X11, X21, q], &[YD1], &[])? + i1(&[X11, X21], &[q], &[])?)
            + w2 * i2(&[X12, X22, XR], &[YD2], &[])?,
    };
    let floor = w1 * i1(&[YR], &[q], &[])?;
    Ok(DiscreteTerms {
        bounds,
        floor,
        cf_needed: floor - w1 * i1(&[YD1], &[q], &[])?,
        cf_available: w2 * i2(&[XR], &[YD2], &[])?,
    })
}

/// The six GQF bounds and the quantizer floor `beta I(YR; ŶR)`.
pub fn gqf_bounds_discrete(model: &DiscreteMarc, beta: SlotSplit) -> Result<(GqfBounds, f64)> {
    let t = discrete_terms(model, beta)?;
    Ok((t.bounds, t.floor))
}

/// GQF region for index rate `ru`; errors when `ru` is below the floor.
pub fn gqf_region_discrete(model: &DiscreteMarc, beta: SlotSplit, ru: f64) -> Result<RateRegion> {
    let t = discrete_terms(model, beta)?;
    if ru < t.floor - 1e-12 * t.floor.max(1.0) {
        return Err(Error::Infeasible { ru, floor: t.floor });
    }
    Ok(t.bounds.region(ru))
}

/// Classic CF region, feasible when
/// `beta [I(YR;ŶR) - I(YD1;ŶR)] < (1 - beta) I(XR; YD2)`.
pub fn cf_region_discrete(model: &DiscreteMarc, beta: SlotSplit) -> Result<Achievability> {
    let t = discrete_terms(model, beta)?;
    Ok(if t.cf_needed < t.cf_available {
        Achievability::Feasible(t.bounds.direct_terms())
    } else {
        Achievability::Infeasible
    })
}
