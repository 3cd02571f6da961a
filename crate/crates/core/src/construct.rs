//! The vector field `H`, class prediction, ε-stable sets and the hat-function
//! rounding `G`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{extended_pointwise, pointwise_distance, BoundaryMode};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::{ExtLabel, ExtendedField};
use crate::norm::NormP;
use crate::stability::block_rng;

/// First index (1-based) attaining the maximum of `v`.
pub fn class_prediction(v: &[f64]) -> Result<usize> {
    if v.is_empty() {
        return Err(Error::InvalidParameter("class prediction of an empty vector".into()));
    }
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    Ok(best + 1)
}

/// `H(x)`: the distance to the boundary placed in the slot of `f̄(x)`.
#[derive(Clone, Debug)]
pub struct HField {
    field: ExtendedField,
    p: NormP,
    boundary: BoundaryMode,
    slots: Vec<ExtLabel>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HValue {
    pub vector: Vec<f64>,
    pub label: ExtLabel,
    /// 1-based slot of `label`.
    pub slot: usize,
    pub error_bound: f64,
}

impl HField {
    pub fn new(field: ExtendedField, p: NormP, boundary: BoundaryMode) -> HField {
        let slots = field.slots();
        HField {
            field,
            p,
            boundary,
            slots,
        }
    }

    pub fn field(&self) -> &ExtendedField {
        &self.field
    }

    pub fn p(&self) -> NormP {
        self.p
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    /// `Ȳ` in slot order.
    pub fn slots(&self) -> &[ExtLabel] {
        &self.slots
    }

    pub fn q(&self) -> usize {
        self.slots.len()
    }

    /// 1-based slot of a label.
    pub fn slot_of(&self, label: ExtLabel) -> Option<usize> {
        self.slots.iter().position(|l| *l == label).map(|i| i + 1)
    }

    /// `H(x)`. Extension mode accepts any `x` in `R^d`; interior mode needs
    /// `x` in `M`.
    pub fn evaluate(&self, x: &[f64]) -> Result<HValue> {
        self.field.base().check_dim(x)?;
        let label = self.field.evaluate(x);
        let (value, error_bound) = match self.boundary {
            BoundaryMode::Extension => {
                let (b, _) = extended_pointwise(&self.field, x, self.p);
                (b.value, b.error_bound)
            }
            BoundaryMode::Interior => {
                let e = pointwise_distance(&self.field, x, self.p, self.boundary)?;
                (e.value, e.error_bound)
            }
        };
        let slot = self.slot_of(label).ok_or(Error::UnknownLabel(label.numeric()))?;
        let mut vector = vec![0.0; self.q()];
        vector[slot - 1] = value;
        Ok(HValue {
            vector,
            label,
            slot,
            error_bound,
        })
    }
}

/// `H(x)` as a plain vector.
pub fn h_field(field: &ExtendedField, x: &[f64], p: NormP, boundary: BoundaryMode) -> Result<Vec<f64>> {
    Ok(HField::new(field.clone(), p, boundary).evaluate(x)?.vector)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub max_ratio: f64,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub pairs: usize,
}

impl LipschitzReport {
    fn empty() -> Self {
        LipschitzReport {
            max_ratio: 0.0,
            witness: None,
            pairs: 0,
        }
    }

    fn consider(&mut self, ratio: f64, x: &[f64], y: &[f64]) {
        self.pairs += 1;
        if ratio > self.max_ratio {
            self.max_ratio = ratio;
            self.witness = Some((x.to_vec(), y.to_vec()));
        }
    }

    fn merge(mut self, other: LipschitzReport) -> LipschitzReport {
        self.pairs += other.pairs;
        if other.max_ratio > self.max_ratio {
            self.max_ratio = other.max_ratio;
            self.witness = other.witness;
        }
        self
    }
}

/// Pairs closer than this are skipped: rounding in `h` would dominate.
const MIN_PAIR_DISTANCE: f64 = 1e-6;
const PAIR_BLOCK: usize = 1024;

/// `max ||H(x) - H(y)||_p / ||x - y||_p` over sampled pairs in `region`.
///
/// Half of the pairs are independent uniform points; the other half pair a
/// uniform `x` with a point at a random multiple (1/2 to 2) of `h(x)`, which
/// straddles the boundary nearest to `x`.
pub fn lipschitz_check_h(h: &HField, region: &Domain, pair_count: usize, seed: u64) -> Result<LipschitzReport> {
    if pair_count == 0 {
        return Err(Error::InvalidParameter("pair_count must be positive".into()));
    }
    let p = h.p();
    let blocks = pair_count.div_ceil(PAIR_BLOCK);
    let reports = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64);
            let mut rep = LipschitzReport::empty();
            let len = PAIR_BLOCK.min(pair_count - b * PAIR_BLOCK);
            for i in 0..len {
                let x = region.sample(&mut rng);
                let hx = h.evaluate(&x)?;
                let y = if (b * PAIR_BLOCK + i).is_multiple_of(2) {
                    region.sample(&mut rng)
                } else {
                    let hv: f64 = hx.vector.iter().sum();
                    let r = hv * rng.random_range(0.5..2.0);
                    let dir: Vec<f64> = (0..x.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let n = p.norm(&dir).max(f64::MIN_POSITIVE);
                    x.iter().zip(&dir).map(|(a, u)| a + r * u / n).collect()
                };
                if h.boundary() == BoundaryMode::Interior && !h.field().domain().contains(&y) {
                    continue;
                }
                let dist = p.distance(&x, &y);
                if dist < MIN_PAIR_DISTANCE {
                    continue;
                }
                let hy = h.evaluate(&y)?;
                rep.consider(p.distance(&hx.vector, &hy.vector) / dist, &x, &y);
            }
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reports.into_iter().fold(LipschitzReport::empty(), LipschitzReport::merge))
}

/// Ratio `||H(x) - H(y)||_p / ||x - y||_p` for one pair; `None` when `x = y`.
pub fn lipschitz_ratio(h: &HField, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    let dist = h.p().distance(x, y);
    if dist == 0.0 {
        return Ok(None);
    }
    let (hx, hy) = (h.evaluate(x)?, h.evaluate(y)?);
    Ok(Some(h.p().distance(&hx.vector, &hy.vector) / dist))
}

/// Lower bound `||(1, -1)||_p / (2 ε)` on the Lipschitz constant of a
/// one-hot field that jumps across a gap of width `2 ε`.
pub fn one_hot_lipschitz_lower_bound(p: NormP, eps: f64) -> f64 {
    p.norm(&[1.0, -1.0]) / (2.0 * eps)
}

/// Largest finite-difference ratio of a scalar function over sampled pairs
/// of `region`, including every pair of its vertices. A lower bound on the
/// Lipschitz constant.
pub fn empirical_lipschitz(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    region: &Domain,
    pair_count: usize,
    p: NormP,
    seed: u64,
) -> Result<LipschitzReport> {
    if pair_count == 0 {
        return Err(Error::InvalidParameter("pair_count must be positive".into()));
    }
    let diam = region.diameter(p);
    let blocks = pair_count.div_ceil(PAIR_BLOCK);
    let mut rep = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64);
            let mut rep = LipschitzReport::empty();
            let len = PAIR_BLOCK.min(pair_count - b * PAIR_BLOCK);
            for i in 0..len {
                let x = region.sample(&mut rng);
                let y = if (b * PAIR_BLOCK + i).is_multiple_of(2) {
                    region.sample(&mut rng)
                } else {
                    // short pairs at log-uniform scales resolve steps
                    let r = diam * 10f64.powf(-6.0 * rng.random::<f64>());
                    let dir: Vec<f64> = (0..x.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let n = p.norm(&dir).max(f64::MIN_POSITIVE);
                    x.iter().zip(&dir).map(|(a, u)| a + r * u / n).collect()
                };
                if !region.contains(&y) {
                    continue;
                }
                let dist = p.distance(&x, &y);
                if dist > 0.0 {
                    rep.consider((f(&x) - f(&y)).abs() / dist, &x, &y);
                }
            }
            rep
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(LipschitzReport::empty(), LipschitzReport::merge);
    let vertices = region.vertices();
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            let dist = p.distance(a, b);
            if dist > 0.0 {
                rep.consider((f(a) - f(b)).abs() / dist, a, b);
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StableSet {
    pub epsilon: f64,
    pub members: Vec<Vec<f64>>,
    /// Grid points of `M` that were tested.
    pub tested: usize,
    /// No tested point had `h > ε`.
    pub empty: bool,
    pub p: NormP,
    pub boundary_mode: BoundaryMode,
    pub resolution: f64,
}

/// Nodes `lo + i * resolution` of the bounding box lying in the domain.
pub fn grid_nodes(domain: &Domain, resolution: f64) -> Result<Vec<Vec<f64>>> {
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter(format!("resolution must be positive, got {resolution}")));
    }
    let (lo, hi) = domain.bounding_box();
    let counts: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| ((h - l) / resolution + 1e-9).floor() as usize + 1)
        .collect();
    let total = counts
        .iter()
        .try_fold(1usize, |a, &c| a.checked_mul(c))
        .filter(|t| *t <= 50_000_000)
        .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
    // snap to multiples of the resolution when the box is aligned with them
    let offset: Vec<Option<f64>> = lo
        .iter()
        .map(|l| {
            let k = l / resolution;
            ((k - k.round()).abs() < 1e-9).then_some(k.round())
        })
        .collect();
    // i / n rounds correctly where i * (1 / n) may not
    let inv = 1.0 / resolution;
    let per_unit = ((inv - inv.round()).abs() < 1e-9 * inv).then_some(inv.round());
    let mut out = Vec::new();
    for mut idx in 0..total {
        let mut x = vec![0.0; lo.len()];
        for k in (0..lo.len()).rev() {
            let i = idx % counts[k];
            idx /= counts[k];
            let v = match offset[k] {
                Some(k0) => match per_unit {
                    Some(n) => (k0 + i as f64) / n,
                    None => (k0 + i as f64) * resolution,
                },
                None => lo[k] + i as f64 * resolution,
            };
            x[k] = v.min(hi[k]);
        }
        if domain.contains(&x) {
            out.push(x);
        }
    }
    Ok(out)
}

/// `M_ε` on a grid: points with `h - error_bound > ε`.
pub fn stable_set(
    field: &ExtendedField,
    epsilon: f64,
    p: NormP,
    boundary: BoundaryMode,
    resolution: f64,
) -> Result<StableSet> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let nodes = grid_nodes(field.domain(), resolution)?;
    let keep = nodes
        .par_iter()
        .map(|x| pointwise_distance(field, x, p, boundary).map(|e| e.value - e.error_bound > epsilon))
        .collect::<Result<Vec<bool>>>()?;
    let tested = nodes.len();
    let members: Vec<Vec<f64>> = nodes
        .into_iter()
        .zip(keep)
        .filter_map(|(x, k)| k.then_some(x))
        .collect();
    Ok(StableSet {
        epsilon,
        empty: members.is_empty(),
        members,
        tested,
        p,
        boundary_mode: boundary,
        resolution,
    })
}

/// Hat function centred at the integer `i` with support `(i-1, i+1)`.
pub fn omega(i: i64, x: f64) -> f64 {
    let c = i as f64;
    if x <= c - 1.0 || x >= c + 1.0 {
        0.0
    } else if x <= c {
        x - (c - 1.0)
    } else {
        (c + 1.0) - x
    }
}

/// `G(x) = (ω_1(g(x)), ..., ω_q(g(x)))`.
pub fn compose_g(g: impl Fn(&[f64]) -> f64, q: usize, x: &[f64]) -> Vec<f64> {
    let v = g(x);
    (1..=q as i64).map(|i| omega(i, v)).collect()
}
