//! Integration regions: boxes, Euclidean balls, finite point sets and
//! disjoint unions of these.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::ln_gamma;
use crate::norm::{l2_norm, NormP};

/// A distance together with an absolute error bound (`0` when exact).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceBound {
    pub value: f64,
    pub error_bound: f64,
}

impl DistanceBound {
    pub fn exact(value: f64) -> Self {
        DistanceBound {
            value,
            error_bound: 0.0,
        }
    }

    pub(crate) fn min(self, other: DistanceBound) -> DistanceBound {
        if other.value < self.value {
            other
        } else {
            self
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Closed Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Finite set carrying the counting measure.
    FiniteSet { points: Vec<Vec<f64>> },
    /// Union of members whose bounding boxes are pairwise disjoint.
    Union { members: Vec<Domain> },
}

impl Domain {
    pub fn new_box(lo: Vec<f64>, hi: Vec<f64>) -> Result<Domain> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::InvalidDomain(format!(
                "box bounds must be non-empty and of equal length ({} vs {})",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("box bounds must be finite".into()));
        }
        if let Some(k) = (0..lo.len()).find(|&k| lo[k] >= hi[k]) {
            return Err(Error::InvalidDomain(format!(
                "box needs lo < hi componentwise; axis {k} has [{}, {}]",
                lo[k], hi[k]
            )));
        }
        Ok(Domain::Box { lo, hi })
    }

    /// The cube `[-a, a]^n`.
    pub fn cube(n: usize, a: f64) -> Result<Domain> {
        Domain::new_box(vec![-a; n], vec![a; n])
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Result<Domain> {
        if center.is_empty() || center.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDomain("ball centre must be finite and non-empty".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidDomain(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn new_finite(points: Vec<Vec<f64>>) -> Result<Domain> {
        let d = points
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidDomain("finite set needs at least one point".into()))?;
        if d == 0 || points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidDomain("finite set points must share a positive dimension".into()));
        }
        Ok(Domain::FiniteSet { points })
    }

    pub fn new_union(members: Vec<Domain>) -> Result<Domain> {
        if members.is_empty() {
            return Err(Error::InvalidDomain("union needs at least one member".into()));
        }
        let d = members[0].dim();
        if members.iter().any(|m| m.dim() != d) {
            return Err(Error::InvalidDomain("union members must share a dimension".into()));
        }
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let (alo, ahi) = members[i].bounding_box();
                let (blo, bhi) = members[j].bounding_box();
                let separated = (0..d).any(|k| ahi[k] < blo[k] || bhi[k] < alo[k]);
                if !separated {
                    return Err(Error::InvalidDomain(format!(
                        "union members {i} and {j} are not separated"
                    )));
                }
            }
        }
        Ok(Domain::Union { members })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Ball { center, .. } => center.len(),
            Domain::FiniteSet { points } => points[0].len(),
            Domain::Union { members } => members[0].dim(),
        }
    }

    pub fn is_finite_set(&self) -> bool {
        matches!(self, Domain::FiniteSet { .. })
    }

    /// Lebesgue measure (counting measure for finite sets).
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Box { lo, hi } => lo.iter().zip(hi).map(|(l, h)| h - l).product(),
            Domain::Ball { center, radius } => ball_volume(center.len(), *radius),
            Domain::FiniteSet { points } => points.len() as f64,
            Domain::Union { members } => members.iter().map(Domain::volume).sum(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h),
            Domain::Ball { center, radius } => {
                x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
                    <= radius * radius
            }
            Domain::FiniteSet { points } => points.iter().any(|p| p.as_slice() == x),
            Domain::Union { members } => members.iter().any(|m| m.contains(x)),
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Box { lo, hi } => (lo.clone(), hi.clone()),
            Domain::Ball { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Domain::FiniteSet { points } => bbox_of(points.iter().map(Vec::as_slice)),
            Domain::Union { members } => {
                let boxes: Vec<_> = members.iter().map(Domain::bounding_box).collect();
                let d = self.dim();
                let lo = (0..d)
                    .map(|k| boxes.iter().map(|b| b.0[k]).fold(f64::INFINITY, f64::min))
                    .collect();
                let hi = (0..d)
                    .map(|k| boxes.iter().map(|b| b.1[k]).fold(f64::NEG_INFINITY, f64::max))
                    .collect();
                (lo, hi)
            }
        }
    }

    /// `sup ||x - y||_p` over the domain (an upper bound for unions).
    pub fn diameter(&self, p: NormP) -> f64 {
        match self {
            Domain::Box { lo, hi } => p.distance(lo, hi),
            Domain::Ball { center, radius } => 2.0 * radius * p.p_over_l2(center.len()),
            Domain::FiniteSet { points } => {
                let mut best = 0.0f64;
                for (i, a) in points.iter().enumerate() {
                    for b in &points[i + 1..] {
                        best = best.max(p.distance(a, b));
                    }
                }
                best
            }
            Domain::Union { .. } => {
                let (lo, hi) = self.bounding_box();
                p.distance(&lo, &hi)
            }
        }
    }

    /// Uniform sample (uniform over points for finite sets).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Domain::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| l + rng.random::<f64>() * (h - l))
                .collect(),
            Domain::Ball { center, radius } => {
                let u = unit_ball_l2(center.len(), rng);
                center.iter().zip(&u).map(|(c, v)| c + radius * v).collect()
            }
            Domain::FiniteSet { points } => points[rng.random_range(0..points.len())].clone(),
            Domain::Union { members } => {
                let total = self.volume();
                let mut t = rng.random::<f64>() * total;
                for m in members {
                    let v = m.volume();
                    if t < v {
                        return m.sample(rng);
                    }
                    t -= v;
                }
                members[members.len() - 1].sample(rng)
            }
        }
    }

    /// `inf { ||x - z||_p : z not in the domain }` for `x` inside it.
    pub fn distance_to_complement(&self, x: &[f64], p: NormP) -> DistanceBound {
        match self {
            Domain::Box { lo, hi } => DistanceBound::exact(
                x.iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (l, h))| (v - l).min(h - v))
                    .fold(f64::INFINITY, f64::min)
                    .max(0.0),
            ),
            Domain::Ball { center, radius } => l2_ball_exit(x, center, *radius, p),
            // every neighbourhood of a point leaves a finite set
            Domain::FiniteSet { .. } => DistanceBound::exact(0.0),
            Domain::Union { members } => members
                .iter()
                .find(|m| m.contains(x))
                .map(|m| m.distance_to_complement(x, p))
                .unwrap_or(DistanceBound::exact(0.0)),
        }
    }

    /// `inf { ||x - z||_p : z in the domain }` (zero inside).
    pub fn distance_to(&self, x: &[f64], p: NormP) -> DistanceBound {
        match self {
            Domain::Box { lo, hi } => {
                let excess: Vec<f64> = x
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (l, h))| (l - v).max(v - h).max(0.0))
                    .collect();
                DistanceBound::exact(p.norm(&excess))
            }
            Domain::Ball { center, radius } => l2_ball_entry(x, center, *radius, p),
            Domain::FiniteSet { points } => DistanceBound::exact(
                points
                    .iter()
                    .map(|q| p.distance(x, q))
                    .fold(f64::INFINITY, f64::min),
            ),
            Domain::Union { members } => members
                .iter()
                .map(|m| m.distance_to(x, p))
                .fold(DistanceBound::exact(f64::INFINITY), DistanceBound::min),
        }
    }

    /// Extreme points: box corners (members' corners for unions, up to 2^12 per box).
    pub fn vertices(&self) -> Vec<Vec<f64>> {
        match self {
            Domain::Box { lo, hi } if lo.len() <= 12 => {
                let d = lo.len();
                (0..1usize << d)
                    .map(|mask| {
                        (0..d)
                            .map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] })
                            .collect()
                    })
                    .collect()
            }
            Domain::Union { members } => members.iter().flat_map(Domain::vertices).collect(),
            _ => Vec::new(),
        }
    }

    /// The image of the domain under `x -> c x`.
    pub fn scaled(&self, c: f64) -> Domain {
        let s = |v: &[f64]| v.iter().map(|x| c * x).collect::<Vec<_>>();
        match self {
            Domain::Box { lo, hi } => Domain::Box { lo: s(lo), hi: s(hi) },
            Domain::Ball { center, radius } => Domain::Ball {
                center: s(center),
                radius: c * radius,
            },
            Domain::FiniteSet { points } => Domain::FiniteSet {
                points: points.iter().map(|p| s(p)).collect(),
            },
            Domain::Union { members } => Domain::Union {
                members: members.iter().map(|m| m.scaled(c)).collect(),
            },
        }
    }

    /// The bounding box grown by `margin` on every side.
    pub fn inflated_box(&self, margin: f64) -> Domain {
        let (lo, hi) = self.bounding_box();
        Domain::Box {
            lo: lo.iter().map(|v| v - margin).collect(),
            hi: hi.iter().map(|v| v + margin).collect(),
        }
    }
}

pub(crate) fn bbox_of<'a>(points: impl Iterator<Item = &'a [f64]>) -> (Vec<f64>, Vec<f64>) {
    let mut lo: Vec<f64> = Vec::new();
    let mut hi: Vec<f64> = Vec::new();
    for p in points {
        if lo.is_empty() {
            lo = p.to_vec();
            hi = p.to_vec();
        } else {
            for k in 0..p.len() {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    (lo, hi)
}

/// `pi^(n/2) / Gamma(n/2 + 1) * r^n`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    let n = n as f64;
    (0.5 * n * PI.ln() - ln_gamma(0.5 * n + 1.0) + n * r.ln()).exp()
}

/// Uniform point in the Euclidean unit ball.
pub(crate) fn unit_ball_l2<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = l2_norm(&g);
        if n > 0.0 {
            let r = rng.random::<f64>().powf(1.0 / d as f64);
            return g.iter().map(|v| v * r / n).collect();
        }
    }
}

/// `p`-distance from an interior point to the complement of a Euclidean ball.
/// Exact for `p` in {1, 2, inf}; otherwise bracketed through norm equivalence.
pub(crate) fn l2_ball_exit(x: &[f64], center: &[f64], radius: f64, p: NormP) -> DistanceBound {
    let y: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
    let d = y.len();
    let r2 = l2_norm(&y);
    let slack = (radius - r2).max(0.0);
    if p.is(2.0) || d == 1 {
        return DistanceBound::exact(slack);
    }
    let sq = y.iter().map(|v| v * v).sum::<f64>();
    let rem = (radius * radius - sq).max(0.0);
    if p.is(f64::INFINITY) {
        let l1: f64 = y.iter().map(|v| v.abs()).sum();
        let dd = d as f64;
        return DistanceBound::exact(((l1 * l1 + dd * rem).sqrt() - l1) / dd);
    }
    if p.is(1.0) {
        let v = y
            .iter()
            .map(|v| (rem + v * v).sqrt() - v.abs())
            .fold(f64::INFINITY, f64::min);
        return DistanceBound::exact(v.max(0.0));
    }
    let dir_norm = if r2 > 0.0 {
        let u: Vec<f64> = y.iter().map(|v| v / r2).collect();
        p.norm(&u)
    } else {
        1.0
    };
    let upper = slack * dir_norm;
    let lower = slack / p.l2_over_p(d);
    DistanceBound {
        value: upper,
        error_bound: upper - lower,
    }
}

/// `p`-distance from a point to a Euclidean ball (zero inside).
pub(crate) fn l2_ball_entry(x: &[f64], center: &[f64], radius: f64, p: NormP) -> DistanceBound {
    let y: Vec<f64> = x.iter().zip(center).map(|(a, c)| a - c).collect();
    let d = y.len();
    let r2 = l2_norm(&y);
    if r2 <= radius {
        return DistanceBound::exact(0.0);
    }
    let gap = r2 - radius;
    if p.is(2.0) || d == 1 {
        return DistanceBound::exact(gap);
    }
    let abs: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    if p.is(f64::INFINITY) {
        // smallest r with || (|y| - r)_+ ||_2 <= radius
        let reach = |r: f64| -> f64 {
            abs.iter()
                .map(|v| (v - r).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let hi0 = abs.iter().cloned().fold(0.0, f64::max);
        return DistanceBound::exact(bisect_decreasing(reach, radius, 0.0, hi0));
    }
    if p.is(1.0) {
        // smallest r with dist_2(y, r B_1) <= radius
        let reach = |r: f64| -> f64 {
            let proj = project_l1_ball(&abs, r);
            abs.iter()
                .zip(&proj)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let hi0: f64 = abs.iter().sum();
        return DistanceBound::exact(bisect_decreasing(reach, radius, 0.0, hi0));
    }
    let u: Vec<f64> = y.iter().map(|v| v / r2).collect();
    let upper = gap * p.norm(&u);
    let lower = gap / p.l2_over_p(d);
    DistanceBound {
        value: upper,
        error_bound: upper - lower,
    }
}

/// Smallest `r` in `[lo, hi]` with `f(r) <= target` for non-increasing `f`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    if f(lo) <= target {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Euclidean projection of a non-negative vector onto `{ ||v||_1 <= r }`.
fn project_l1_ball(a: &[f64], r: f64) -> Vec<f64> {
    let total: f64 = a.iter().sum();
    if total <= r {
        return a.to_vec();
    }
    let mut sorted = a.to_vec();
    sorted.sort_by(|x, y| y.total_cmp(x));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        cum += v;
        let t = (cum - r) / (i + 1) as f64;
        if *v >= t {
            theta = t;
        }
    }
    a.iter().map(|v| (v - theta).max(0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn box_validation() {
        assert!(Domain::new_box(vec![0.0], vec![0.0]).is_err());
        assert!(Domain::new_box(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Domain::new_ball(vec![0.0], 0.0).is_err());
        let u = Domain::new_union(vec![
            Domain::new_box(vec![-1.0], vec![0.5]).unwrap(),
            Domain::new_box(vec![0.0], vec![1.0]).unwrap(),
        ]);
        assert!(u.is_err());
    }

    #[test]
    fn volumes() {
        assert_eq!(Domain::cube(3, 0.5).unwrap().volume(), 1.0);
        let disk = Domain::new_ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!((disk.volume() - PI).abs() < 1e-12);
        let b3 = Domain::new_ball(vec![0.0; 3], 2.0).unwrap();
        assert!((b3.volume() - 4.0 / 3.0 * PI * 8.0).abs() < 1e-11);
    }

    #[test]
    fn samples_stay_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let doms = [
            Domain::cube(3, 2.0).unwrap(),
            Domain::new_ball(vec![1.0, -1.0, 0.5], 0.7).unwrap(),
            Domain::new_union(vec![
                Domain::new_box(vec![-1.0], vec![-0.01]).unwrap(),
                Domain::new_box(vec![0.01], vec![1.0]).unwrap(),
            ])
            .unwrap(),
            Domain::new_finite(vec![vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap(),
        ];
        for d in &doms {
            for _ in 0..5000 {
                let x = d.sample(&mut rng);
                assert!(d.contains(&x), "{d:?} produced {x:?}");
            }
        }
    }

    #[test]
    fn box_distances() {
        let b = Domain::cube(2, 1.0).unwrap();
        assert_eq!(b.distance_to_complement(&[0.5, -0.25], NormP::L1).value, 0.5);
        assert_eq!(b.distance_to(&[2.0, 3.0], NormP::L1).value, 3.0);
        assert_eq!(b.distance_to(&[2.0, 3.0], NormP::LINF).value, 2.0);
    }

    // brute force over sphere directions in 2D
    fn exit_brute(y: [f64; 2], r: f64, p: NormP) -> f64 {
        let n = 200_000;
        (0..n)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / n as f64;
                p.distance(&y, &[r * t.cos(), r * t.sin()])
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn ball_distances_match_brute_force() {
        for p in [NormP::L1, NormP::LINF, NormP::L2] {
            for y in [[0.2, 0.1], [-0.5, 0.3], [0.0, 0.0]] {
                let exact = l2_ball_exit(&y, &[0.0, 0.0], 1.0, p).value;
                assert!((exact - exit_brute(y, 1.0, p)).abs() < 1e-4, "{p} {y:?}");
            }
            for y in [[1.5, 0.2], [-2.0, 1.5], [0.9, 0.9]] {
                let exact = l2_ball_entry(&y, &[0.0, 0.0], 1.0, p).value;
                let brute = exit_brute(y, 1.0, p);
                assert!((exact - brute).abs() < 1e-4, "{p} {y:?} {exact} {brute}");
            }
        }
    }

    #[test]
    fn bracket_contains_truth_for_other_norms() {
        let p = NormP::Finite(3.0);
        for y in [[0.2, 0.1], [-0.5, 0.3]] {
            let b = l2_ball_exit(&y, &[0.0, 0.0], 1.0, p);
            let truth = exit_brute(y, 1.0, p);
            assert!(b.value + 1e-6 >= truth && b.value - b.error_bound <= truth + 1e-6);
        }
    }
}
