//! Class stability `S = ∫_M h dμ` and its closed forms.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::{BoundaryMode, DistanceSpec, Mode};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::ExtendedField;
use crate::gamma::ln_gamma;
use crate::norm::NormP;

/// Samples per RNG block. Block `b` draws from stream `b` of the seed, so
/// results do not depend on the number of worker threads.
pub const BLOCK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    MonteCarlo,
    Grid,
}

impl std::str::FromStr for Integrator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monte_carlo" | "mc" => Ok(Integrator::MonteCarlo),
            "grid" => Ok(Integrator::Grid),
            _ => Err(Error::Parse(format!("unknown integrator {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Deterministic error from the distance estimator (and, for the grid
    /// integrator, from midpoint quadrature).
    pub error_bound: f64,
    pub samples: usize,
    pub p: NormP,
    pub mode: Mode,
    pub boundary_mode: BoundaryMode,
    pub integrator: Integrator,
    /// Samples whose distance was capped at the domain diameter.
    pub saturated: usize,
}

/// Running moments of a vector-valued sample.
#[derive(Clone, Copy, Debug)]
struct Moments<const N: usize> {
    n: f64,
    mean: [f64; N],
    m2: [f64; N],
}

impl<const N: usize> Moments<N> {
    fn empty() -> Self {
        Moments {
            n: 0.0,
            mean: [0.0; N],
            m2: [0.0; N],
        }
    }

    fn push(&mut self, v: [f64; N]) {
        self.n += 1.0;
        for k in 0..N {
            let delta = v[k] - self.mean[k];
            self.mean[k] += delta / self.n;
            self.m2[k] += delta * (v[k] - self.mean[k]);
        }
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let mut out = Moments::empty();
        out.n = n;
        for k in 0..N {
            let delta = b.mean[k] - a.mean[k];
            out.mean[k] = a.mean[k] + delta * b.n / n;
            out.m2[k] = a.m2[k] + b.m2[k] + delta * delta * a.n * b.n / n;
        }
        out
    }

    fn std_error(&self, k: usize) -> f64 {
        if self.n < 2.0 {
            return 0.0;
        }
        (self.m2[k] / (self.n - 1.0) / self.n).sqrt()
    }
}

/// Pairwise reduction in index order.
fn reduce<T: Copy>(items: &[T], merge: &impl Fn(T, T) -> T, empty: T) -> T {
    match items.len() {
        0 => empty,
        1 => items[0],
        n => {
            let (l, r) = items.split_at(n / 2);
            merge(reduce(l, merge, empty), reduce(r, merge, empty))
        }
    }
}

pub(crate) fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Uniform samples of `domain`, drawn block-wise and reproducible for a
/// fixed `(seed, n)`.
pub fn sample_domain(domain: &Domain, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64);
            let len = BLOCK.min(n - b * BLOCK);
            (0..len).map(|_| domain.sample(&mut rng)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Monte Carlo moments of `f` over uniform samples of `domain`; `f` gets the
/// point and its global sample index.
fn monte_carlo<const N: usize>(
    domain: &Domain,
    samples: usize,
    seed: u64,
    f: impl Fn(&[f64], usize) -> Result<[f64; N]> + Sync,
) -> Result<Moments<N>> {
    let blocks = samples.div_ceil(BLOCK);
    let parts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b as u64);
            let mut m = Moments::<N>::empty();
            let len = BLOCK.min(samples - b * BLOCK);
            for i in 0..len {
                let x = domain.sample(&mut rng);
                let index = b * BLOCK + i;
                let v = f(&x, index).map_err(|e| Error::AtIndex {
                    index,
                    source: Box::new(e),
                })?;
                m.push(v);
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(&parts, &Moments::merge, Moments::empty()))
}

/// Sum of `f` over grid-cell centres inside `domain`, with the count of
/// centres used. Cells are over the bounding box with `per_axis` cells each.
fn grid_sum<const N: usize>(
    domain: &Domain,
    per_axis: usize,
    f: impl Fn(&[f64], usize) -> Result<[f64; N]> + Sync,
) -> Result<([f64; N], usize)> {
    let (lo, hi) = domain.bounding_box();
    let d = lo.len();
    let total = per_axis
        .checked_pow(d as u32)
        .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
    let width: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / per_axis as f64).collect();
    let chunks = total.div_ceil(BLOCK);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; N];
            let mut used = 0usize;
            let mut x = vec![0.0; d];
            for cell in c * BLOCK..((c + 1) * BLOCK).min(total) {
                let mut rest = cell;
                for k in (0..d).rev() {
                    let i = rest % per_axis;
                    rest /= per_axis;
                    x[k] = lo[k] + (i as f64 + 0.5) * width[k];
                }
                if !domain.contains(&x) {
                    continue;
                }
                let v = f(&x, cell).map_err(|e| Error::AtIndex {
                    index: cell,
                    source: Box::new(e),
                })?;
                for k in 0..N {
                    acc[k] += v[k];
                }
                used += 1;
            }
            Ok((acc, used))
        })
        .collect::<Result<Vec<_>>>()?;
    let merge = |a: ([f64; N], usize), b: ([f64; N], usize)| {
        let mut s = a.0;
        for k in 0..N {
            s[k] += b.0[k];
        }
        (s, a.1 + b.1)
    };
    Ok(reduce(&parts, &merge, ([0.0; N], 0)))
}

fn grid_per_axis(samples: usize, d: usize) -> Result<usize> {
    if d > 4 {
        return Err(Error::Unsupported(format!(
            "grid integrator is limited to dimension 4, got {d}"
        )));
    }
    Ok(((samples as f64).powf(1.0 / d as f64).round() as usize).max(1))
}

/// `S^p_M(f̄)` over `domain`, which must lie inside the field's domain.
pub fn class_stability(
    field: &ExtendedField,
    domain: &Domain,
    spec: &DistanceSpec,
    integrator: Integrator,
    samples: usize,
    seed: u64,
) -> Result<StabilityEstimate> {
    if domain.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: domain.dim(),
        });
    }
    let h = |x: &[f64], i: usize| -> Result<[f64; 3]> {
        let e = spec.evaluate(field, x, i as u64)?;
        Ok([e.value, e.error_bound, e.saturated as u8 as f64])
    };
    let base = StabilityEstimate {
        value: 0.0,
        std_error: 0.0,
        error_bound: 0.0,
        samples,
        p: spec.p,
        mode: spec.mode,
        boundary_mode: spec.boundary,
        integrator,
        saturated: 0,
    };
    match integrator {
        Integrator::MonteCarlo => {
            if samples < 100 {
                return Err(Error::InvalidParameter(format!(
                    "monte carlo needs at least 100 samples, got {samples}"
                )));
            }
            let vol = domain.volume();
            let m = monte_carlo(domain, samples, seed, h)?;
            Ok(StabilityEstimate {
                value: vol * m.mean[0],
                std_error: vol * m.std_error(0),
                error_bound: vol * m.mean[1],
                saturated: (m.mean[2] * m.n).round() as usize,
                ..base
            })
        }
        Integrator::Grid => {
            let per_axis = grid_per_axis(samples, domain.dim())?;
            let (lo, hi) = domain.bounding_box();
            let widths: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| (h - l) / per_axis as f64).collect();
            let cell_vol: f64 = widths.iter().product();
            let half_diag = 0.5 * spec.p.norm(&widths);
            let (sum, used) = grid_sum(domain, per_axis, h)?;
            Ok(StabilityEstimate {
                value: cell_vol * sum[0],
                error_bound: cell_vol * (sum[1] + half_diag * used as f64),
                samples: used,
                saturated: sum[2].round() as usize,
                ..base
            })
        }
    }
}

/// `2^n a^(n+1) / (n+1)`: stability of a constant field on `[-a, a]^n`
/// (extension mode, any `p`).
pub fn cube_stability_closed_form(n: usize, a: f64) -> f64 {
    let n = n as f64;
    2f64.powf(n) * a.powf(n + 1.0) / (n + 1.0)
}

/// `2 π^(n/2) / Γ(n/2) · R^(n+1) / (n (n+1))`: stability of a constant field
/// on the Euclidean ball of radius `R` with `p = 2` (extension mode).
pub fn ball_stability_closed_form(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let log = 2f64.ln() + 0.5 * nf * PI.ln() - ln_gamma(0.5 * nf) + (nf + 1.0) * r.ln()
        - (nf * (nf + 1.0)).ln();
    log.exp()
}

/// Ball-to-cube stability ratio at equal volume: `2 Γ(n/2+1)^(1/n) / √π`.
pub fn volume_matched_ratio(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * (ln_gamma(0.5 * nf + 1.0) / nf).exp() / PI.sqrt()
}

/// Radius of the ball with the volume of `[-a, a]^n`.
pub fn matched_radius(n: usize, a: f64) -> f64 {
    let nf = n as f64;
    2.0 * a * ((ln_gamma(0.5 * nf + 1.0) - 0.5 * nf * PI.ln()) / nf).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEstimate {
    /// Lebesgue measure of the agreement set.
    pub value: f64,
    /// `value / volume(region)`; a convenience ratio, not a measure.
    pub normalized: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// `μ({x in region : candidate(x) = reference(x)})` by Monte Carlo.
pub fn accuracy_measure(
    candidate: &ExtendedField,
    reference: &ExtendedField,
    region: &Domain,
    samples: usize,
    seed: u64,
) -> Result<AccuracyEstimate> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let vol = region.volume();
    let m = monte_carlo(region, samples, seed, |x, _| {
        Ok([(candidate.evaluate(x) == reference.evaluate(x)) as u8 as f64])
    })?;
    Ok(AccuracyEstimate {
        value: vol * m.mean[0],
        normalized: m.mean[0],
        std_error: vol * m.std_error(0),
        samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedStability {
    pub reference: f64,
    pub candidate: f64,
    /// `reference - candidate`, from the same sample points.
    pub deficit: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Stability of two fields on common samples, with the standard error of
/// their difference.
pub fn paired_stability(
    reference: &ExtendedField,
    candidate: &ExtendedField,
    domain: &Domain,
    spec: &DistanceSpec,
    samples: usize,
    seed: u64,
) -> Result<PairedStability> {
    if samples < 100 {
        return Err(Error::InvalidParameter(format!(
            "monte carlo needs at least 100 samples, got {samples}"
        )));
    }
    let vol = domain.volume();
    let m = monte_carlo(domain, samples, seed, |x, i| {
        let a = spec.evaluate(reference, x, i as u64)?.value;
        let b = spec.evaluate(candidate, x, i as u64)?.value;
        Ok([a, b, a - b])
    })?;
    Ok(PairedStability {
        reference: vol * m.mean[0],
        candidate: vol * m.mean[1],
        deficit: vol * m.mean[2],
        std_error: vol * m.std_error(2),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::field::extend;

    fn interior_l1() -> DistanceSpec {
        DistanceSpec::pointwise(NormP::L1, BoundaryMode::Interior)
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(cube_stability_closed_form(1, 1.0), 1.0);
        assert!((cube_stability_closed_form(2, 1.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((cube_stability_closed_form(3, 0.5) - 0.125).abs() < 1e-15);
        assert!((ball_stability_closed_form(1, 1.0) - 1.0).abs() < 1e-12);
        assert!((ball_stability_closed_form(2, 1.0) - PI / 3.0).abs() < 1e-12);
        // sphere area 4 pi r^2 integrated against (2 - r) on [0, 2]
        let want = 4.0 * PI * (2.0 * 8.0 / 3.0 - 16.0 / 4.0);
        assert!((want - 16.0 * PI / 3.0).abs() < 1e-12);
        assert!((ball_stability_closed_form(3, 2.0) - want).abs() < 1e-10 * want);
        assert!((volume_matched_ratio(1) - 1.0).abs() < 1e-12);
        assert!((volume_matched_ratio(2) - 2.0 / PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn ratio_equals_matched_ball_over_cube() {
        for n in 1..=10 {
            for a in [0.5, 1.0, 3.0] {
                let r = matched_radius(n, a);
                let vb = crate::domain::ball_volume(n, r);
                assert!((vb - (2.0 * a).powi(n as i32)).abs() < 1e-9 * vb);
                let ratio = ball_stability_closed_form(n, r) / cube_stability_closed_form(n, a);
                assert!((ratio - volume_matched_ratio(n)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn grid_integrator_on_step_fields() {
        let f1 = extend(catalog::f1());
        let dom = f1.domain().clone();
        let s = class_stability(&f1, &dom, &interior_l1(), Integrator::Grid, 2000, 0).unwrap();
        assert!((s.value - 1.0).abs() < 1e-6, "{s:?}");
        let ext = DistanceSpec::pointwise(NormP::L1, BoundaryMode::Extension);
        let s = class_stability(&f1, &dom, &ext, Integrator::Grid, 2000, 0).unwrap();
        assert!((s.value - 0.5).abs() < 1e-6, "{s:?}");
    }

    #[test]
    fn monte_carlo_is_thread_count_independent() {
        let f = extend(catalog::f4());
        let dom = f.domain().clone();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| class_stability(&f, &dom, &interior_l1(), Integrator::MonteCarlo, 20_000, 9).unwrap())
        };
        let (a, b) = (run(1), run(4));
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn rejects_small_samples_and_point_cloud_measure() {
        let f = extend(catalog::f1());
        let dom = f.domain().clone();
        assert!(class_stability(&f, &dom, &interior_l1(), Integrator::MonteCarlo, 10, 0).is_err());
        let cloud = extend(
            crate::field::LabelField::point_cloud(vec![vec![0.0], vec![1.0]], vec![1, 2], None).unwrap(),
        );
        let spec = DistanceSpec::measure(NormP::L1, BoundaryMode::Interior, Default::default());
        let err = class_stability(&cloud, &cloud.domain().clone(), &spec, Integrator::MonteCarlo, 100, 0)
            .unwrap_err();
        assert!(matches!(err, Error::AtIndex { .. }));
    }

    #[test]
    fn accuracy_examples() {
        let f1 = extend(catalog::f1());
        let dom = f1.domain().clone();
        let same = accuracy_measure(&f1, &f1, &dom, 10_000, 1).unwrap();
        assert_eq!(same.value, 2.0);
        let one = extend(
            crate::field::LabelField::oracle(
                std::sync::Arc::new(catalog::ConstantOracle(1)),
                dom.clone(),
                [1].into_iter().collect(),
            )
            .unwrap(),
        );
        let half = accuracy_measure(&one, &f1, &dom, 100_000, 1).unwrap();
        assert!((half.value - 1.0).abs() < 3.0 * half.std_error + 1e-12, "{half:?}");
    }

    #[test]
    fn moments_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut whole = Moments::<1>::empty();
        xs.iter().for_each(|x| whole.push([*x]));
        let parts: Vec<Moments<1>> = xs
            .chunks(77)
            .map(|c| {
                let mut m = Moments::empty();
                c.iter().for_each(|x| m.push([*x]));
                m
            })
            .collect();
        let merged = reduce(&parts, &Moments::merge, Moments::empty());
        assert!((merged.mean[0] - whole.mean[0]).abs() < 1e-12);
        assert!((merged.m2[0] - whole.m2[0]).abs() < 1e-9 * whole.m2[0]);
    }
}
