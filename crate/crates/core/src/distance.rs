//! Distance to the decision boundary.
//!
//! Pointwise mode evaluates `inf { ||x - z||_p : f̄(z) != f̄(x) }`; measure
//! mode looks for the smallest radius whose ball contains a sampled fraction
//! of differently labelled points above a threshold.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::DistanceBound;
use crate::error::{Error, Result};
use crate::field::{ExtLabel, ExtendedField, FieldKind, Representation};
use crate::norm::NormP;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactNn,
    GridScan,
    RadiusBisection,
    /// Closed-form geometry supplied by the field.
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pointwise,
    Measure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// The complement of `M` carries the reject label and counts as a boundary.
    Extension,
    /// Only label changes inside `M` count.
    Interior,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pointwise" => Ok(Mode::Pointwise),
            "measure" => Ok(Mode::Measure),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

impl std::str::FromStr for BoundaryMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extension" => Ok(BoundaryMode::Extension),
            "interior" => Ok(BoundaryMode::Interior),
            _ => Err(Error::Parse(format!("unknown boundary mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub method: Method,
    pub mode: Mode,
    pub boundary_mode: BoundaryMode,
    /// No differing point was found up to `diam(M)`; `value` is capped there.
    #[serde(default)]
    pub saturated: bool,
}

/// Settings of the measure-mode estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub samples_per_radius: usize,
    pub tau: f64,
    pub bisection_depth: usize,
    pub seed: u64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            samples_per_radius: 4096,
            tau: 1e-3,
            bisection_depth: 40,
            seed: 0,
        }
    }
}

impl MeasureConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "fraction threshold must lie in (0, 0.5), got {}",
                self.tau
            )));
        }
        if self.samples_per_radius == 0 {
            return Err(Error::InvalidParameter("samples_per_radius must be positive".into()));
        }
        Ok(())
    }
}

/// Everything that selects one notion of `h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub p: NormP,
    pub mode: Mode,
    pub boundary: BoundaryMode,
    pub measure: MeasureConfig,
}

impl DistanceSpec {
    pub fn pointwise(p: NormP, boundary: BoundaryMode) -> Self {
        DistanceSpec {
            p,
            mode: Mode::Pointwise,
            boundary,
            measure: MeasureConfig::default(),
        }
    }

    pub fn measure(p: NormP, boundary: BoundaryMode, measure: MeasureConfig) -> Self {
        DistanceSpec {
            p,
            mode: Mode::Measure,
            boundary,
            measure,
        }
    }

    /// `h(x)` for `x` in `M`. `stream` selects an independent random stream
    /// for measure mode.
    pub fn evaluate(&self, field: &ExtendedField, x: &[f64], stream: u64) -> Result<DistanceEstimate> {
        match self.mode {
            Mode::Pointwise => pointwise_distance(field, x, self.p, self.boundary),
            Mode::Measure => measure_distance_stream(field, x, self.p, self.boundary, &self.measure, stream),
        }
    }
}

fn check_inside(field: &ExtendedField, x: &[f64]) -> Result<()> {
    field.base().check_dim(x)?;
    if !field.domain().contains(x) {
        return Err(Error::OutsideDomain(x.to_vec()));
    }
    Ok(())
}

/// Steps of segment bisection used to refine a raster candidate.
const REFINE_STEPS: usize = 24;
/// Raster candidates refined per query.
const REFINE_CANDIDATES: usize = 4;

/// Distance from `x` to the nearest point of `M` whose label differs from
/// `label`, ignoring the complement of `M`. May be `+inf`.
pub(crate) fn interior_distance(
    field: &ExtendedField,
    x: &[f64],
    label: ExtLabel,
    p: NormP,
) -> (DistanceBound, Method) {
    match field.base().representation() {
        Representation::PointCloud(_) => {
            let pts = field.labeled_points().expect("cloud points");
            let d = pts
                .nearest_differing(x, label, 1, p)
                .first()
                .map(|n| n.1)
                .unwrap_or(f64::INFINITY);
            (DistanceBound::exact(d), Method::ExactNn)
        }
        Representation::Grid(g) => {
            let pts = field.labeled_points().expect("grid cells");
            let d = pts
                .nearest_differing(x, label, 1, p)
                .first()
                .map(|n| n.1)
                .unwrap_or(f64::INFINITY);
            (
                DistanceBound {
                    value: d,
                    error_bound: g.cell_diagonal(p),
                },
                Method::GridScan,
            )
        }
        Representation::Oracle(o) => {
            if let Some(b) = o.oracle().interior_distance(x, p) {
                return (b, Method::Analytic);
            }
            let raster = field.raster().expect("oracle raster");
            let diag = p.norm(&raster.spacing);
            let mut best = f64::INFINITY;
            for (i, _) in raster.points.nearest_differing(x, label, REFINE_CANDIDATES, p) {
                let c = raster.points.point(i);
                best = best.min(refine_segment(field, x, c, label, p));
            }
            (
                DistanceBound {
                    value: best,
                    error_bound: diag,
                },
                Method::GridScan,
            )
        }
    }
}

/// Bisects the segment `x -> c` (with `c` differing) for the first label
/// change and returns the distance to the differing end of the final bracket.
fn refine_segment(field: &ExtendedField, x: &[f64], c: &[f64], label: ExtLabel, p: NormP) -> f64 {
    let at = |t: f64| -> Vec<f64> { x.iter().zip(c).map(|(a, b)| a + t * (b - a)).collect() };
    let differs = |z: &[f64]| field.domain().contains(z) && field.evaluate(z) != label;
    if !differs(c) {
        return p.distance(x, c);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..REFINE_STEPS {
        let mid = 0.5 * (lo + hi);
        if differs(&at(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    p.distance(x, &at(hi))
}

/// `h` at any point of `R^d` in extension mode (pointwise), including points
/// outside `M` where `f̄` is the reject label.
pub(crate) fn extended_pointwise(field: &ExtendedField, x: &[f64], p: NormP) -> (DistanceBound, Method) {
    let domain = field.domain();
    if !domain.contains(x) {
        return (domain.distance_to(x, p), Method::Analytic);
    }
    let label = field.evaluate(x);
    let (inner, method) = interior_distance(field, x, label, p);
    let edge = domain.distance_to_complement(x, p);
    if edge.value < inner.value {
        // the inner estimate may still undercut the edge within its error
        let error_bound = if inner.value - inner.error_bound < edge.value {
            edge.error_bound.max(inner.error_bound)
        } else {
            edge.error_bound
        };
        (DistanceBound { value: edge.value, error_bound }, Method::Analytic)
    } else {
        (inner, method)
    }
}

pub fn pointwise_distance(
    field: &ExtendedField,
    x: &[f64],
    p: NormP,
    boundary: BoundaryMode,
) -> Result<DistanceEstimate> {
    check_inside(field, x)?;
    let (bound, method) = match boundary {
        BoundaryMode::Extension => extended_pointwise(field, x, p),
        BoundaryMode::Interior => interior_distance(field, x, field.evaluate(x), p),
    };
    let mut est = DistanceEstimate {
        value: bound.value,
        error_bound: bound.error_bound,
        method,
        mode: Mode::Pointwise,
        boundary_mode: boundary,
        saturated: false,
    };
    if !est.value.is_finite() {
        est.value = field.domain().diameter(p);
        est.saturated = true;
    }
    Ok(est)
}

/// Uniform samples of the unit `p`-ball.
pub(crate) fn unit_ball_samples<R: Rng + ?Sized>(d: usize, n: usize, p: NormP, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * d);
    match p {
        NormP::Infinity => {
            for _ in 0..n * d {
                out.push(rng.random_range(-1.0..1.0));
            }
        }
        NormP::Finite(2.0) => {
            for _ in 0..n {
                out.extend(crate::domain::unit_ball_l2(d, rng));
            }
        }
        NormP::Finite(q) => {
            // generalised Gaussian coordinates with an exponential slack term
            let gamma = Gamma::new(1.0 / q, 1.0).expect("valid gamma shape");
            let mut g = vec![0.0; d];
            for _ in 0..n {
                let mut s = 0.0;
                for v in g.iter_mut() {
                    let mag: f64 = gamma.sample(rng);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    *v = sign * mag.powf(1.0 / q);
                    s += mag;
                }
                let w: f64 = Exp1.sample(rng);
                let scale = (s + w).powf(-1.0 / q);
                out.extend(g.iter().map(|v| v * scale));
            }
        }
    }
    out
}

const MEASURE_STREAM_SALT: u64 = 0x6d65_6173_7572_6521;

pub fn measure_distance(
    field: &ExtendedField,
    x: &[f64],
    p: NormP,
    boundary: BoundaryMode,
    config: &MeasureConfig,
) -> Result<DistanceEstimate> {
    measure_distance_stream(field, x, p, boundary, config, 0)
}

fn measure_distance_stream(
    field: &ExtendedField,
    x: &[f64],
    p: NormP,
    boundary: BoundaryMode,
    config: &MeasureConfig,
    stream: u64,
) -> Result<DistanceEstimate> {
    if field.base().kind() == FieldKind::PointCloud {
        return Err(Error::MeasureOnPointCloud);
    }
    config.validate()?;
    check_inside(field, x)?;
    let d = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ MEASURE_STREAM_SALT);
    rng.set_stream(stream);
    let dirs = unit_ball_samples(d, config.samples_per_radius, p, &mut rng);
    let label = field.evaluate(x);
    let domain = field.domain();
    let mut z = vec![0.0; d];
    let mut fraction = |r: f64| -> f64 {
        let mut hits = 0usize;
        for u in dirs.chunks_exact(d) {
            for k in 0..d {
                z[k] = x[k] + r * u[k];
            }
            let differs = match boundary {
                BoundaryMode::Extension => field.evaluate(&z) != label,
                BoundaryMode::Interior => domain.contains(&z) && field.evaluate(&z) != label,
            };
            hits += differs as usize;
        }
        hits as f64 / config.samples_per_radius as f64
    };
    let diam = domain.diameter(p);
    let base = DistanceEstimate {
        value: diam,
        error_bound: 0.0,
        method: Method::RadiusBisection,
        mode: Mode::Measure,
        boundary_mode: boundary,
        saturated: false,
    };
    if fraction(diam) <= config.tau {
        return Ok(DistanceEstimate {
            saturated: true,
            ..base
        });
    }
    let (mut lo, mut hi) = (0.0, diam);
    for _ in 0..config.bisection_depth {
        let mid = 0.5 * (lo + hi);
        if fraction(mid) > config.tau {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(DistanceEstimate {
        value: hi,
        error_bound: hi - lo,
        ..base
    })
}

/// Batch evaluation; point `i` uses random stream `i` in measure mode.
pub fn distance_profile(
    field: &ExtendedField,
    points: &[Vec<f64>],
    spec: &DistanceSpec,
) -> Result<Vec<DistanceEstimate>> {
    points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            spec.evaluate(field, x, i as u64).map_err(|e| Error::AtIndex {
                index: i,
                source: Box::new(e),
            })
        })
        .collect()
}
