//! Built-in example fields.
//!
//! Names take optional parameters: `cube:n=2,a=1`, `ball:n=3,r=2`,
//! `H1:eps=0.01`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::domain::{l2_ball_entry, l2_ball_exit, DistanceBound, Domain};
use crate::error::{Error, Result};
use crate::field::{rescale_domain, ExtLabel, Label, LabelField, LabelOracle};
use crate::norm::NormP;

pub const CATALOG: &[&str] = &[
    "f1",
    "f2",
    "f3-analog",
    "f4",
    "f_l",
    "H1:eps=0.01",
    "H2:eps=0.01",
    "H3:eps=0.01",
    "cube:n=2,a=1",
    "ball:n=2,r=1",
    "disk-in-square",
];

/// Piecewise-constant function on a subset of the line.
///
/// `labels[j]` holds on `[breaks[j-1], breaks[j])`, so the function is
/// right-continuous; `points` override single locations.
#[derive(Clone, Debug)]
pub struct StepOracle {
    members: Vec<(f64, f64)>,
    breaks: Vec<f64>,
    labels: Vec<Label>,
    points: Vec<(f64, Label)>,
}

impl StepOracle {
    pub fn new(
        members: Vec<(f64, f64)>,
        breaks: Vec<f64>,
        labels: Vec<Label>,
        points: Vec<(f64, Label)>,
    ) -> Result<StepOracle> {
        if labels.len() != breaks.len() + 1 {
            return Err(Error::InvalidField("step oracle needs one label per piece".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidField("breaks must be strictly increasing".into()));
        }
        Ok(StepOracle {
            members,
            breaks,
            labels,
            points,
        })
    }

    fn value(&self, x: f64) -> Label {
        if let Some((_, l)) = self.points.iter().find(|(z, _)| *z == x) {
            return *l;
        }
        self.labels[self.breaks.partition_point(|b| *b <= x)]
    }

    pub fn domain(&self) -> Result<Domain> {
        let boxes = self
            .members
            .iter()
            .map(|&(lo, hi)| Domain::new_box(vec![lo], vec![hi]))
            .collect::<Result<Vec<_>>>()?;
        if boxes.len() == 1 {
            Ok(boxes.into_iter().next().unwrap())
        } else {
            Domain::new_union(boxes)
        }
    }

    pub fn label_set(&self) -> BTreeSet<Label> {
        self.labels
            .iter()
            .chain(self.points.iter().map(|(_, l)| l))
            .copied()
            .collect()
    }
}

impl LabelOracle for StepOracle {
    fn label(&self, x: &[f64]) -> ExtLabel {
        ExtLabel::Class(self.value(x[0]))
    }

    fn interior_distance(&self, x: &[f64], _p: NormP) -> Option<DistanceBound> {
        let x = x[0];
        let own = self.value(x);
        let mut best = f64::INFINITY;
        let to_interval = |a: f64, b: f64| (a - x).max(x - b).max(0.0);
        for (j, &l) in self.labels.iter().enumerate() {
            if l == own {
                continue;
            }
            let start = if j == 0 { f64::NEG_INFINITY } else { self.breaks[j - 1] };
            let end = self.breaks.get(j).copied().unwrap_or(f64::INFINITY);
            for &(lo, hi) in &self.members {
                let (a, b) = (lo.max(start), hi.min(end));
                if a < b {
                    best = best.min(to_interval(a, b));
                } else if a == b && self.value(a) != own {
                    best = best.min((a - x).abs());
                }
            }
        }
        for &(z, l) in &self.points {
            if l != own && self.members.iter().any(|&(lo, hi)| lo <= z && z <= hi) {
                best = best.min((z - x).abs());
            }
        }
        Some(DistanceBound::exact(best))
    }
}

/// Low mantissa bits that must vanish for a float to count as "rational".
const RATIONAL_MASK: u64 = (1 << 20) - 1;

/// Machine analog of the rational/irrational sign flip on `[-1, 1]`: a float
/// is "rational" when the low 20 bits of its mantissa are zero. Such floats
/// are dense at spacing `2^20` ulps but occupy a fraction `2^-20` of any
/// interval.
#[derive(Clone, Copy, Debug)]
pub struct RationalFlipOracle;

impl RationalFlipOracle {
    pub fn is_rational(x: f64) -> bool {
        x == 0.0 || x.to_bits() & RATIONAL_MASK == 0
    }

    fn value(x: f64) -> Label {
        let s = if x >= 0.0 { 1 } else { -1 };
        if Self::is_rational(x) {
            s
        } else {
            -s
        }
    }
}

impl LabelOracle for RationalFlipOracle {
    fn label(&self, x: &[f64]) -> ExtLabel {
        ExtLabel::Class(Self::value(x[0]))
    }

    fn interior_distance(&self, x: &[f64], _p: NormP) -> Option<DistanceBound> {
        let x = x[0];
        let own = Self::value(x);
        let bits = x.to_bits();
        let down = f64::from_bits(bits & !RATIONAL_MASK);
        let up = f64::from_bits((bits & !RATIONAL_MASK) + RATIONAL_MASK + 1);
        let candidates = [x.next_up(), x.next_down(), down, up, -x, 0.0, f64::MIN_POSITIVE, -f64::MIN_POSITIVE];
        let best = candidates
            .iter()
            .filter(|z| z.abs() <= 1.0 && Self::value(**z) != own)
            .map(|z| (z - x).abs())
            .fold(f64::INFINITY, f64::min);
        Some(DistanceBound::exact(best))
    }
}

/// A single label on the whole domain.
#[derive(Clone, Copy, Debug)]
pub struct ConstantOracle(pub Label);

impl LabelOracle for ConstantOracle {
    fn label(&self, _x: &[f64]) -> ExtLabel {
        ExtLabel::Class(self.0)
    }

    fn interior_distance(&self, _x: &[f64], _p: NormP) -> Option<DistanceBound> {
        Some(DistanceBound::exact(f64::INFINITY))
    }
}

/// Label `inside` on a closed Euclidean disk strictly inside the domain,
/// `outside` elsewhere.
#[derive(Clone, Debug)]
pub struct DiskOracle {
    pub center: Vec<f64>,
    pub radius: f64,
    pub inside: Label,
    pub outside: Label,
}

impl DiskOracle {
    fn in_disk(&self, x: &[f64]) -> bool {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        r2 <= self.radius * self.radius
    }
}

impl LabelOracle for DiskOracle {
    fn label(&self, x: &[f64]) -> ExtLabel {
        ExtLabel::Class(if self.in_disk(x) { self.inside } else { self.outside })
    }

    fn interior_distance(&self, x: &[f64], p: NormP) -> Option<DistanceBound> {
        Some(if self.in_disk(x) {
            l2_ball_exit(x, &self.center, self.radius, p)
        } else {
            l2_ball_entry(x, &self.center, self.radius, p)
        })
    }
}

fn step_field(oracle: StepOracle) -> Result<LabelField> {
    let domain = oracle.domain()?;
    let labels = oracle.label_set();
    LabelField::oracle(Arc::new(oracle), domain, labels)
}

fn sign_step(shift: f64) -> Result<LabelField> {
    step_field(StepOracle::new(vec![(-1.0, 1.0)], vec![-shift], vec![-1, 1], vec![])?)
}

pub fn f1() -> LabelField {
    sign_step(0.0).expect("static field")
}

/// `sgn(x)` with the isolated points `±1/2` flipped.
pub fn f2() -> LabelField {
    step_field(
        StepOracle::new(vec![(-1.0, 1.0)], vec![0.0], vec![-1, 1], vec![(-0.5, 1), (0.5, -1)])
            .expect("static field"),
    )
    .expect("static field")
}

pub fn f3_analog() -> LabelField {
    LabelField::oracle(
        Arc::new(RationalFlipOracle),
        Domain::cube(1, 1.0).expect("static domain"),
        [-1, 1].into_iter().collect(),
    )
    .expect("static field")
}

/// `sgn(x + 1/2)`.
pub fn f4() -> LabelField {
    sign_step(0.5).expect("static field")
}

/// `0` on `[0, 1)`, `1` on `[1, 2]`.
pub fn f_l() -> LabelField {
    step_field(StepOracle::new(vec![(0.0, 2.0)], vec![1.0], vec![0, 1], vec![]).expect("static field"))
        .expect("static field")
}

/// Step with labels `{0, high}` on `[-1, -eps] ∪ [eps, 1]`.
pub fn gapped_step(eps: f64, high: Label) -> Result<LabelField> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1), got {eps}")));
    }
    step_field(StepOracle::new(vec![(-1.0, -eps), (eps, 1.0)], vec![0.0], vec![0, high], vec![])?)
}

pub fn h1(eps: f64) -> Result<LabelField> {
    gapped_step(eps, 1)
}

pub fn h2(eps: f64) -> Result<LabelField> {
    gapped_step(eps, 1000)
}

pub fn h3(eps: f64) -> Result<LabelField> {
    rescale_domain(&h1(eps)?, 1e-3)
}

pub fn cube_indicator(n: usize, a: f64) -> Result<LabelField> {
    let domain = Domain::cube(n, a)?;
    LabelField::oracle(Arc::new(ConstantOracle(1)), domain, [1].into_iter().collect())
}

pub fn ball_indicator(n: usize, r: f64) -> Result<LabelField> {
    if n == 0 {
        return Err(Error::InvalidDomain("dimension must be positive".into()));
    }
    let domain = Domain::new_ball(vec![0.0; n], r)?;
    LabelField::oracle(Arc::new(ConstantOracle(1)), domain, [1].into_iter().collect())
}

/// `[-1, 1]^2` with label 2 on the disk of radius 1/2 and 1 elsewhere.
pub fn disk_in_square() -> LabelField {
    LabelField::oracle(
        Arc::new(DiskOracle {
            center: vec![0.0, 0.0],
            radius: 0.5,
            inside: 2,
            outside: 1,
        }),
        Domain::cube(2, 1.0).expect("static domain"),
        [1, 2].into_iter().collect(),
    )
    .expect("static field")
}

fn parse_params(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for kv in s.split(',').filter(|t| !t.trim().is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {kv:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad number in {kv:?}")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn positive_int(v: f64, key: &str) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidParameter(format!("{key} must be a positive integer, got {v}")))
    }
}

/// Looks up a catalog field by name.
pub fn builtin_field(name: &str) -> Result<LabelField> {
    let (base, rest) = name.split_once(':').unwrap_or((name, ""));
    let params = parse_params(rest)?;
    let get = |k: &str, default: f64| params.get(k).copied().unwrap_or(default);
    let unknown = || Error::UnknownBuiltin {
        name: name.to_string(),
        catalog: CATALOG.join(", "),
    };
    let allowed: &[&str] = match base {
        "cube" => &["n", "a"],
        "ball" => &["n", "r"],
        "H1" | "H2" | "H3" => &["eps"],
        _ => &[],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidParameter(format!("{base} takes no parameter {k:?}")));
    }
    match base {
        "f1" => Ok(f1()),
        "f2" => Ok(f2()),
        "f3-analog" => Ok(f3_analog()),
        "f4" => Ok(f4()),
        "f_l" => Ok(f_l()),
        "H1" => h1(get("eps", 0.01)),
        "H2" => h2(get("eps", 0.01)),
        "H3" => h3(get("eps", 0.01)),
        "cube" => cube_indicator(positive_int(get("n", 2.0), "n")?, get("a", 1.0)),
        "ball" => ball_indicator(positive_int(get("n", 2.0), "n")?, get("r", 1.0)),
        "disk-in-square" => Ok(disk_in_square()),
        _ => Err(unknown()),
    }
}
