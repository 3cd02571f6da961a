//! Classification functions `f: M -> Y` and their extension to all of `R^d`.
//!
//! A [`LabelField`] stores `f` as a labelled point cloud, a piecewise-constant
//! grid, or a host-supplied oracle. [`ExtendedField`] adds the reject value
//! outside `M` and owns the nearest-neighbour structures used by the
//! distance estimators.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::domain::{bbox_of, DistanceBound, Domain};
use crate::error::{Error, Result};
use crate::kdtree::KdTree;
use crate::norm::NormP;

pub type Label = i64;

/// A value of the extended label set `Y ∪ {reject}`.
///
/// `Outside` is kept distinct from every class label so that fields whose
/// classes are themselves numbered `-1` (the sign function) stay unambiguous.
/// It orders before every class, which fixes the slot layout of the H field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtLabel {
    Outside,
    Class(Label),
}

impl ExtLabel {
    /// Numeric value with the reject label rendered as `-1`.
    pub fn numeric(self) -> i64 {
        match self {
            ExtLabel::Outside => -1,
            ExtLabel::Class(l) => l,
        }
    }

    pub fn class(self) -> Option<Label> {
        match self {
            ExtLabel::Outside => None,
            ExtLabel::Class(l) => Some(l),
        }
    }
}

impl fmt::Display for ExtLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtLabel::Outside => write!(f, "outside"),
            ExtLabel::Class(l) => write!(f, "{l}"),
        }
    }
}

/// A label function supplied by the host.
///
/// `interior_distance` may return the exact distance from `x` to the nearest
/// point of the oracle's domain carrying a different label (`+inf` when none
/// exists). Oracles without closed-form geometry return `None` and are
/// handled by a grid-refined scan.
pub trait LabelOracle: Send + Sync + fmt::Debug {
    fn label(&self, x: &[f64]) -> ExtLabel;

    fn interior_distance(&self, _x: &[f64], _p: NormP) -> Option<DistanceBound> {
        None
    }
}

/// Wraps a plain closure as an oracle without distance information.
pub struct FnOracle<F>(pub F);

impl<F> fmt::Debug for FnOracle<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnOracle")
    }
}

impl<F> LabelOracle for FnOracle<F>
where
    F: Fn(&[f64]) -> Label + Send + Sync,
{
    fn label(&self, x: &[f64]) -> ExtLabel {
        ExtLabel::Class((self.0)(x))
    }
}

#[derive(Debug)]
struct RelabeledOracle {
    inner: Arc<dyn LabelOracle>,
    map: BTreeMap<Label, Label>,
}

impl LabelOracle for RelabeledOracle {
    fn label(&self, x: &[f64]) -> ExtLabel {
        match self.inner.label(x) {
            ExtLabel::Class(l) => ExtLabel::Class(*self.map.get(&l).unwrap_or(&l)),
            ExtLabel::Outside => ExtLabel::Outside,
        }
    }

    fn interior_distance(&self, x: &[f64], p: NormP) -> Option<DistanceBound> {
        self.inner.interior_distance(x, p)
    }
}

#[derive(Debug)]
struct ScaledOracle {
    inner: Arc<dyn LabelOracle>,
    scale: f64,
}

impl ScaledOracle {
    fn pull_back(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|v| v / self.scale).collect()
    }
}

impl LabelOracle for ScaledOracle {
    fn label(&self, x: &[f64]) -> ExtLabel {
        self.inner.label(&self.pull_back(x))
    }

    fn interior_distance(&self, x: &[f64], p: NormP) -> Option<DistanceBound> {
        self.inner
            .interior_distance(&self.pull_back(x), p)
            .map(|d| DistanceBound {
                value: d.value * self.scale,
                error_bound: d.error_bound * self.scale,
            })
    }
}

#[derive(Clone, Debug)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    labels: Vec<Label>,
    domain: Domain,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}

/// Piecewise-constant field on a box; cell `i` covers
/// `lo + [i, i+1) * (hi - lo) / resolution` per axis, row-major with the last
/// axis fastest.
#[derive(Clone, Debug)]
pub struct GridField {
    lo: Vec<f64>,
    hi: Vec<f64>,
    resolution: Vec<usize>,
    labels: Vec<Label>,
    domain: Domain,
}

impl GridField {
    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.resolution[axis] as f64
    }

    pub fn cell_diagonal(&self, p: NormP) -> f64 {
        let w: Vec<f64> = (0..self.lo.len()).map(|k| self.cell_width(k)).collect();
        p.norm(&w)
    }

    /// Index of the cell nearest to `x` (clamped to the grid).
    pub fn cell_index(&self, x: &[f64]) -> usize {
        let mut idx = 0usize;
        for k in 0..self.lo.len() {
            let w = self.cell_width(k);
            let i = ((x[k] - self.lo[k]) / w).floor();
            let i = if i.is_nan() { 0 } else { (i.max(0.0) as usize).min(self.resolution[k] - 1) };
            idx = idx * self.resolution[k] + i;
        }
        idx
    }

    pub fn cell_center(&self, mut idx: usize) -> Vec<f64> {
        let d = self.lo.len();
        let mut c = vec![0.0; d];
        for k in (0..d).rev() {
            let i = idx % self.resolution[k];
            idx /= self.resolution[k];
            c[k] = self.lo[k] + (i as f64 + 0.5) * self.cell_width(k);
        }
        c
    }

    pub fn cell_count(&self) -> usize {
        self.labels.len()
    }
}

#[derive(Clone, Debug)]
pub struct OracleField {
    oracle: Arc<dyn LabelOracle>,
    domain: Domain,
    scan_resolution: f64,
}

impl OracleField {
    pub fn oracle(&self) -> &Arc<dyn LabelOracle> {
        &self.oracle
    }

    /// Grid spacing used when the oracle has no closed-form distance.
    pub fn scan_resolution(&self) -> f64 {
        self.scan_resolution
    }
}

#[derive(Clone, Debug)]
pub enum Representation {
    PointCloud(PointCloud),
    Grid(GridField),
    Oracle(OracleField),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    PointCloud,
    Grid,
    Oracle,
}

#[derive(Clone, Debug)]
pub struct LabelField {
    repr: Representation,
    label_set: BTreeSet<Label>,
}

fn default_scan_resolution(domain: &Domain) -> f64 {
    let (lo, hi) = domain.bounding_box();
    let d = lo.len() as f64;
    let vol: f64 = lo.iter().zip(&hi).map(|(l, h)| h - l).product();
    // about 2.5e5 cells
    (vol / 2.5e5).powf(1.0 / d)
}

impl LabelField {
    /// A labelled point cloud. The domain defaults to the points' bounding box.
    pub fn point_cloud(
        points: Vec<Vec<f64>>,
        labels: Vec<Label>,
        domain: Option<Domain>,
    ) -> Result<LabelField> {
        if points.is_empty() {
            return Err(Error::InvalidField("point cloud needs at least one point".into()));
        }
        if points.len() != labels.len() {
            return Err(Error::InvalidField(format!(
                "{} points but {} labels",
                points.len(),
                labels.len()
            )));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(Error::InvalidField("points must share a positive dimension".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidField("point coordinates must be finite".into()));
        }
        let domain = match domain {
            Some(d) => d,
            None => {
                let (lo, mut hi) = bbox_of(points.iter().map(Vec::as_slice));
                for k in 0..dim {
                    if hi[k] <= lo[k] {
                        hi[k] = lo[k] + 1.0;
                    }
                }
                Domain::new_box(lo, hi)?
            }
        };
        if domain.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: domain.dim(),
            });
        }
        if let Some(p) = points.iter().find(|p| !domain.contains(p)) {
            return Err(Error::InvalidField(format!("cloud point {p:?} lies outside the domain")));
        }
        let label_set = labels.iter().copied().collect();
        Ok(LabelField {
            repr: Representation::PointCloud(PointCloud {
                dim,
                coords: points.concat(),
                labels,
                domain,
            }),
            label_set,
        })
    }

    pub fn grid(
        lo: Vec<f64>,
        hi: Vec<f64>,
        resolution: Vec<usize>,
        labels: Vec<Label>,
        label_set: Option<BTreeSet<Label>>,
    ) -> Result<LabelField> {
        let domain = Domain::new_box(lo.clone(), hi.clone())?;
        if resolution.len() != lo.len() || resolution.contains(&0) {
            return Err(Error::InvalidField(
                "grid needs one positive resolution per axis".into(),
            ));
        }
        let cells = resolution
            .iter()
            .try_fold(1usize, |acc, &r| acc.checked_mul(r))
            .ok_or_else(|| Error::InvalidField("grid too large".into()))?;
        if labels.len() != cells {
            return Err(Error::InvalidField(format!(
                "grid has {cells} cells but {} labels",
                labels.len()
            )));
        }
        let present: BTreeSet<Label> = labels.iter().copied().collect();
        let label_set = match label_set {
            Some(set) => {
                if let Some(l) = present.iter().find(|l| !set.contains(l)) {
                    return Err(Error::UnknownLabel(*l));
                }
                set
            }
            None => present,
        };
        if label_set.is_empty() {
            return Err(Error::InvalidField("empty label set".into()));
        }
        Ok(LabelField {
            repr: Representation::Grid(GridField {
                lo,
                hi,
                resolution,
                labels,
                domain,
            }),
            label_set,
        })
    }

    /// Rasterises `f` by evaluating it at the cell centres of a box grid.
    pub fn grid_from_fn(
        lo: Vec<f64>,
        hi: Vec<f64>,
        resolution: Vec<usize>,
        f: impl Fn(&[f64]) -> Label,
    ) -> Result<LabelField> {
        let probe = GridField {
            domain: Domain::new_box(lo.clone(), hi.clone())?,
            lo: lo.clone(),
            hi: hi.clone(),
            resolution: resolution.clone(),
            labels: Vec::new(),
        };
        let cells: usize = resolution.iter().product();
        let labels = (0..cells).map(|i| f(&probe.cell_center(i))).collect();
        LabelField::grid(lo, hi, resolution, labels, None)
    }

    pub fn oracle(
        oracle: Arc<dyn LabelOracle>,
        domain: Domain,
        label_set: BTreeSet<Label>,
    ) -> Result<LabelField> {
        if label_set.is_empty() {
            return Err(Error::InvalidField("empty label set".into()));
        }
        let scan_resolution = default_scan_resolution(&domain);
        Ok(LabelField {
            repr: Representation::Oracle(OracleField {
                oracle,
                domain,
                scan_resolution,
            }),
            label_set,
        })
    }

    /// Overrides the scan spacing of an oracle field (no-op otherwise).
    pub fn with_scan_resolution(mut self, spacing: f64) -> Result<LabelField> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("scan resolution must be positive, got {spacing}")));
        }
        if let Representation::Oracle(o) = &mut self.repr {
            o.scan_resolution = spacing;
        }
        Ok(self)
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn kind(&self) -> FieldKind {
        match self.repr {
            Representation::PointCloud(_) => FieldKind::PointCloud,
            Representation::Grid(_) => FieldKind::Grid,
            Representation::Oracle(_) => FieldKind::Oracle,
        }
    }

    pub fn dim(&self) -> usize {
        self.domain().dim()
    }

    pub fn label_set(&self) -> &BTreeSet<Label> {
        &self.label_set
    }

    /// The domain `M`.
    pub fn domain(&self) -> &Domain {
        match &self.repr {
            Representation::PointCloud(c) => &c.domain,
            Representation::Grid(g) => &g.domain,
            Representation::Oracle(o) => &o.domain,
        }
    }

    /// Label of `x` ignoring domain membership (nearest point for clouds,
    /// nearest cell for grids).
    fn raw_label(&self, x: &[f64], cache: Option<&Caches>) -> ExtLabel {
        match &self.repr {
            Representation::PointCloud(c) => {
                let nearest = match cache {
                    Some(cache) => cache.cloud_tree(c).nearest(x, NormP::L2),
                    None => KdTree::new(c.dim, &c.coords).nearest(x, NormP::L2),
                };
                ExtLabel::Class(c.labels[nearest.map(|n| n.0).unwrap_or(0)])
            }
            Representation::Grid(g) => ExtLabel::Class(g.labels[g.cell_index(x)]),
            Representation::Oracle(o) => o.oracle.label(x),
        }
    }

    /// `f(x)` for `x` in `M`.
    pub fn label_at(&self, x: &[f64]) -> Result<ExtLabel> {
        self.check_dim(x)?;
        if !self.domain().contains(x) {
            return Err(Error::OutsideDomain(x.to_vec()));
        }
        Ok(self.raw_label(x, None))
    }

    pub(crate) fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Renames labels through an injective map; labels absent from `mapping` keep
/// their value. Level sets are unchanged.
pub fn relabel(field: &LabelField, mapping: &BTreeMap<Label, Label>) -> Result<LabelField> {
    let map = |l: Label| *mapping.get(&l).unwrap_or(&l);
    let mut image: BTreeMap<Label, Label> = BTreeMap::new();
    for &l in &field.label_set {
        if let Some(prev) = image.insert(map(l), l) {
            return Err(Error::NonInjective(prev, l, map(l)));
        }
    }
    let label_set = image.keys().copied().collect();
    let repr = match &field.repr {
        Representation::PointCloud(c) => Representation::PointCloud(PointCloud {
            labels: c.labels.iter().map(|&l| map(l)).collect(),
            ..c.clone()
        }),
        Representation::Grid(g) => Representation::Grid(GridField {
            labels: g.labels.iter().map(|&l| map(l)).collect(),
            ..g.clone()
        }),
        Representation::Oracle(o) => Representation::Oracle(OracleField {
            oracle: Arc::new(RelabeledOracle {
                inner: o.oracle.clone(),
                map: field.label_set.iter().map(|&l| (l, map(l))).collect(),
            }),
            ..o.clone()
        }),
    };
    Ok(LabelField { repr, label_set })
}

/// `g(x) = f(x / c)` on the domain `c M`.
pub fn rescale_domain(field: &LabelField, c: f64) -> Result<LabelField> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::NonPositiveScale(c));
    }
    let repr = match &field.repr {
        Representation::PointCloud(cl) => Representation::PointCloud(PointCloud {
            coords: cl.coords.iter().map(|v| v * c).collect(),
            domain: cl.domain.scaled(c),
            ..cl.clone()
        }),
        Representation::Grid(g) => {
            let lo: Vec<f64> = g.lo.iter().map(|v| v * c).collect();
            let hi: Vec<f64> = g.hi.iter().map(|v| v * c).collect();
            Representation::Grid(GridField {
                domain: Domain::new_box(lo.clone(), hi.clone())?,
                lo,
                hi,
                ..g.clone()
            })
        }
        Representation::Oracle(o) => Representation::Oracle(OracleField {
            oracle: Arc::new(ScaledOracle {
                inner: o.oracle.clone(),
                scale: c,
            }),
            domain: o.domain.scaled(c),
            scan_resolution: o.scan_resolution * c,
        }),
    };
    Ok(LabelField {
        repr,
        label_set: field.label_set.clone(),
    })
}

/// Points with labels plus, per label, a lazily built tree over the points
/// carrying any *other* label.
#[derive(Debug)]
pub(crate) struct LabeledPoints {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub labels: Vec<ExtLabel>,
    complements: BTreeMap<ExtLabel, OnceLock<(KdTree, Vec<usize>)>>,
    all: OnceLock<KdTree>,
}

impl LabeledPoints {
    pub fn new(dim: usize, coords: Vec<f64>, labels: Vec<ExtLabel>) -> Self {
        let complements = labels.iter().map(|&l| (l, OnceLock::new())).collect();
        LabeledPoints {
            dim,
            coords,
            labels,
            complements,
            all: OnceLock::new(),
        }
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// The `k` nearest points whose label differs from `label`, as
    /// `(index, distance)`.
    pub fn nearest_differing(&self, x: &[f64], label: ExtLabel, k: usize, p: NormP) -> Vec<(usize, f64)> {
        match self.complements.get(&label) {
            Some(cell) => {
                let (tree, ids) = cell.get_or_init(|| self.complement_tree(label));
                tree.k_nearest(x, k, p)
                    .into_iter()
                    .map(|(i, d)| (ids[i], d))
                    .collect()
            }
            // label absent: every point differs
            None => self
                .all
                .get_or_init(|| KdTree::new(self.dim, &self.coords))
                .k_nearest(x, k, p),
        }
    }

    fn complement_tree(&self, label: ExtLabel) -> (KdTree, Vec<usize>) {
        let mut coords = Vec::new();
        let mut ids = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            if *l != label {
                coords.extend_from_slice(self.point(i));
                ids.push(i);
            }
        }
        (KdTree::new(self.dim, &coords), ids)
    }
}

/// Raster of an oracle over its domain, used when no closed-form distance exists.
#[derive(Debug)]
pub(crate) struct Raster {
    pub spacing: Vec<f64>,
    pub points: LabeledPoints,
}

#[derive(Debug, Default)]
pub(crate) struct Caches {
    cloud_tree: OnceLock<KdTree>,
    labeled: OnceLock<LabeledPoints>,
    raster: OnceLock<Raster>,
}

impl Caches {
    fn cloud_tree(&self, c: &PointCloud) -> &KdTree {
        self.cloud_tree.get_or_init(|| KdTree::new(c.dim, &c.coords))
    }
}

struct ExtInner {
    base: LabelField,
    caches: Caches,
}

/// `f̄`: the field extended by the reject label outside `M`.
#[derive(Clone)]
pub struct ExtendedField {
    inner: Arc<ExtInner>,
}

impl fmt::Debug for ExtendedField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtendedField")
            .field("base", &self.inner.base)
            .finish()
    }
}

pub fn extend(field: LabelField) -> ExtendedField {
    ExtendedField {
        inner: Arc::new(ExtInner {
            base: field,
            caches: Caches::default(),
        }),
    }
}

impl ExtendedField {
    pub fn base(&self) -> &LabelField {
        &self.inner.base
    }

    pub fn domain(&self) -> &Domain {
        self.inner.base.domain()
    }

    pub fn dim(&self) -> usize {
        self.inner.base.dim()
    }

    /// `f̄(x)`: `f(x)` on `M`, the reject label elsewhere.
    pub fn evaluate(&self, x: &[f64]) -> ExtLabel {
        if x.len() != self.dim() || !self.domain().contains(x) {
            return ExtLabel::Outside;
        }
        self.inner.base.raw_label(x, Some(&self.inner.caches))
    }

    /// `Ȳ` in slot order: the reject label first, then `Y` ascending.
    pub fn slots(&self) -> Vec<ExtLabel> {
        std::iter::once(ExtLabel::Outside)
            .chain(self.inner.base.label_set.iter().map(|&l| ExtLabel::Class(l)))
            .collect()
    }

    /// Labelled points of a cloud or grid (cell centres).
    pub(crate) fn labeled_points(&self) -> Option<&LabeledPoints> {
        match &self.inner.base.repr {
            Representation::PointCloud(c) => Some(self.inner.caches.labeled.get_or_init(|| {
                LabeledPoints::new(
                    c.dim,
                    c.coords.clone(),
                    c.labels.iter().map(|&l| ExtLabel::Class(l)).collect(),
                )
            })),
            Representation::Grid(g) => Some(self.inner.caches.labeled.get_or_init(|| {
                let mut coords = Vec::with_capacity(g.cell_count() * g.lo.len());
                for i in 0..g.cell_count() {
                    coords.extend(g.cell_center(i));
                }
                LabeledPoints::new(
                    g.lo.len(),
                    coords,
                    g.labels.iter().map(|&l| ExtLabel::Class(l)).collect(),
                )
            })),
            Representation::Oracle(_) => None,
        }
    }

    pub(crate) fn raster(&self) -> Option<&Raster> {
        let Representation::Oracle(o) = &self.inner.base.repr else {
            return None;
        };
        Some(self.inner.caches.raster.get_or_init(|| {
            let (lo, hi) = o.domain.bounding_box();
            let d = lo.len();
            let res: Vec<usize> = (0..d)
                .map(|k| (((hi[k] - lo[k]) / o.scan_resolution).ceil() as usize).max(1))
                .collect();
            let spacing: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / res[k] as f64).collect();
            let total: usize = res.iter().product();
            let mut coords = Vec::new();
            let mut labels = Vec::new();
            let mut c = vec![0.0; d];
            for mut idx in 0..total {
                for k in (0..d).rev() {
                    let i = idx % res[k];
                    idx /= res[k];
                    c[k] = lo[k] + (i as f64 + 0.5) * spacing[k];
                }
                if o.domain.contains(&c) {
                    coords.extend_from_slice(&c);
                    labels.push(o.oracle.label(&c));
                }
            }
            Raster {
                spacing,
                points: LabeledPoints::new(d, coords, labels),
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign_grid() -> LabelField {
        LabelField::grid_from_fn(vec![-1.0], vec![1.0], vec![200], |x| if x[0] >= 0.0 { 1 } else { -1 })
            .unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(LabelField::grid(vec![0.0], vec![1.0], vec![3], vec![1, 2], None).is_err());
        let set: BTreeSet<Label> = [1].into_iter().collect();
        assert!(matches!(
            LabelField::grid(vec![0.0], vec![1.0], vec![2], vec![1, 2], Some(set)),
            Err(Error::UnknownLabel(2))
        ));
    }

    #[test]
    fn cloud_validation() {
        assert!(LabelField::point_cloud(vec![], vec![], None).is_err());
        let dom = Domain::cube(1, 1.0).unwrap();
        assert!(LabelField::point_cloud(vec![vec![2.0]], vec![1], Some(dom)).is_err());
    }

    #[test]
    fn extension_rejects_outside() {
        let f = extend(sign_grid());
        assert_eq!(f.evaluate(&[0.5]), ExtLabel::Class(1));
        assert_eq!(f.evaluate(&[-0.5]), ExtLabel::Class(-1));
        assert_eq!(f.evaluate(&[2.0]), ExtLabel::Outside);
        assert_eq!(f.evaluate(&[1.0]), ExtLabel::Class(1));
        assert_eq!(
            f.slots(),
            vec![ExtLabel::Outside, ExtLabel::Class(-1), ExtLabel::Class(1)]
        );
    }

    #[test]
    fn relabel_rejects_collisions() {
        let g = sign_grid();
        let m: BTreeMap<Label, Label> = [(-1, 5), (1, 5)].into_iter().collect();
        assert!(matches!(relabel(&g, &m), Err(Error::NonInjective(..))));
        let id = relabel(&g, &BTreeMap::new()).unwrap();
        let (a, b) = (extend(g), extend(id));
        for i in 0..100 {
            let x = [-1.0 + 0.02 * i as f64];
            assert_eq!(a.evaluate(&x), b.evaluate(&x));
        }
    }

    #[test]
    fn rescale_rejects_non_positive() {
        assert!(matches!(rescale_domain(&sign_grid(), 0.0), Err(Error::NonPositiveScale(_))));
        assert!(rescale_domain(&sign_grid(), -2.0).is_err());
    }

    #[test]
    fn cloud_labels_by_nearest_point() {
        let f = LabelField::point_cloud(
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![3, 4],
            None,
        )
        .unwrap();
        let e = extend(f);
        assert_eq!(e.evaluate(&[0.2, 0.0]), ExtLabel::Class(3));
        assert_eq!(e.evaluate(&[0.9, 0.0]), ExtLabel::Class(4));
    }
}
