//! Static k-d tree for exact nearest-neighbour queries under any `p`-norm.
//!
//! The splitting-plane test `|x_axis - split| >= best` is a valid lower bound
//! for every Minkowski norm, so one tree serves all `p`.

use crate::norm::NormP;

const LEAF_SIZE: usize = 12;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Clone, Debug)]
pub struct KdTree {
    dim: usize,
    /// Row-major coordinates, reordered so that each leaf is contiguous.
    coords: Vec<f64>,
    /// Original index of each stored row.
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    /// Builds a tree over `n = coords.len() / dim` points given row-major.
    pub fn new(dim: usize, coords: &[f64]) -> KdTree {
        assert!(dim > 0 && coords.len().is_multiple_of(dim));
        let n = coords.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build(&mut nodes, dim, coords, &mut order, 0);
        }
        let mut sorted = Vec::with_capacity(coords.len());
        for &i in &order {
            sorted.extend_from_slice(&coords[i * dim..(i + 1) * dim]);
        }
        KdTree {
            dim,
            coords: sorted,
            ids: order,
            nodes,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn point(&self, slot: usize) -> &[f64] {
        &self.coords[slot * self.dim..(slot + 1) * self.dim]
    }

    /// Nearest stored point: `(original index, distance)`.
    pub fn nearest(&self, x: &[f64], p: NormP) -> Option<(usize, f64)> {
        self.k_nearest(x, 1, p).into_iter().next()
    }

    /// The `k` nearest stored points sorted by distance.
    pub fn k_nearest(&self, x: &[f64], k: usize, p: NormP) -> Vec<(usize, f64)> {
        debug_assert_eq!(x.len(), self.dim);
        if self.is_empty() || k == 0 {
            return Vec::new();
        }
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        self.search(0, x, k, p, &mut best);
        best.into_iter().map(|(d, slot)| (self.ids[slot], d)).collect()
    }

    fn search(&self, node: usize, x: &[f64], k: usize, p: NormP, best: &mut Vec<(f64, usize)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let d = p.distance(x, self.point(slot));
                    if best.len() < k || d < best[best.len() - 1].0 {
                        let pos = best.partition_point(|e| e.0 <= d);
                        best.insert(pos, (d, slot));
                        if best.len() > k {
                            best.pop();
                        }
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = x[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, x, k, p, best);
                if best.len() < k || diff.abs() < best[best.len() - 1].0 {
                    self.search(far, x, k, p, best);
                }
            }
        }
    }
}

fn build(nodes: &mut Vec<Node>, dim: usize, coords: &[f64], order: &mut [usize], offset: usize) -> usize {
    let id = nodes.len();
    if order.len() <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + order.len(),
        });
        return id;
    }
    let coord = |i: usize, a: usize| coords[i * dim + a];
    let axis = (0..dim)
        .max_by(|&a, &b| {
            let spread = |ax: usize| {
                let (lo, hi) = order.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    (lo.min(coord(i, ax)), hi.max(coord(i, ax)))
                });
                hi - lo
            };
            spread(a).total_cmp(&spread(b))
        })
        .unwrap_or(0);
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&i, &j| coord(i, axis).total_cmp(&coord(j, axis)));
    let value = coord(order[mid], axis);
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (lhs, rhs) = order.split_at_mut(mid);
    let left = build(nodes, dim, coords, lhs, offset);
    let right = build(nodes, dim, coords, rhs, offset + mid);
    nodes[id] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    id
}
