//! Training shallow networks to approximate `H` and verifying the sup error.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dot, Activation, Layer, Network};
use crate::construct::{class_prediction, grid_nodes, HField};
use crate::distance::BoundaryMode;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::ExtendedField;
use crate::norm::NormP;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epsilon: f64,
    pub p: NormP,
    pub boundary: BoundaryMode,
    pub activation: Activation,
    pub width: usize,
    /// Spacing of the training grid over `K`.
    pub train_resolution: f64,
    /// The verification grid is this many times finer than the training grid.
    pub verify_factor: usize,
    pub lawson_iterations: usize,
    pub refine_steps: usize,
    pub ridge: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epsilon: 0.1,
            p: NormP::L2,
            boundary: BoundaryMode::Interior,
            activation: Activation::Relu,
            width: 256,
            train_resolution: 0.01,
            verify_factor: 4,
            lawson_iterations: 12,
            refine_steps: 300,
            ridge: 1e-10,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.width == 0 {
            return Err(Error::InvalidParameter("width must be positive".into()));
        }
        if !(self.train_resolution > 0.0) {
            return Err(Error::InvalidParameter("train_resolution must be positive".into()));
        }
        if self.verify_factor == 0 {
            return Err(Error::InvalidParameter("verify_factor must be positive".into()));
        }
        if !(self.ridge >= 0.0) {
            return Err(Error::InvalidParameter("ridge must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub activation: Activation,
    pub width: usize,
    pub depth: usize,
    pub epsilon: f64,
    /// `ε / 2`.
    pub target: f64,
    /// Largest error seen on the verification nodes.
    pub sup_error_grid: f64,
    /// Certified bound on `sup_K ||ψ - H||_∞`.
    pub sup_error_bound: f64,
    pub passed: bool,
    /// Share of stable verification nodes whose predicted slot is correct.
    pub interpolation_fraction: f64,
    pub stable_points: usize,
    /// No verification node was ε-stable.
    pub vacuous: bool,
    pub train_points: usize,
    pub verify_points: usize,
    pub verify_spacing: f64,
    pub iterations: usize,
    pub seed: u64,
}

/// Default `K`: the ε-inflated bounding box in extension mode, `M` itself in
/// interior mode (which must then be a box).
pub fn default_compact(field: &ExtendedField, epsilon: f64, boundary: BoundaryMode) -> Result<Domain> {
    match boundary {
        BoundaryMode::Extension => Ok(field.domain().inflated_box(epsilon)),
        BoundaryMode::Interior => match field.domain() {
            d @ Domain::Box { .. } => Ok(d.clone()),
            _ => Err(Error::Unsupported(
                "interior-mode training needs a box domain; pass K explicitly".into(),
            )),
        },
    }
}

/// The box actually covered by training and verification: `K` itself or its
/// bounding box when `K` is a ball.
fn compact_box(h: &HField, k: &Domain) -> Result<Domain> {
    if k.dim() != h.field().dim() {
        return Err(Error::DimensionMismatch {
            expected: h.field().dim(),
            got: k.dim(),
        });
    }
    let boxed = match k {
        Domain::Box { .. } => k.clone(),
        Domain::Ball { .. } => {
            let (lo, hi) = k.bounding_box();
            Domain::new_box(lo, hi)?
        }
        _ => return Err(Error::Unsupported("K must be a box or a ball".into())),
    };
    if h.boundary() == BoundaryMode::Interior {
        let m = h.field().domain();
        let inside = boxed.vertices().iter().all(|v| m.contains(v));
        if !inside || !matches!(m, Domain::Box { .. }) {
            return Err(Error::Unsupported(
                "interior mode needs K inside a box domain M".into(),
            ));
        }
    }
    Ok(boxed)
}

/// Targets `H(x)` at the nodes.
fn targets(h: &HField, nodes: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Vec<f64>, Vec<usize>)> {
    let vals = nodes
        .par_iter()
        .map(|x| h.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Vec::with_capacity(vals.len());
    let mut err = Vec::with_capacity(vals.len());
    let mut slot = Vec::with_capacity(vals.len());
    for v in vals {
        err.push(v.error_bound);
        slot.push(v.slot);
        t.push(v.vector);
    }
    Ok((t, err, slot))
}

fn random_hidden(k: &Domain, cfg: &TrainConfig, rng: &mut ChaCha8Rng) -> Layer {
    let (lo, hi) = k.bounding_box();
    let d = lo.len();
    let diam = NormP::L2.distance(&lo, &hi).max(f64::MIN_POSITIVE);
    let mut layer = Layer::zeros(d, cfg.width);
    for j in 0..cfg.width {
        let mut w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = w.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let scale = match cfg.activation {
            Activation::Relu => 1.0,
            // steepness between the size of K and a few training cells
            _ => {
                let (a, b) = ((2.0 / diam).ln(), (0.5 / cfg.train_resolution).ln().max((2.0 / diam).ln()));
                (a + (b - a) * rng.random::<f64>()).exp()
            }
        };
        for v in w.iter_mut() {
            *v *= scale / n;
        }
        let c: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.random_range(*l..=*h)).collect();
        layer.biases[j] = -w.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        layer.weights[j * d..(j + 1) * d].copy_from_slice(&w);
    }
    layer
}

fn features(hidden: &Layer, act: Activation, nodes: &[Vec<f64>]) -> DMatrix<f64> {
    let m = hidden.outputs();
    let mut phi = DMatrix::<f64>::zeros(nodes.len(), m + 1);
    for (r, x) in nodes.iter().enumerate() {
        for j in 0..m {
            let z = hidden.biases[j] + hidden.row(j).iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            phi[(r, j)] = act.apply(z);
        }
        phi[(r, m)] = 1.0;
    }
    phi
}

fn weighted_solve(phi: &DMatrix<f64>, u: &[f64], t: &DVector<f64>, ridge: f64) -> Result<DVector<f64>> {
    let mut pw = phi.clone();
    let mut tw = t.clone();
    for (r, w) in u.iter().enumerate() {
        let s = w.sqrt();
        pw.row_mut(r).scale_mut(s);
        tw[r] *= s;
    }
    let pt = pw.transpose();
    let gram = &pt * &pw;
    let rhs = &pt * &tw;
    let m = gram.nrows();
    let scale = gram.trace() / m as f64;
    let mut lambda = ridge * scale;
    for _ in 0..8 {
        let mut g = gram.clone();
        for i in 0..m {
            g[(i, i)] += lambda;
        }
        if let Some(ch) = g.cholesky() {
            return Ok(ch.solve(&rhs));
        }
        lambda = (lambda * 100.0).max(1e-14 * scale);
    }
    Err(Error::InvalidParameter("readout system is singular".into()))
}

/// Least squares followed by Lawson reweighting towards the minimax fit.
fn fit_readout(phi: &DMatrix<f64>, t: &DVector<f64>, iterations: usize, ridge: f64) -> Result<(DVector<f64>, f64)> {
    let n = phi.nrows();
    let mut u = vec![1.0; n];
    let mut best: Option<(DVector<f64>, f64)> = None;
    for _ in 0..=iterations {
        let a = weighted_solve(phi, &u, t, ridge)?;
        let r = phi * &a - t;
        let worst = r.amax();
        if best.as_ref().is_none_or(|(_, b)| worst < *b) {
            best = Some((a, worst));
        }
        let mut total = 0.0;
        for (w, e) in u.iter_mut().zip(r.iter()) {
            *w *= e.abs();
            total += *w;
        }
        if !(total > 0.0) {
            break;
        }
        for w in u.iter_mut() {
            *w = (*w * n as f64 / total).max(1e-12);
        }
    }
    Ok(best.unwrap())
}

fn grid_sup(net: &Network, nodes: &[Vec<f64>], t: &[Vec<f64>]) -> Vec<f64> {
    nodes
        .par_iter()
        .zip(t)
        .map(|(x, tx)| {
            net.forward(x)
                .iter()
                .zip(tx)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(n: usize) -> Adam {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [&mut f64], grad: &[f64], lr: f64) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t);
        let c2 = 1.0 - B2.powi(self.t);
        for (i, p) in params.iter_mut().enumerate() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            **p -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-12);
        }
    }
}

/// Adam on a smoothed max of the residuals over the worst training nodes.
fn refine(net: &mut Network, nodes: &[Vec<f64>], t: &[Vec<f64>], active: &[bool], steps: usize) -> usize {
    const REFRESH: usize = 25;
    let d = net.input_dim();
    let w = net.width();
    let q = net.output_dim();
    let errs = grid_sup(net, nodes, t);
    let mut best_err = errs.iter().copied().fold(0.0, f64::max);
    let mut best = net.clone();
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    let take = nodes.len().min(2048);
    let n_params = w * d + w + q * w + q;
    let mut adam = Adam::new(n_params);
    let mut lr = 1e-4;
    let mut chosen: Vec<usize> = Vec::new();
    let mut current = best_err;
    let mut done = 0;
    for step in 0..steps {
        if step % REFRESH == 0 {
            let errs = grid_sup(net, nodes, t);
            current = errs.iter().copied().fold(0.0, f64::max);
            if current < best_err {
                best_err = current;
                best = net.clone();
            } else if step > 0 {
                lr *= 0.5;
            }
            order.sort_by(|a, b| errs[*b].total_cmp(&errs[*a]).then(a.cmp(b)));
            chosen = order[..take].to_vec();
        }
        let beta = 30.0 / current.max(1e-12);
        let delta = 1e-3 * current.max(1e-12);
        // forward on the active set
        let mut z = vec![0.0; chosen.len() * w];
        let mut r = vec![0.0; chosen.len() * q];
        for (s, &i) in chosen.iter().enumerate() {
            let x = &nodes[i];
            let hid = &net.layers[0];
            for j in 0..w {
                z[s * w + j] = hid.biases[j] + hid.row(j).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            }
            let out = &net.layers[1];
            for k in 0..q {
                let y = out.biases[k]
                    + (0..w)
                        .map(|j| out.weights[k * w + j] * net.activation.apply(z[s * w + j]))
                        .sum::<f64>();
                r[s * q + k] = y - t[i][k];
            }
        }
        // softmax weights of beta * sqrt(r^2 + delta^2)
        let mut logits = vec![f64::NEG_INFINITY; r.len()];
        let mut top = f64::NEG_INFINITY;
        for (s, _) in chosen.iter().enumerate() {
            for k in (0..q).filter(|k| active[*k]) {
                let v = beta * (r[s * q + k].powi(2) + delta * delta).sqrt();
                logits[s * q + k] = v;
                top = top.max(v);
            }
        }
        let mut g = vec![0.0; r.len()];
        let mut total = 0.0;
        for (i, l) in logits.iter().enumerate() {
            if l.is_finite() {
                g[i] = (l - top).exp();
                total += g[i];
            }
        }
        for (i, gi) in g.iter_mut().enumerate() {
            *gi *= r[i] / (r[i].powi(2) + delta * delta).sqrt() / total;
        }
        let mut grad = vec![0.0; n_params];
        let (gw, rest) = grad.split_at_mut(w * d);
        let (gb, rest) = rest.split_at_mut(w);
        let (ga, gc) = rest.split_at_mut(q * w);
        for (s, &i) in chosen.iter().enumerate() {
            let x = &nodes[i];
            for k in (0..q).filter(|k| active[*k]) {
                let gk = g[s * q + k];
                gc[k] += gk;
                for j in 0..w {
                    ga[k * w + j] += gk * net.activation.apply(z[s * w + j]);
                }
            }
            for j in 0..w {
                let back: f64 = (0..q)
                    .filter(|k| active[*k])
                    .map(|k| g[s * q + k] * net.layers[1].weights[k * w + j])
                    .sum::<f64>()
                    * net.activation.derivative(z[s * w + j]);
                gb[j] += back;
                for (c, xv) in x.iter().enumerate() {
                    gw[j * d + c] += back * xv;
                }
            }
        }
        let (l0, l1) = net.layers.split_at_mut(1);
        let mut params: Vec<&mut f64> = l0[0]
            .weights
            .iter_mut()
            .chain(l0[0].biases.iter_mut())
            .chain(l1[0].weights.iter_mut())
            .chain(l1[0].biases.iter_mut())
            .collect();
        adam.step(&mut params, &grad, lr);
        done = step + 1;
    }
    let errs = grid_sup(net, nodes, t);
    if errs.iter().copied().fold(0.0, f64::max) >= best_err {
        *net = best;
    }
    done
}

/// Trains a one-hidden-layer network with `ψ ≈ H` on `K` and verifies it.
pub fn train_shallow(field: &ExtendedField, k: &Domain, cfg: &TrainConfig) -> Result<(Network, TrainReport)> {
    cfg.check()?;
    let h = HField::new(field.clone(), cfg.p, cfg.boundary);
    let k = &compact_box(&h, k)?;
    let nodes = grid_nodes(k, cfg.train_resolution)?;
    if nodes.is_empty() {
        return Err(Error::InvalidParameter("training grid is empty".into()));
    }
    let (t, _, _) = targets(&h, &nodes)?;
    let q = h.q();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let hidden = random_hidden(k, cfg, &mut rng);
    let phi = features(&hidden, cfg.activation, &nodes);
    let w = cfg.width;
    let mut out = Layer::zeros(w, q);
    let mut active = vec![false; q];
    for slot in 0..q {
        let col = DVector::from_iterator(nodes.len(), t.iter().map(|v| v[slot]));
        if col.iter().all(|v| *v == 0.0) {
            continue;
        }
        active[slot] = true;
        let (a, _) = fit_readout(&phi, &col, cfg.lawson_iterations, cfg.ridge)?;
        out.weights[slot * w..(slot + 1) * w].copy_from_slice(&a.as_slice()[..w]);
        out.biases[slot] = a[w];
    }
    drop(phi);
    let mut net = Network::new(cfg.activation, vec![hidden, out], h.slots().to_vec())?;
    let refined = if cfg.refine_steps > 0 {
        refine(&mut net, &nodes, &t, &active, cfg.refine_steps)
    } else {
        0
    };
    let mut report = verify(&net, None, &h, k, cfg.epsilon, cfg.train_resolution / cfg.verify_factor as f64)?;
    report.train_points = nodes.len();
    report.iterations = cfg.lawson_iterations + refined;
    report.seed = cfg.seed;
    Ok((net, report))
}

/// Nodes covering the box with spacing at most `s` per axis; every point of the
/// box lies within half a spacing of a node on each axis.
fn covering_grid(k: &Domain, s: f64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let (lo, hi) = k.bounding_box();
    let counts: Vec<usize> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| ((h - l) / s - 1e-9).ceil().max(0.0) as usize + 1)
        .collect();
    let total = counts
        .iter()
        .try_fold(1usize, |a, &c| a.checked_mul(c))
        .filter(|t| *t <= 50_000_000)
        .ok_or_else(|| Error::InvalidParameter("verification grid too large".into()))?;
    let step: Vec<f64> = lo
        .iter()
        .zip(&hi)
        .zip(&counts)
        .map(|((l, h), c)| if *c > 1 { (h - l) / (*c - 1) as f64 } else { 0.0 })
        .collect();
    let mut nodes = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut x = vec![0.0; lo.len()];
        for a in (0..lo.len()).rev() {
            let i = idx % counts[a];
            idx /= counts[a];
            x[a] = if i + 1 == counts[a] { hi[a] } else { lo[a] + i as f64 * step[a] };
        }
        nodes.push(x);
    }
    // rounding slack on the half spacing
    let half = step.iter().map(|v| 0.5 * v * (1.0 + 1e-12)).collect();
    Ok((nodes, half))
}

/// Off-grid bound of a one-hidden-layer network over boxes of fixed half
/// widths: `|ψ_i(x) - ψ_i(g)|` for `|x_k - g_k| <= half_k`.
struct Variation<'a> {
    net: &'a Network,
    half: Vec<f64>,
    /// hidden weights by input coordinate
    cols: Vec<Vec<f64>>,
    /// `Σ_k |w_jk| half_k`
    reach: Vec<f64>,
    abs_out: Vec<f64>,
}

impl<'a> Variation<'a> {
    fn new(net: &'a Network, half: &[f64]) -> Variation<'a> {
        let hid = &net.layers[0];
        let d = half.len();
        let cols = (0..d).map(|c| hid.weights.chunks_exact(d).map(|r| r[c]).collect()).collect();
        let reach = hid
            .weights
            .chunks_exact(d)
            .map(|r| r.iter().zip(half).map(|(a, h)| a.abs() * h).sum())
            .collect();
        Variation {
            net,
            half: half.to_vec(),
            cols,
            reach,
            abs_out: net.layers[1].weights.iter().map(|v| v.abs()).collect(),
        }
    }

    /// `(ψ(g), bound)`.
    fn at(&self, g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let hid = &self.net.layers[0];
        let out = &self.net.layers[1];
        let act = self.net.activation;
        let w = hid.outputs();
        let mut z = hid.biases.clone();
        for (col, gc) in self.cols.iter().zip(g) {
            for (zj, wj) in z.iter_mut().zip(col) {
                *zj += wj * gc;
            }
        }
        let mut value = vec![0.0; w];
        let mut slope = vec![0.0; w];
        let mut extra = vec![0.0; w];
        match act {
            Activation::Relu => {
                for j in 0..w {
                    let (zj, r) = (z[j], self.reach[j]);
                    value[j] = zj.max(0.0);
                    slope[j] = (zj > r) as u8 as f64;
                    extra[j] = (zj.abs() <= r) as u8 as f64 * r;
                }
            }
            _ => {
                let m2 = 0.5 * act.second_derivative_bound();
                for j in 0..w {
                    value[j] = act.apply(z[j]);
                    slope[j] = act.derivative(z[j]);
                    extra[j] = m2 * self.reach[j] * self.reach[j];
                }
            }
        }
        let q = out.outputs();
        let mut y = Vec::with_capacity(q);
        let mut bound = Vec::with_capacity(q);
        let mut tmp = vec![0.0; w];
        for i in 0..q {
            let a = &out.weights[i * w..(i + 1) * w];
            y.push(out.biases[i] + dot(a, &value));
            for j in 0..w {
                tmp[j] = a[j] * slope[j];
            }
            let lin: f64 = self.cols.iter().zip(&self.half).map(|(col, h)| dot(&tmp, col).abs() * h).sum();
            bound.push(lin + dot(&self.abs_out[i * w..(i + 1) * w], &extra));
        }
        (y, bound)
    }
}

/// Certified sup-error check of `net` against `H` on `K`. `source` is a
/// one-hidden-layer network equal to `net` on `K`; its structure drives the
/// off-grid term when `net` is deeper.
pub fn verify(
    net: &Network,
    source: Option<&Network>,
    h: &HField,
    k: &Domain,
    epsilon: f64,
    spacing: f64,
) -> Result<TrainReport> {
    let k = &compact_box(h, k)?;
    if net.input_dim() != h.field().dim() {
        return Err(Error::DimensionMismatch {
            expected: h.field().dim(),
            got: net.input_dim(),
        });
    }
    if net.output_dim() != h.q() {
        return Err(Error::InvalidParameter(format!(
            "network has {} outputs, H has {} slots",
            net.output_dim(),
            h.q()
        )));
    }
    let shallow = source.unwrap_or(net);
    if shallow.depth() != 1 {
        return Err(Error::Unsupported(
            "off-grid bound needs a one-hidden-layer source network".into(),
        ));
    }
    let (nodes, half) = covering_grid(k, spacing)?;
    let h_term = h.p().norm(&half);
    let plan = Variation::new(shallow, &half);
    struct Node {
        grid: f64,
        bound: f64,
        stable: bool,
        correct: bool,
    }
    let per = nodes
        .par_iter()
        .map(|g| {
            let hv = h.evaluate(g)?;
            let (base, var) = plan.at(g);
            let (y, drift) = match source {
                Some(_) => {
                    let y = net.forward(g);
                    let drift = base.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    (y, drift)
                }
                None => (base, 0.0),
            };
            let mut grid = 0.0f64;
            let mut bound = 0.0f64;
            for i in 0..y.len() {
                let e = (y[i] - hv.vector[i]).abs();
                grid = grid.max(e);
                bound = bound.max(e + hv.error_bound + h_term + var[i] + drift);
            }
            let value = hv.vector[hv.slot - 1];
            let stable = value - hv.error_bound > epsilon;
            let correct = stable && class_prediction(&y).ok() == Some(hv.slot);
            Ok(Node {
                grid,
                bound,
                stable,
                correct,
            })
        })
        .collect::<Result<Vec<Node>>>()?;
    let sup_error_grid = per.iter().map(|n| n.grid).fold(0.0, f64::max);
    let sup_error_bound = per.iter().map(|n| n.bound).fold(0.0, f64::max);
    let stable_points = per.iter().filter(|n| n.stable).count();
    let correct = per.iter().filter(|n| n.correct).count();
    let target = 0.5 * epsilon;
    Ok(TrainReport {
        activation: net.activation,
        width: net.width(),
        depth: net.depth(),
        epsilon,
        target,
        sup_error_grid,
        sup_error_bound,
        passed: sup_error_bound < target,
        interpolation_fraction: if stable_points == 0 {
            1.0
        } else {
            correct as f64 / stable_points as f64
        },
        stable_points,
        vacuous: stable_points == 0,
        train_points: 0,
        verify_points: nodes.len(),
        verify_spacing: spacing,
        iterations: 0,
        seed: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::field::extend;

    #[test]
    fn variation_bounds_sampled_changes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = TrainConfig {
            width: 40,
            ..TrainConfig::default()
        };
        let k = Domain::cube(2, 1.0).unwrap();
        for act in [Activation::Relu, Activation::Tanh, Activation::Sigmoid] {
            let cfg = TrainConfig { activation: act, ..cfg.clone() };
            let hidden = random_hidden(&k, &cfg, &mut rng);
            let mut out = Layer::zeros(40, 2);
            for v in out.weights.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
            let net = Network::new(act, vec![hidden, out], vec![]).unwrap();
            let half = [0.03, 0.02];
            for _ in 0..200 {
                let g: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
                let (_, var) = Variation::new(&net, &half).at(&g);
                let y0 = net.forward(&g);
                for _ in 0..20 {
                    let x: Vec<f64> = g.iter().zip(&half).map(|(c, h)| c + rng.random_range(-h..=*h)).collect();
                    let y = net.forward(&x);
                    for i in 0..2 {
                        assert!((y[i] - y0[i]).abs() <= var[i] + 1e-12, "{act:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn covering_grid_covers() {
        let k = Domain::new_box(vec![-1.0, 0.0], vec![1.0, 0.35]).unwrap();
        let (nodes, half) = covering_grid(&k, 0.1).unwrap();
        assert!(half.iter().all(|h| *h <= 0.05 + 1e-12));
        assert!(nodes.iter().any(|x| x[1] == 0.35));
        assert!(nodes.iter().all(|x| k.contains(x)));
    }

    #[test]
    fn f1_extension_fits() {
        let f = extend(catalog::f1());
        let k = Domain::cube(1, 1.2).unwrap();
        let cfg = TrainConfig {
            epsilon: 0.2,
            boundary: BoundaryMode::Extension,
            width: 64,
            refine_steps: 50,
            ..TrainConfig::default()
        };
        let (net, rep) = train_shallow(&f, &k, &cfg).unwrap();
        assert_eq!(net.output_dim(), 3);
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.interpolation_fraction, 1.0);
        let (net2, rep2) = train_shallow(&f, &k, &cfg).unwrap();
        assert_eq!(net, net2);
        assert_eq!(rep, rep2);
    }
}
