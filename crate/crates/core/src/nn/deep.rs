//! Narrow deep ReLU networks of width `d + q + 2`.
//!
//! A one-hidden-layer ReLU network with `m` units is rewritten layer by layer:
//! `d` channels carry the shifted input `x + C`, `q` channels accumulate the
//! shifted outputs `D_i + Σ a_ij u_j`, and two channels evaluate two hidden
//! units per layer. The shifts keep every carried value positive on `K`, so
//! the ReLU acts as the identity on them and the deep network equals the
//! shallow one on `K`.

use serde::{Deserialize, Serialize};

use super::train::{train_shallow, verify, TrainConfig, TrainReport};
use super::{Activation, Layer, Network};
use crate::construct::HField;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::ExtendedField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowDeep {
    pub network: Network,
    /// The shallow network it was compiled from.
    pub source: Network,
}

/// Largest value of `relu(w·x + b)` over the box.
fn unit_max(w: &[f64], b: f64, lo: &[f64], hi: &[f64]) -> f64 {
    let top: f64 = b + w
        .iter()
        .zip(lo.iter().zip(hi))
        .map(|(a, (l, h))| (a * l).max(a * h))
        .sum::<f64>();
    top.max(0.0)
}

/// Rewrites a one-hidden-layer ReLU network as a network of width `d + q + 2`
/// that agrees with it on the box `K`.
pub fn compile_narrow(source: &Network, k: &Domain) -> Result<Network> {
    if source.activation != Activation::Relu {
        return Err(Error::Unsupported("narrow deep compilation needs ReLU".into()));
    }
    if source.depth() != 1 {
        return Err(Error::Unsupported("source must have one hidden layer".into()));
    }
    let d = source.input_dim();
    if k.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: k.dim(),
        });
    }
    let q = source.output_dim();
    let hid = &source.layers[0];
    let out = &source.layers[1];
    let m = hid.outputs();
    let (lo, hi) = k.bounding_box();
    let umax: Vec<f64> = (0..m).map(|j| unit_max(hid.row(j), hid.biases[j], &lo, &hi)).collect();
    let shift: Vec<f64> = lo.iter().map(|l| 1.0 - l).collect();
    let offset: Vec<f64> = (0..q)
        .map(|i| 1.0 + (0..m).map(|j| out.weights[i * m + j].abs() * umax[j]).sum::<f64>())
        .collect();
    // pad to an even number of units with a dead unit
    let unit = |j: usize| -> (Vec<f64>, f64) {
        if j < m {
            (hid.row(j).to_vec(), hid.biases[j])
        } else {
            (vec![0.0; d], 0.0)
        }
    };
    let coef = |i: usize, j: usize| if j < m { out.weights[i * m + j] } else { 0.0 };
    let padded = m + m % 2;
    let depth = padded / 2;
    let width = d + q + 2;
    let mut layers = Vec::with_capacity(depth + 1);
    // first layer reads x
    let mut first = Layer::zeros(d, width);
    for c in 0..d {
        first.weights[c * d + c] = 1.0;
        first.biases[c] = shift[c];
    }
    first.biases[d..d + q].copy_from_slice(&offset);
    for s in 0..2 {
        let (w, b) = unit(s);
        first.weights[(d + q + s) * d..(d + q + s + 1) * d].copy_from_slice(&w);
        first.biases[d + q + s] = b;
    }
    layers.push(first);
    for l in 1..depth {
        let mut layer = Layer::zeros(width, width);
        for c in 0..d {
            layer.weights[c * width + c] = 1.0;
        }
        for i in 0..q {
            let r = (d + i) * width;
            layer.weights[r + d + i] = 1.0;
            layer.weights[r + d + q] = coef(i, 2 * l - 2);
            layer.weights[r + d + q + 1] = coef(i, 2 * l - 1);
        }
        for s in 0..2 {
            let (w, b) = unit(2 * l + s);
            let r = (d + q + s) * width;
            layer.weights[r..r + d].copy_from_slice(&w);
            layer.biases[d + q + s] = b - w.iter().zip(&shift).map(|(a, c)| a * c).sum::<f64>();
        }
        layers.push(layer);
    }
    let mut last = Layer::zeros(width, q);
    for i in 0..q {
        let r = i * width;
        last.weights[r + d + i] = 1.0;
        last.weights[r + d + q] = coef(i, padded - 2);
        last.weights[r + d + q + 1] = coef(i, padded - 1);
        last.biases[i] = out.biases[i] - offset[i];
    }
    layers.push(last);
    Network::new(Activation::Relu, layers, source.slots.clone())
}

/// Grows the depth (doubling the number of compiled units) until the certified
/// sup error drops below `ε / 2` or `max_depth` is reached.
pub fn train_narrow_deep(
    field: &ExtendedField,
    k: &Domain,
    cfg: &TrainConfig,
    max_depth: usize,
) -> Result<(NarrowDeep, TrainReport)> {
    if cfg.activation != Activation::Relu {
        return Err(Error::Unsupported(format!(
            "narrow deep networks are built for ReLU only, got {:?}",
            cfg.activation
        )));
    }
    if max_depth == 0 {
        return Err(Error::InvalidParameter("max_depth must be positive".into()));
    }
    let h = HField::new(field.clone(), cfg.p, cfg.boundary);
    let mut depth = 1;
    loop {
        let shallow_cfg = TrainConfig {
            width: 2 * depth,
            ..cfg.clone()
        };
        let (source, base) = train_shallow(field, k, &shallow_cfg)?;
        let network = compile_narrow(&source, k)?;
        let mut report = verify(
            &network,
            Some(&source),
            &h,
            k,
            cfg.epsilon,
            cfg.train_resolution / cfg.verify_factor as f64,
        )?;
        report.train_points = base.train_points;
        report.iterations = base.iterations;
        report.seed = cfg.seed;
        if report.passed || depth >= max_depth {
            return Ok((NarrowDeep { network, source }, report));
        }
        depth = (depth * 2).min(max_depth);
    }
}
