//! Feed-forward networks approximating the H field.

mod chain;
mod deep;
mod field;
mod train;

pub use chain::{stability_chain, train_with_anchors, AnchorCheck, ChainConfig, ChainReport};
pub use deep::{compile_narrow, train_narrow_deep, NarrowDeep};
pub use field::{net_field, stability_of_net, NetOracle};
pub use train::{default_compact, train_shallow, verify, TrainConfig, TrainReport};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::construct::class_prediction;
use crate::error::{Error, Result};
use crate::field::ExtLabel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - z.tanh().powi(2),
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + (-z).exp());
                s * (1.0 - s)
            }
        }
    }

    /// `sup |ρ''|` for the smooth activations.
    pub fn second_derivative_bound(self) -> f64 {
        match self {
            Activation::Relu => f64::INFINITY,
            // 4 / (3 sqrt 3) and 1 / (6 sqrt 3)
            Activation::Tanh => 4.0 / (3.0 * 3f64.sqrt()),
            Activation::Sigmoid => 1.0 / (6.0 * 3f64.sqrt()),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relu" => Ok(Activation::Relu),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            _ => Err(Error::Parse(format!("unknown activation {s:?}"))),
        }
    }
}

/// Affine map `z -> W z + b` with `W` stored row-major (`outputs x inputs`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(inputs: usize, outputs: usize) -> Layer {
        Layer {
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    pub fn outputs(&self) -> usize {
        self.biases.len()
    }

    pub fn inputs(&self) -> usize {
        self.weights.len() / self.biases.len().max(1)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.inputs();
        &self.weights[i * n..(i + 1) * n]
    }

    fn apply_into(&self, x: &[f64], out: &mut Vec<f64>) {
        let n = self.inputs();
        let x = &x[..n];
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(n)
                .zip(&self.biases)
                .map(|(row, b)| b + dot(row, x)),
        );
    }
}

/// Dot product with four partial sums.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `x -> A_L ρ(A_{L-1} ρ(... ρ(A_1 x)))`; the activation follows every layer
/// but the last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub dims: Vec<usize>,
    pub activation: Activation,
    pub layers: Vec<Layer>,
    /// Extended label carried by each output coordinate.
    #[serde(default)]
    pub slots: Vec<ExtLabel>,
}

impl Network {
    pub fn new(activation: Activation, layers: Vec<Layer>, slots: Vec<ExtLabel>) -> Result<Network> {
        let first = layers
            .first()
            .ok_or_else(|| Error::InvalidParameter("network needs at least one layer".into()))?;
        let mut dims = vec![first.inputs()];
        dims.extend(layers.iter().map(Layer::outputs));
        let net = Network {
            dims,
            activation,
            layers,
            slots,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() || self.dims.len() != self.layers.len() + 1 {
            return Err(Error::InvalidParameter("dims must list every layer width".into()));
        }
        for (k, l) in self.layers.iter().enumerate() {
            let (i, o) = (self.dims[k], self.dims[k + 1]);
            if o == 0 || l.biases.len() != o || l.weights.len() != i * o {
                return Err(Error::InvalidParameter(format!(
                    "layer {k} has shape mismatch with dims {i} -> {o}"
                )));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("layer {k} has non-finite weights")));
            }
        }
        if !self.slots.is_empty() && self.slots.len() != self.output_dim() {
            return Err(Error::InvalidParameter("one slot label per output required".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// Largest hidden width.
    pub fn width(&self) -> usize {
        self.dims[1..self.dims.len() - 1].iter().copied().max().unwrap_or(0)
    }

    /// Number of hidden layers.
    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    /// Forward pass without dimension checks.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (k, l) in self.layers.iter().enumerate() {
            l.apply_into(&cur, &mut next);
            if k < last {
                for v in next.iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    }

    /// 1-based predicted slot.
    pub fn predict_slot(&self, x: &[f64]) -> usize {
        class_prediction(&self.forward(x)).unwrap_or(1)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Network> {
        let net: Network = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        net.validate()?;
        Ok(net)
    }
}

/// Forward pass with a dimension check.
pub fn eval_net(net: &Network, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: x.len(),
        });
    }
    Ok(net.forward(x))
}
