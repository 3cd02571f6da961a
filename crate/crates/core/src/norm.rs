//! Minkowski `p`-norms on `R^d`, `1 <= p <= inf`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// The exponent of an `L^p` norm. `p = inf` is a distinguished variant so that
/// the max-coordinate norm is evaluated exactly rather than as a limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormP {
    Finite(f64),
    Infinity,
}

impl NormP {
    pub const L1: NormP = NormP::Finite(1.0);
    pub const L2: NormP = NormP::Finite(2.0);
    pub const LINF: NormP = NormP::Infinity;

    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(NormP::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(NormP::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!(
                "norm exponent must lie in [1, inf], got {p}"
            )))
        }
    }

    /// The exponent as a float (`f64::INFINITY` for the max norm).
    pub fn exponent(self) -> f64 {
        match self {
            NormP::Finite(p) => p,
            NormP::Infinity => f64::INFINITY,
        }
    }

    pub fn is(self, p: f64) -> bool {
        self.exponent() == p
    }

    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            NormP::Infinity => v.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            NormP::Finite(1.0) => v.iter().map(|x| x.abs()).sum(),
            NormP::Finite(2.0) => l2_norm(v),
            NormP::Finite(p) => {
                // scale by the max entry to avoid overflow for large p
                let m = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if m == 0.0 {
                    return 0.0;
                }
                m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }

    pub fn distance(self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self {
            NormP::Infinity => x
                .iter()
                .zip(y)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
            NormP::Finite(1.0) => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            NormP::Finite(2.0) => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            _ => {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                self.norm(&diff)
            }
        }
    }

    /// `||(1, ..., 1)||_p` in dimension `d`, i.e. `d^(1/p)`.
    pub fn ones_norm(self, d: usize) -> f64 {
        match self {
            NormP::Infinity => 1.0,
            NormP::Finite(p) => (d as f64).powf(1.0 / p),
        }
    }

    /// Smallest `c` with `||v||_2 <= c ||v||_p` for all `v` in `R^d`.
    pub fn l2_over_p(self, d: usize) -> f64 {
        let p = self.exponent();
        if p >= 2.0 {
            (d as f64).powf(0.5 - 1.0 / p)
        } else {
            1.0
        }
    }

    /// Smallest `c` with `||v||_p <= c ||v||_2` for all `v` in `R^d`.
    pub fn p_over_l2(self, d: usize) -> f64 {
        let p = self.exponent();
        if p <= 2.0 {
            (d as f64).powf(1.0 / p - 0.5)
        } else {
            1.0
        }
    }
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl fmt::Display for NormP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormP::Infinity => write!(f, "inf"),
            NormP::Finite(p) => write!(f, "{p}"),
        }
    }
}

impl FromStr for NormP {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "max" => Ok(NormP::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad norm exponent {s:?}")))?;
                NormP::new(p)
            }
        }
    }
}

impl Serialize for NormP {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NormP::Infinity => s.serialize_str("inf"),
            NormP::Finite(p) => s.serialize_f64(*p),
        }
    }
}

impl<'de> Deserialize<'de> for NormP {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(p) => NormP::new(p).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
