//! Stability and accuracy of a trained classifier against its target.

use serde::{Deserialize, Serialize};

use super::field::net_field;
use super::train::{train_shallow, TrainConfig, TrainReport};
use super::Network;
use crate::construct::HField;
use crate::distance::DistanceSpec;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::{ExtLabel, ExtendedField};
use crate::stability::{accuracy_measure, paired_stability};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Allowed stability deficit.
    pub eps1: f64,
    /// Allowed measure of the disagreement set.
    pub eps2: f64,
    pub samples: usize,
    pub seed: u64,
    /// Raster spacing for distances of the network's label field.
    pub scan_resolution: Option<f64>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            eps1: 0.05,
            eps2: 0.05,
            samples: 20_000,
            seed: 0,
            scan_resolution: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorCheck {
    pub point: Vec<f64>,
    pub expected: ExtLabel,
    pub predicted: ExtLabel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub reference: f64,
    pub candidate: f64,
    /// `S(f̄) - S(p_q ∘ ψ)` on common samples.
    pub deficit: f64,
    pub deficit_std_error: f64,
    /// `μ({x : f(x) != p_q(ψ(x))})`.
    pub mismatch: f64,
    pub mismatch_std_error: f64,
    pub anchors: Vec<AnchorCheck>,
    pub anchors_matched: bool,
    /// `deficit + 3σ <= ε₁`.
    pub deficit_ok: bool,
    /// `mismatch + 3σ <= ε₂`.
    pub mismatch_ok: bool,
    pub passed: bool,
}

fn check_anchors(field: &ExtendedField, spec: &DistanceSpec, anchors: &[Vec<f64>]) -> Result<()> {
    let h = HField::new(field.clone(), spec.p, spec.boundary);
    for (i, a) in anchors.iter().enumerate() {
        let v = h.evaluate(a)?;
        if !(v.vector[v.slot - 1] > 0.0) || !field.domain().contains(a) {
            return Err(Error::AtIndex {
                index: i,
                source: Box::new(Error::InvalidParameter("anchor points need h > 0 inside M".into())),
            });
        }
    }
    Ok(())
}

/// Compares the label field of `net` with `field` on `domain`.
pub fn stability_chain(
    field: &ExtendedField,
    net: &Network,
    domain: &Domain,
    spec: &DistanceSpec,
    anchors: &[Vec<f64>],
    cfg: &ChainConfig,
) -> Result<ChainReport> {
    check_anchors(field, spec, anchors)?;
    let candidate = net_field(net, field.domain().clone(), cfg.scan_resolution)?;
    let paired = paired_stability(field, &candidate, domain, spec, cfg.samples, cfg.seed)?;
    let acc = accuracy_measure(&candidate, field, domain, cfg.samples, cfg.seed ^ 0x5eed)?;
    let mismatch = domain.volume() - acc.value;
    let anchors: Vec<AnchorCheck> = anchors
        .iter()
        .map(|a| AnchorCheck {
            point: a.clone(),
            expected: field.evaluate(a),
            predicted: candidate.evaluate(a),
        })
        .collect();
    let anchors_matched = anchors.iter().all(|a| a.expected == a.predicted);
    let deficit_ok = paired.deficit + 3.0 * paired.std_error <= cfg.eps1;
    let mismatch_ok = mismatch + 3.0 * acc.std_error <= cfg.eps2;
    Ok(ChainReport {
        reference: paired.reference,
        candidate: paired.candidate,
        deficit: paired.deficit,
        deficit_std_error: paired.std_error,
        mismatch,
        mismatch_std_error: acc.std_error,
        anchors,
        anchors_matched,
        deficit_ok,
        mismatch_ok,
        passed: anchors_matched && deficit_ok && mismatch_ok,
    })
}

/// Trains until every anchor is classified correctly, doubling the width
/// after each miss. Returns the last network and the number of attempts.
pub fn train_with_anchors(
    field: &ExtendedField,
    k: &Domain,
    cfg: &TrainConfig,
    anchors: &[Vec<f64>],
    max_attempts: usize,
) -> Result<(Network, TrainReport, usize)> {
    if max_attempts == 0 {
        return Err(Error::InvalidParameter("max_attempts must be positive".into()));
    }
    let spec = DistanceSpec::pointwise(cfg.p, cfg.boundary);
    check_anchors(field, &spec, anchors)?;
    let mut cfg = cfg.clone();
    let mut attempt = 0;
    loop {
        attempt += 1;
        let (net, report) = train_shallow(field, k, &cfg)?;
        let hit = anchors
            .iter()
            .all(|a| net.slots[net.predict_slot(a) - 1] == field.evaluate(a));
        if hit || attempt == max_attempts {
            return Ok((net, report, attempt));
        }
        cfg.width *= 2;
    }
}
