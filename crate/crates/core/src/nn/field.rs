//! The classifier `p_q ∘ ψ` of a network as a label field.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::Network;
use crate::distance::DistanceSpec;
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::field::{extend, ExtLabel, ExtendedField, LabelField, LabelOracle};
use crate::stability::{class_stability, Integrator, StabilityEstimate};

/// Labels `x` with the slot label of the first maximal output.
#[derive(Clone, Debug)]
pub struct NetOracle {
    net: Network,
}

impl NetOracle {
    pub fn new(net: Network) -> Result<NetOracle> {
        if net.slots.len() != net.output_dim() {
            return Err(Error::InvalidParameter("network has no slot labels".into()));
        }
        Ok(NetOracle { net })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }
}

impl LabelOracle for NetOracle {
    fn label(&self, x: &[f64]) -> ExtLabel {
        self.net.slots[self.net.predict_slot(x) - 1]
    }
}

/// `p_q ∘ ψ` restricted to `domain`. Points predicted as the reject slot keep
/// that label. `scan_resolution` sets the raster used for distances.
pub fn net_field(net: &Network, domain: Domain, scan_resolution: Option<f64>) -> Result<ExtendedField> {
    if domain.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: domain.dim(),
        });
    }
    let labels: BTreeSet<i64> = net.slots.iter().filter_map(|l| l.class()).collect();
    let mut field = LabelField::oracle(Arc::new(NetOracle::new(net.clone())?), domain, labels)?;
    if let Some(s) = scan_resolution {
        field = field.with_scan_resolution(s)?;
    }
    Ok(extend(field))
}

/// `S(p_q ∘ ψ)` over `domain`.
pub fn stability_of_net(
    net: &Network,
    domain: &Domain,
    spec: &DistanceSpec,
    integrator: Integrator,
    samples: usize,
    seed: u64,
) -> Result<StabilityEstimate> {
    let f = net_field(net, domain.clone(), None)?;
    class_stability(&f, domain, spec, integrator, samples, seed)
}
