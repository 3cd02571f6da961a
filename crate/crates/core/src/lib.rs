//! Distance to the decision boundary and class stability of classification
//! functions, with constructions of stable approximating ReLU networks.

pub mod catalog;
pub mod construct;
pub mod distance;
pub mod domain;
pub mod error;
pub mod field;
pub mod gamma;
pub mod io;
pub mod kdtree;
pub mod nn;
pub mod norm;
pub mod reproduce;
pub mod stability;

pub use distance::{BoundaryMode, DistanceEstimate, DistanceSpec, MeasureConfig, Method, Mode};
pub use domain::{DistanceBound, Domain};
pub use error::{Error, Result};
pub use field::{extend, relabel, rescale_domain, ExtLabel, ExtendedField, Label, LabelField, LabelOracle};
pub use norm::NormP;
pub use io::load_field;
pub use nn::{eval_net, Activation, Network};
