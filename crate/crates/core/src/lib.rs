//! Even-order polynomial graph filters with homophily and spectral diagnostics.

pub mod attacks;
pub mod error;
pub mod filters;
pub mod graph;
pub mod harness;
pub mod homophily;
pub mod io;
pub mod model;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
pub use filters::{Parity, PolyFilter};
pub use graph::{DenseOperator, FeatureMatrix, Graph, LabelAssignment, Propagator};
pub use model::{ModelParams, TrainConfig, TrainReport, Variant};
