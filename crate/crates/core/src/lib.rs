//! Spatial graphs, their dilated occupancy fields, and the geometric
//! machinery around them: rasterization, thinning, graph extraction,
//! topology checks and reconstruction metrics.

pub mod error;
pub mod extract;
pub mod field;
pub mod geom;
pub mod graph;
pub mod metrics;
pub mod pipeline;
pub mod sampling;
pub mod synth;
pub mod topology;
pub mod union_find;

pub use error::{Error, Result};
pub use graph::{betti_numbers, normalize_graph, BettiPair, SpatialGraph};
