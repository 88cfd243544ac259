//! Streaming extraction of edge-disjoint double rays from lazily presented
//! locally finite graphs.

pub mod error;
pub mod graph;
pub mod pipeline;
pub mod connectors;
pub mod extraction;
pub mod rays;
pub mod separations;
pub mod shapes;

pub use error::{Error, Result};
