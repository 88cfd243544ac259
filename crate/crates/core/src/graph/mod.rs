//! Lazily presented graphs, finite truncations and the finite algorithms on them.

mod export;
mod finite;
mod flow;
pub mod instances;
mod lazy;
mod vertex;

pub use export::{to_dot, DotOverlay};
pub use finite::{components, FiniteGraph, GraphExport};
pub(crate) use flow::min_cut_indices;
pub use flow::{
    edge_disjoint_paths, max_edge_disjoint_paths, min_vertex_cut, min_vertex_cut_avoiding,
    PathPacking, VertexCut,
};
pub use instances::{
    canonical_generator, instance, instance_from_spec, registered_instances, EndSpec, InstanceSpec,
};
pub use lazy::{truncate, Ball, EndDecl, EndDegree, LazyGraph, Oracle, DEFAULT_DEGREE_BOUND};
pub use vertex::{path_edges, EdgeId, VertexId};
