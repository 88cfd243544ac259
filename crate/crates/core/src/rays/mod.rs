//! Rays, double rays and 2-rays as horizon-indexed streams, and their calculus.

mod checkpoint;
mod ops;
mod stream;

pub use checkpoint::{Checkpoints, PathRun, MAX_DOUBLINGS};
pub use ops::{
    check_vertex_degree, disjoint_witness, edge_disjoint_rays_from, locally_finite_hull, make_lefty,
    rays_from_starts, refine_mutual_intersection, tailor, to_two_ray, Hull, HullAudit,
};
pub use stream::{
    pairwise_edge_disjoint, tail_of, DoubleRayExport, DoubleRayPrefix, DoubleRayStream,
    FamilyGenerator, RayExport, RayStream, TwoRayPrefix, TwoRayStream,
};
