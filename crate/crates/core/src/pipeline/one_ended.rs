//! One thin end: 2-rays from the family, their hull, the capture of the end
//! and the extraction, joined into double rays by connectors.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::extraction::{double_rays_stream, DoubleRayTrace};
use crate::graph::LazyGraph;
use crate::rays::{locally_finite_hull, to_two_ray, Checkpoints, DoubleRayStream, FamilyGenerator, HullAudit};

#[derive(Debug, Clone, Serialize)]
pub struct OneEndedTrace {
    pub end: usize,
    /// Hull of the arms of the family of size `m`.
    pub hull: HullAudit,
    pub extraction: DoubleRayTrace,
}

/// `m` edge-disjoint double rays all of whose tails converge to the thin end `end`.
pub fn one_ended_double_rays(
    g: &LazyGraph,
    end: usize,
    gen: &FamilyGenerator,
    m: usize,
    horizon: usize,
) -> Result<(Vec<DoubleRayStream>, Arc<Checkpoints>, OneEndedTrace)> {
    let arms: Vec<_> = gen
        .produce(m)
        .iter()
        .map(|d| to_two_ray(d, horizon).map(|t| [t.first, t.second]))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let hull = locally_finite_hull(g, &arms, horizon)?.audit();
    let (streams, cp, extraction) = double_rays_stream(g, end, gen, m, horizon)?;
    Ok((streams, cp, OneEndedTrace { end, hull, extraction }))
}
