//! Case analysis over the ends of the graph and the top-level extraction.

mod one_ended;
pub mod suite;
mod tree;
mod two_ended;

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Ball, EdgeId, LazyGraph, VertexId};
use crate::rays::{pairwise_edge_disjoint, Checkpoints, DoubleRayExport, DoubleRayStream, FamilyGenerator};

pub use one_ended::{one_ended_double_rays, OneEndedTrace};
pub use tree::{bfs_spanning_tree, tree_double_rays, PeelStep, TreeTrace};
pub use two_ended::{end_separator, two_ended_double_rays, TwoEndedTrace};

/// Largest truncation built for the end audit.
pub const AUDIT_BALL_LIMIT: usize = 250_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum CaseTag {
    InfinitelyManyEnds,
    ThickEnd { end: usize },
    TwoThinEnds { ends: [usize; 2] },
    OneThinEnd { end: usize },
}

/// Unbounded components of truncations with inner balls removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EndAudit {
    pub radius: usize,
    /// `(r, number of components of the truncation minus the r-ball that reach its boundary)`
    pub counts: Vec<(usize, usize)>,
    /// `true` when the audit ball contains a cycle.
    pub cyclic: bool,
}

/// The largest truncation of radius at most `horizon` whose size, predicted
/// from the growth between successive doublings, stays within the limit.
pub fn audit_ball(g: &LazyGraph, horizon: usize) -> Result<Arc<Ball>> {
    let mut r = horizon.clamp(1, 8);
    let mut ball = g.ball(r)?;
    let mut prev = 1usize;
    while r < horizon {
        let size = ball.graph.vertex_count();
        let growth = size.div_ceil(prev.max(1)).max(1);
        if size.saturating_mul(growth) > AUDIT_BALL_LIMIT {
            break;
        }
        prev = size;
        r = (2 * r).min(horizon);
        ball = g.ball(r)?;
    }
    Ok(ball)
}

/// Components of the ball minus the vertices at distance `<= r` that reach
/// the ball's boundary, as lists of vertex indices.
pub fn unbounded_components(ball: &Ball, r: usize) -> Vec<Vec<usize>> {
    let fg = &ball.graph;
    let h = ball.radius();
    let n = fg.vertex_count();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if ball.dist_idx(s) <= r || comp[s] != usize::MAX {
            continue;
        }
        comp[s] = out.len();
        let mut members = vec![s];
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &y in fg.adj(x) {
                if ball.dist_idx(y) > r && comp[y] == usize::MAX {
                    comp[y] = out.len();
                    members.push(y);
                    stack.push(y);
                }
            }
        }
        if members.iter().any(|&x| ball.dist_idx(x) == h) {
            members.sort_unstable();
            out.push(members);
        } else {
            for x in members {
                comp[x] = usize::MAX - 1;
            }
        }
    }
    out
}

/// Case tag from the declared ends, cross-checked against the unbounded
/// component counts at radii a quarter and a half of the audit radius.
/// Bounded pieces reaching the boundary may inflate the counts, so only a
/// shortfall against the declared ends is an inconsistency.
pub fn classify(g: &LazyGraph, horizon: usize) -> Result<(CaseTag, EndAudit)> {
    let ball = audit_ball(g, horizon)?;
    let h = ball.radius();
    let radii: Vec<usize> = [h / 4, h / 2].into_iter().map(|r| r.max(1)).collect();
    let counts: Vec<(usize, usize)> = radii.iter().map(|&r| (r, unbounded_components(&ball, r).len())).collect();
    let cyclic = ball.graph.edge_count() >= ball.graph.vertex_count();
    let audit = EndAudit { radius: h, counts: counts.clone(), cyclic };
    if g.infinitely_many_ends() {
        if counts[1].1 <= counts[0].1 {
            return Err(Error::Metadata(format!(
                "infinitely many ends declared, but unbounded components do not grow: {counts:?}"
            )));
        }
        return Ok((CaseTag::InfinitelyManyEnds, audit));
    }
    let ends = g.ends();
    if ends.is_empty() {
        return Err(Error::Metadata(format!("{} declares no ends", g.name())));
    }
    if counts.iter().any(|&(_, c)| c < ends.len()) {
        return Err(Error::Metadata(format!(
            "{} ends declared, but the truncations show only {counts:?} unbounded components",
            ends.len()
        )));
    }
    if let Some(e) = ends.iter().find(|e| e.vertex_degree.finite().is_none()) {
        return Ok((CaseTag::ThickEnd { end: e.end_id }, audit));
    }
    let tag = match ends {
        [one] => CaseTag::OneThinEnd { end: one.end_id },
        [a, b, ..] => CaseTag::TwoThinEnds { ends: [a.end_id, b.end_id] },
        [] => unreachable!(),
    };
    Ok((tag, audit))
}

/// Sanity data on the families the run is restricted to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyAudit {
    pub generator: String,
    pub members: usize,
    /// Members whose prefixes are paths of the graph.
    pub valid: usize,
    pub edge_disjoint: bool,
    pub union_vertices: usize,
    pub union_edges: usize,
    /// Family members per pair of ends their arms reach.
    pub end_pairs: Vec<([usize; 2], usize)>,
}

/// Audits the family of size `m` and counts which ends each member joins.
pub fn audit_family(g: &LazyGraph, gen: &FamilyGenerator, m: usize, horizon: usize) -> Result<FamilyAudit> {
    let ball = audit_ball(g, horizon)?;
    let h = ball.radius();
    let comps = unbounded_components(&ball, (h / 2).max(1));
    let mut comp_of = vec![usize::MAX; ball.graph.vertex_count()];
    for (c, vs) in comps.iter().enumerate() {
        for &v in vs {
            comp_of[v] = c;
        }
    }
    let comp = |v: &VertexId| ball.graph.index_of(v).map(|i| comp_of[i]).filter(|&c| c != usize::MAX);
    let mut end_of_comp: BTreeMap<usize, usize> = BTreeMap::new();
    for e in g.ends() {
        for r in &e.witness_rays {
            if let Some(c) = ball.clip(&r.at(h)).last().and_then(&comp) {
                end_of_comp.entry(c).or_insert(e.end_id);
            }
        }
    }
    let members = gen.produce(m);
    let mut valid = 0;
    let mut vertices: HashSet<VertexId> = HashSet::new();
    let mut edges: HashSet<EdgeId> = HashSet::new();
    let mut pairs: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    for d in &members {
        let path = d.at(h).vertices();
        let mut ok = true;
        for w in path.windows(2) {
            if !g.neighbors(&w[0])?.contains(&w[1]) {
                ok = false;
            }
        }
        valid += ok as usize;
        vertices.extend(path.iter().cloned());
        edges.extend(d.at(h).edges());
        let clipped = ball.clip(&path);
        let far = |p: &[VertexId]| p.last().and_then(&comp).and_then(|c| end_of_comp.get(&c).copied());
        let mut rev = path.clone();
        rev.reverse();
        let rev_clipped = ball.clip(&rev).to_vec();
        if let (Some(a), Some(b)) = (far(clipped), far(&rev_clipped)) {
            *pairs.entry([a.min(b), a.max(b)]).or_default() += 1;
        }
    }
    Ok(FamilyAudit {
        generator: gen.name().to_string(),
        members: members.len(),
        valid,
        edge_disjoint: pairwise_edge_disjoint(members.iter().map(|d| d.at(h).edges())),
        union_vertices: vertices.len(),
        union_edges: edges.len(),
        end_pairs: pairs.into_iter().collect(),
    })
}

/// Global checks on extracted double rays at one horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RayAudit {
    pub horizon: usize,
    pub edge_disjoint: bool,
    pub simple: bool,
    /// Vertex counts of the `[left, right]` arms.
    pub arm_lengths: Vec<[usize; 2]>,
}

pub fn audit_rays(rays: &[DoubleRayStream], horizon: usize) -> RayAudit {
    let prefixes: Vec<_> = rays.iter().map(|d| d.at(horizon)).collect();
    RayAudit {
        horizon,
        edge_disjoint: pairwise_edge_disjoint(prefixes.iter().map(|p| p.edges())),
        simple: prefixes.iter().all(|p| p.is_simple()),
        arm_lengths: prefixes.iter().map(|p| [p.left.len(), p.right.len()]).collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaseTrace {
    Empty,
    Tree(TreeTrace),
    TwoEnded(Box<TwoEndedTrace>),
    OneEnded(Box<OneEndedTrace>),
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub ends: EndAudit,
    pub family: Option<FamilyAudit>,
    pub rays: RayAudit,
    /// Checkpoint paths that could not be extended verbatim.
    pub stalls: usize,
}

#[derive(Clone)]
pub struct ExtractionResult {
    pub case: CaseTag,
    pub double_rays: Vec<DoubleRayStream>,
    pub horizon_used: usize,
    pub audit: AuditReport,
    pub trace: CaseTrace,
    checkpoints: Option<Arc<Checkpoints>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionExport {
    pub status: &'static str,
    #[serde(flatten)]
    pub case: CaseTag,
    pub horizon: usize,
    pub requested: usize,
    pub achieved: usize,
    pub double_rays: Vec<DoubleRayExport>,
    pub audit: AuditReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<CaseTrace>,
}

impl std::fmt::Debug for ExtractionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtractionResult")
            .field("case", &self.case)
            .field("double_rays", &self.double_rays.len())
            .field("horizon_used", &self.horizon_used)
            .field("audit", &self.audit)
            .finish()
    }
}

impl ExtractionResult {
    /// Re-audits the rays at `horizon`, refreshing the stall count.
    pub fn audit_at(&self, horizon: usize) -> RayAudit {
        audit_rays(&self.double_rays, horizon)
    }

    pub fn stalls(&self) -> usize {
        self.checkpoints.as_ref().map_or(0, |c| c.stalls())
    }

    pub fn export(&self, with_trace: bool) -> ExtractionExport {
        let mut audit = self.audit.clone();
        audit.stalls = self.stalls();
        ExtractionExport {
            status: "ok",
            case: self.case,
            horizon: self.horizon_used,
            requested: self.double_rays.len(),
            achieved: self.double_rays.len(),
            double_rays: self.double_rays.iter().map(|d| d.export(self.horizon_used)).collect(),
            audit,
            trace: with_trace.then(|| self.trace.clone()),
        }
    }
}

fn finish(
    case: CaseTag,
    rays: Vec<DoubleRayStream>,
    cp: Option<Arc<Checkpoints>>,
    horizon: usize,
    ends: EndAudit,
    family: Option<FamilyAudit>,
    trace: CaseTrace,
) -> Result<ExtractionResult> {
    let audit = audit_rays(&rays, horizon);
    if !audit.edge_disjoint || !audit.simple {
        return Err(Error::NotADoubleRay(format!(
            "extracted rays fail the audit at horizon {horizon}: edge-disjoint {}, simple {}",
            audit.edge_disjoint, audit.simple
        )));
    }
    Ok(ExtractionResult {
        case,
        double_rays: rays,
        horizon_used: horizon,
        audit: AuditReport {
            ends,
            family,
            rays: audit,
            stalls: cp.as_ref().map_or(0, |c| c.stalls()),
        },
        trace,
        checkpoints: cp,
    })
}

/// `m` pairwise edge-disjoint double rays: classifies the ends, picks the
/// pair of ends most family members join, and runs the matching case.
pub fn run_theorem1(g: &LazyGraph, gen: Option<&FamilyGenerator>, m: usize, horizon: usize) -> Result<ExtractionResult> {
    if horizon == 0 {
        return Err(Error::Input("horizon must be at least 1".into()));
    }
    let (tag, ends) = classify(g, horizon)?;
    if let CaseTag::ThickEnd { end } = tag {
        return Err(Error::Unsupported(format!(
            "end {end} is thick; graphs with a half-grid minor are out of scope"
        )));
    }
    if m == 0 {
        return finish(tag, Vec::new(), None, horizon, ends, None, CaseTrace::Empty);
    }
    if tag == CaseTag::InfinitelyManyEnds {
        let spanning = ends.cyclic.then_some(ends.radius);
        let (rays, cp, trace) = tree_double_rays(g, m, horizon, spanning)?;
        let h = trace.depth;
        return finish(tag, rays, Some(cp), h, ends, None, CaseTrace::Tree(trace));
    }
    let gen = gen.ok_or_else(|| Error::Input(format!("{} needs a family generator", g.name())))?;
    let family = audit_family(g, gen, m, horizon)?;
    let pair = family
        .end_pairs
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .map(|p| p.0)
        .ok_or_else(|| Error::horizon("family members whose arms reach declared ends", 0, Some(2 * horizon)))?;
    if pair[0] == pair[1] {
        let case = CaseTag::OneThinEnd { end: pair[0] };
        let (rays, cp, trace) = one_ended_double_rays(g, pair[0], gen, m, horizon)?;
        finish(case, rays, Some(cp), horizon, ends, Some(family), CaseTrace::OneEnded(Box::new(trace)))
    } else {
        let case = CaseTag::TwoThinEnds { ends: pair };
        let (rays, cp, trace) = two_ended_double_rays(g, pair, gen, m, horizon)?;
        finish(case, rays, Some(cp), horizon, ends, Some(family), CaseTrace::TwoEnded(Box::new(trace)))
    }
}
