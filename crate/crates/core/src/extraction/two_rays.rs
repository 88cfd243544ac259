//! Edge-disjoint 2-rays from strands, connectors between their rays, and the
//! double rays obtained by joining each 2-ray through its connector.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use super::refine::{align_shapes_external, refine_same_shape_internal, select_allowed, GeneratorLevels};
use super::strands::{assemble_strands, check_parity, check_strand_degrees, extract_ray, ParityReport, StrandReport};
use super::window::{Window, NONE};
use crate::connectors::{finite_connector, ConnectorResult};
use crate::error::{Error, Result};
use crate::graph::{EdgeId, LazyGraph, VertexId};
use crate::rays::{Checkpoints, DoubleRayStream, FamilyGenerator, PathRun, TwoRayStream};
use crate::separations::Side;

/// Separators past `p` a connector region on separator `p` may reach into.
pub const CONNECTOR_REACH: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct StrandAudit {
    pub index: usize,
    pub degrees: [StrandReport; 2],
    pub parity: [ParityReport; 2],
}

/// What happened on the way from the families to the 2-rays.
#[derive(Debug, Clone, Serialize)]
pub struct TwoRayTrace {
    pub horizon: usize,
    pub separations: usize,
    pub levels: usize,
    pub kept: Vec<usize>,
    pub aligned: Vec<(usize, usize)>,
    pub links: Vec<String>,
    pub strands: Vec<StrandAudit>,
}

/// The first `want` 2-rays of the strand construction on `win`.
pub fn extract_two_rays_at(win: &Window, gen: &FamilyGenerator, want: usize) -> Result<(Vec<[Vec<VertexId>; 2]>, TwoRayTrace)> {
    let h = win.horizon();
    let refined = refine_same_shape_internal(GeneratorLevels::new(gen, h), win)?;
    let align = align_shapes_external(&refined.table);
    let selected = select_allowed(&refined, &align, win)?;
    if selected.len() < want {
        let got = selected.len();
        return Err(Error::horizon(
            format!("{want} aligned levels"),
            got,
            Some(if got == 0 { 2 * h } else { h * (want + 1) / got + h / 4 }),
        ));
    }
    let strands = assemble_strands(&refined, &selected, win)?;
    let mut rays = Vec::new();
    let mut audits = Vec::new();
    for (s, t) in strands.iter().take(want) {
        rays.push([extract_ray(s)?, extract_ray(t)?]);
        audits.push(StrandAudit {
            index: s.index,
            degrees: [check_strand_degrees(s), check_strand_degrees(t)],
            parity: [check_parity(s), check_parity(t)],
        });
    }
    let trace = TwoRayTrace {
        horizon: h,
        separations: win.len(),
        levels: refined.levels(),
        kept: refined.table.kept().to_vec(),
        aligned: align.pairs.clone(),
        links: selected.iter().map(|l| l.link.to_string()).collect(),
        strands: audits,
    };
    Ok((rays, trace))
}

fn with_dist(win: &Window, path: &[VertexId]) -> Vec<(VertexId, usize)> {
    path.iter().map(|v| (v.clone(), win.ball().dist(v).unwrap())).collect()
}

/// `m` pairwise edge-disjoint 2-rays converging to the thin end `end_id`.
///
/// Prefixes are computed at `horizon` and recomputed at doubling horizons on
/// demand; see [`Checkpoints`].
pub fn two_rays_stream(g: &LazyGraph, end_id: usize, gen: &FamilyGenerator, m: usize, horizon: usize) -> Result<Vec<TwoRayStream>> {
    let (g, gen) = (g.clone(), gen.clone());
    let cp = Checkpoints::start(horizon, move |h| {
        let win = Window::capture(&g, end_id, h)?;
        let (rays, _) = extract_two_rays_at(&win, &gen, m)?;
        Ok(rays.iter().flatten().map(|p| with_dist(&win, p)).collect::<PathRun>())
    })?;
    Ok((0..m).map(|i| TwoRayStream::new(cp.ray(2 * i), cp.ray(2 * i + 1))).collect())
}

/// A 2-ray joined through a connector on one separator.
#[derive(Debug, Clone, Serialize)]
pub struct PlanEntry {
    /// Position of the 2-ray in the input.
    pub two_ray: usize,
    /// Separator whose connector is used.
    pub separator: usize,
    /// Tails of the two rays that survive.
    pub tails: [Vec<VertexId>; 2],
    /// Connector tree of the separator inside its deep side.
    #[serde(skip)]
    pub connector: ConnectorResult,
    /// Path inside the connector from the first tail to the second.
    pub bridge: Vec<VertexId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConnectorPlan {
    pub entries: Vec<PlanEntry>,
    pub discarded: Vec<usize>,
}

fn edge_key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

fn region(win: &Window, p: usize) -> Option<crate::graph::FiniteGraph> {
    let top = p + CONNECTOR_REACH;
    if top >= win.len() {
        return None;
    }
    let g = &win.ball().graph;
    let keep: Vec<bool> = (0..g.vertex_count())
        .map(|v| win.side(p, v) != Side::A && win.level(v) != NONE && win.level(v) as usize <= top)
        .collect();
    Some(g.induced(|x| keep[g.index_of(x).unwrap()]))
}

fn tail_after(path: &[usize], forbidden: &HashSet<(usize, usize)>) -> usize {
    path.windows(2)
        .rposition(|w| forbidden.contains(&edge_key(w[0], w[1])))
        .map_or(0, |i| i + 1)
}

fn bridge_in(tree: &crate::graph::FiniteGraph, from: &HashSet<&VertexId>, to: &HashSet<&VertexId>) -> Option<Vec<VertexId>> {
    let n = tree.vertex_count();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for i in 0..n {
        if from.contains(tree.id(i)) {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(u) = queue.pop_front() {
        if to.contains(tree.id(u)) {
            let mut path = vec![u];
            while prev[*path.last().unwrap()] != usize::MAX {
                path.push(prev[*path.last().unwrap()]);
            }
            path.reverse();
            return Some(path.into_iter().map(|i| tree.id(i).clone()).collect());
        }
        for &w in tree.adj(u) {
            if !seen[w] {
                seen[w] = true;
                prev[w] = u;
                queue.push_back(w);
            }
        }
    }
    None
}

/// Chooses, for up to `want` of the 2-rays in order, a separator and a
/// connector of it inside its deep side, together with tails of the 2-ray,
/// so that the resulting double rays are pairwise edge-disjoint.
///
/// Separators are used in increasing order, each strictly deeper than every
/// vertex of the previous bridges, so bridges are vertex-disjoint. A 2-ray
/// with no usable separator is discarded.
pub fn connectors_for_two_rays(win: &Window, rays: &[[Vec<VertexId>; 2]], want: usize) -> Result<ConnectorPlan> {
    let idx: Vec<[Vec<usize>; 2]> = rays
        .iter()
        .map(|[a, b]| [win.index_path(a), win.index_path(b)])
        .collect();
    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut chosen_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut entries = Vec::new();
    let mut discarded = Vec::new();
    let mut bound = 0usize;
    for (di, [a, b]) in idx.iter().enumerate() {
        if entries.len() == want {
            break;
        }
        let (ta, tb) = (tail_after(a, &used), tail_after(b, &used));
        let (a, b) = (&a[ta..], &b[tb..]);
        if a.is_empty() || b.is_empty() {
            discarded.push(di);
            continue;
        }
        let (sa, sb) = win.lefty_starts(a, b, 0);
        let (a, b) = (&a[sa..], &b[sb..]);
        let start_level = win.level(a[0]) as usize;
        let mut found = None;
        for p in bound.max(start_level)..win.len() {
            let Some(fg) = region(win, p) else {
                break;
            };
            let family: Vec<Vec<EdgeId>> = idx
                .iter()
                .filter(|r| r.iter().flatten().any(|&v| win.level(v) as usize <= p))
                .map(|r| {
                    r.iter()
                        .flat_map(|path| path.windows(2))
                        .filter(|w| fg.contains(win.id(w[0])) && fg.contains(win.id(w[1])))
                        .map(|w| EdgeId::new(win.id(w[0]).clone(), win.id(w[1]).clone()).unwrap())
                        .collect::<Vec<_>>()
                })
                .filter(|m| !m.is_empty())
                .collect();
            let sep: BTreeSet<VertexId> = win.separator(p).iter().cloned().collect();
            let Ok(conn) = finite_connector(&fg, &sep, &family) else {
                continue;
            };
            let from: HashSet<&VertexId> = a.iter().map(|&v| win.id(v)).collect();
            let to: HashSet<&VertexId> = b.iter().map(|&v| win.id(v)).collect();
            let Some(bridge) = bridge_in(&conn.tree, &from, &to) else {
                continue;
            };
            let bi: Vec<usize> = bridge.iter().map(|v| win.ball().graph.index_of(v).unwrap()).collect();
            let own: HashSet<(usize, usize)> = [a, b]
                .iter()
                .flat_map(|r| r.windows(2).map(|w| edge_key(w[0], w[1])))
                .collect();
            if bi
                .windows(2)
                .any(|w| chosen_edges.contains(&edge_key(w[0], w[1])) || own.contains(&edge_key(w[0], w[1])))
            {
                continue;
            }
            found = Some((p, conn, bridge, bi));
            break;
        }
        let Some((p, conn, bridge, bi)) = found else {
            discarded.push(di);
            continue;
        };
        let x = a.iter().position(|&v| v == bi[0]).unwrap();
        let y = b.iter().position(|&v| v == *bi.last().unwrap()).unwrap();
        let (a, b) = (&a[x..], &b[y..]);
        used.extend(bi.windows(2).map(|w| edge_key(w[0], w[1])));
        for r in [a, b] {
            chosen_edges.extend(r.windows(2).map(|w| edge_key(w[0], w[1])));
        }
        bound = bi.iter().map(|&v| win.level(v) as usize + 1).max().unwrap().max(p + 1);
        entries.push(PlanEntry {
            two_ray: di,
            separator: p,
            tails: [win.ids(a), win.ids(b)],
            connector: conn,
            bridge,
        });
    }
    Ok(ConnectorPlan { entries, discarded })
}

/// Double rays `reversed first tail + bridge + second tail` of a plan, as
/// `(left arm, right arm)`; the center edge joins the two arm starts.
pub fn two_rays_to_double_rays(plan: &ConnectorPlan) -> Vec<[Vec<VertexId>; 2]> {
    plan.entries
        .iter()
        .map(|e| {
            let left = e.tails[0].clone();
            let mut right: Vec<VertexId> = e.bridge[1..].to_vec();
            right.extend(e.tails[1][1..].iter().cloned());
            [left, right]
        })
        .collect()
}

/// Trace of a double-ray extraction at one horizon.
#[derive(Debug, Clone, Serialize)]
pub struct DoubleRayTrace {
    pub two_rays: TwoRayTrace,
    pub plan: ConnectorPlan,
}

/// `m` double rays around a thin end, computed at the horizon of `win`.
pub fn double_rays_at(win: &Window, gen: &FamilyGenerator, m: usize) -> Result<(Vec<[Vec<VertexId>; 2]>, DoubleRayTrace)> {
    let spare = 2 * win.k().saturating_sub(1);
    let (rays, trace) = match extract_two_rays_at(win, gen, m + spare) {
        Ok(r) => r,
        Err(e) if e.is_horizon() => extract_two_rays_at(win, gen, m)?,
        Err(e) => return Err(e),
    };
    let plan = connectors_for_two_rays(win, &rays, m)?;
    if plan.entries.len() < m {
        return Err(Error::horizon(
            format!("{m} connectors"),
            plan.entries.len(),
            Some(2 * win.horizon()),
        ));
    }
    let doubles = two_rays_to_double_rays(&plan);
    Ok((doubles, DoubleRayTrace { two_rays: trace, plan }))
}

/// Streams of `m` edge-disjoint double rays around the thin end `end_id`,
/// with the trace of the first horizon.
pub fn double_rays_stream(
    g: &LazyGraph,
    end_id: usize,
    gen: &FamilyGenerator,
    m: usize,
    horizon: usize,
) -> Result<(Vec<DoubleRayStream>, Arc<Checkpoints>, DoubleRayTrace)> {
    let win = Window::capture(g, end_id, horizon)?;
    let (first, trace) = double_rays_at(&win, gen, m)?;
    let first_run: PathRun = first.iter().flatten().map(|p| with_dist(&win, p)).collect();
    let centers: Vec<EdgeId> = first
        .iter()
        .map(|[l, r]| EdgeId::new(l[0].clone(), r[0].clone()).unwrap())
        .collect();
    let (g2, gen2) = (g.clone(), gen.clone());
    let cp = Checkpoints::start(horizon, move |h| {
        if h == horizon {
            return Ok(first_run.clone());
        }
        let win = Window::capture(&g2, end_id, h)?;
        let (d, _) = double_rays_at(&win, &gen2, m)?;
        Ok(d.iter().flatten().map(|p| with_dist(&win, p)).collect())
    })?;
    let streams = centers
        .into_iter()
        .enumerate()
        .map(|(i, c)| DoubleRayStream::new(c, cp.ray(2 * i), cp.ray(2 * i + 1)))
        .collect();
    Ok((streams, cp, trace))
}
