//! Strands: unions of the pieces the i-th selected members contribute between
//! consecutive aligned separators, with their degree and parity checks.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::refine::{Refinement, SelectedLevel};
use super::window::Window;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, FiniteGraph, VertexId};
use crate::separations::Side;
use crate::shapes::{Letter, ShapeWord};

/// A separator crossed by a strand together with the shape induced on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Crossing {
    pub separator: Vec<VertexId>,
    pub shape: ShapeWord,
}

/// Union over aligned levels `t >= index` of the piece of the `index`-th
/// member of level `t` between the level's two separators.
#[derive(Debug, Clone)]
pub struct Strand {
    pub index: usize,
    pub coordinate: usize,
    /// `crossings[0]` is the start separator, the last one the frontier.
    pub crossings: Vec<Crossing>,
    /// `pieces[s]` lies between `crossings[s]` and `crossings[s + 1]`.
    pub pieces: Vec<Vec<EdgeId>>,
    graph: FiniteGraph,
}

impl Strand {
    pub fn from_parts(index: usize, coordinate: usize, crossings: Vec<Crossing>, pieces: Vec<Vec<EdgeId>>) -> Result<Strand> {
        if crossings.len() != pieces.len() + 1 {
            return Err(Error::Input(format!(
                "{} pieces need {} crossings, got {}",
                pieces.len(),
                pieces.len() + 1,
                crossings.len()
            )));
        }
        let graph = FiniteGraph::from_edges(pieces.iter().flatten().cloned());
        Ok(Strand {
            index,
            coordinate,
            crossings,
            pieces,
            graph,
        })
    }

    pub fn graph(&self) -> &FiniteGraph {
        &self.graph
    }

    pub fn start(&self) -> &Crossing {
        &self.crossings[0]
    }

    pub fn frontier(&self) -> &Crossing {
        self.crossings.last().unwrap()
    }
}

/// Builds the strand pairs `(first rays, second rays)` for `i = 1..=L`, where
/// `L` is the number of selected levels.
pub fn assemble_strands(refined: &Refinement, selected: &[SelectedLevel], win: &Window) -> Result<Vec<(Strand, Strand)>> {
    let levels = selected.len();
    let shape_at = |family: usize, sep: usize| -> Result<_> {
        refined
            .table
            .get(family, sep, win)
            .ok_or_else(|| Error::Input(format!("no common shape of level {family} on separator {sep}")))
    };
    let mut crossings: Vec<[Crossing; 2]> = Vec::new();
    for (t, lvl) in selected.iter().enumerate() {
        let s = shape_at(lvl.family, lvl.seps.0)?;
        let sep = win.separator(lvl.seps.0).to_vec();
        crossings.push([
            Crossing { separator: sep.clone(), shape: s.0 },
            Crossing { separator: sep, shape: s.1 },
        ]);
        if t + 1 == levels {
            let s = shape_at(lvl.family, lvl.seps.1)?;
            let sep = win.separator(lvl.seps.1).to_vec();
            crossings.push([
                Crossing { separator: sep.clone(), shape: s.0 },
                Crossing { separator: sep, shape: s.1 },
            ]);
        }
    }
    let piece = |lvl: &SelectedLevel, i: usize, side: usize| -> Vec<EdgeId> {
        let ray = lvl.members[i].ray(side);
        let (lo, hi) = lvl.seps;
        ray.windows(2)
            .filter(|w| win.edge_side(hi, w[0], w[1]) == Side::A && win.edge_side(lo, w[0], w[1]) == Side::B)
            .map(|w| EdgeId::new(win.id(w[0]).clone(), win.id(w[1]).clone()).unwrap())
            .collect()
    };
    let mut out = Vec::new();
    for i in 1..=levels {
        let pair: Vec<Strand> = (0..2)
            .map(|side| {
                let pieces = selected[i - 1..].iter().map(|lvl| piece(lvl, i - 1, side)).collect();
                let cr = crossings[i - 1..].iter().map(|c| c[side].clone()).collect();
                Strand::from_parts(i, side, cr, pieces)
            })
            .collect::<Result<_>>()?;
        let mut it = pair.into_iter();
        out.push((it.next().unwrap(), it.next().unwrap()));
    }
    Ok(out)
}

/// Letters around `v` in the framed word `l:w:r`, if `v` occurs in `w`.
fn framing(w: &ShapeWord, v: &VertexId) -> Option<(Letter, Letter)> {
    let p = w.position(v)?;
    let f = w.framed();
    Some((f[p].0, f[p].2))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrandReport {
    pub max_degree: usize,
    pub degree_one_start: Vec<VertexId>,
    pub degree_one_frontier: Vec<VertexId>,
    pub violations: Vec<String>,
}

impl StrandReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the degree pattern predicted by the shapes: degree at most two,
/// degree two away from separators, and at each separator the split between
/// the pieces on either side given by the framed shape.
pub fn check_strand_degrees(s: &Strand) -> StrandReport {
    let mut per_piece: Vec<BTreeMap<&VertexId, usize>> = Vec::new();
    let mut total: BTreeMap<&VertexId, usize> = BTreeMap::new();
    for p in &s.pieces {
        let mut d = BTreeMap::new();
        for e in p {
            let (u, v) = e.endpoints();
            for x in [u, v] {
                *d.entry(x).or_insert(0) += 1;
                *total.entry(x).or_insert(0) += 1;
            }
        }
        per_piece.push(d);
    }
    let mut violations = Vec::new();
    let mut on_sep: BTreeMap<&VertexId, usize> = BTreeMap::new();
    for (c, cr) in s.crossings.iter().enumerate() {
        for v in &cr.separator {
            on_sep.insert(v, c);
        }
    }
    let last = s.crossings.len() - 1;
    for (v, &d) in &total {
        if d > 2 {
            violations.push(format!("{v} has degree {d}"));
        }
        if !on_sep.contains_key(v) && d != 2 {
            violations.push(format!("{v} lies off the separators with degree {d}"));
        }
    }
    for (c, cr) in s.crossings.iter().enumerate() {
        for v in &cr.separator {
            let got = |p: Option<usize>| p.and_then(|p| per_piece[p].get(v).copied()).unwrap_or(0);
            let before = got(c.checked_sub(1));
            let after = if c < last { got(Some(c)) } else { 0 };
            let (l, r) = match framing(&cr.shape, v) {
                Some((x, y)) => {
                    let count = |z| [x, y].iter().filter(|&&q| q == z).count();
                    (count(Letter::L), count(Letter::R))
                }
                None => (0, 0),
            };
            let want_before = if c == 0 { 0 } else { l };
            let want_after = if c == last { 0 } else { r };
            if (before, after) != (want_before, want_after) {
                violations.push(format!(
                    "{v} on crossing {c}: degrees ({before}, {after}) against ({want_before}, {want_after}) from {}",
                    cr.shape
                ));
            }
        }
    }
    let ones = |c: usize| -> Vec<VertexId> {
        s.crossings[c]
            .separator
            .iter()
            .filter(|v| total.get(v) == Some(&1))
            .cloned()
            .collect()
    };
    StrandReport {
        max_degree: total.values().copied().max().unwrap_or(0),
        degree_one_start: ones(0),
        degree_one_frontier: ones(last),
        violations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub degree_one: usize,
    pub lvr: usize,
    pub rvl: usize,
    pub holds: bool,
}

/// Degree-one vertices on the start separator against the `lvr` and `rvl`
/// occurrences of the framed start shape.
pub fn check_parity(s: &Strand) -> ParityReport {
    let report = check_strand_degrees(s);
    let framed = s.start().shape.framed();
    let lvr = framed.iter().filter(|(a, _, b)| *a == Letter::L && *b == Letter::R).count();
    let rvl = framed.iter().filter(|(a, _, b)| *a == Letter::R && *b == Letter::L).count();
    let degree_one = report.degree_one_start.len();
    ParityReport {
        degree_one,
        lvr,
        rvl,
        holds: degree_one == lvr + rvl && degree_one % 2 == 1 && lvr == rvl + 1,
    }
}

/// Walks the strand from its least degree-one start vertex whose component
/// reaches the frontier.
pub fn extract_ray(s: &Strand) -> Result<Vec<VertexId>> {
    let g = s.graph();
    let frontier: BTreeSet<&VertexId> = s.frontier().separator.iter().collect();
    let report = check_strand_degrees(s);
    if report.max_degree > 2 {
        return Err(Error::NotARay(format!("strand {} has a vertex of degree {}", s.index, report.max_degree)));
    }
    for seed in &report.degree_one_start {
        let mut walk = vec![g.index_of(seed).unwrap()];
        let mut prev = usize::MAX;
        while let Some(&next) = g.adj(*walk.last().unwrap()).iter().find(|&&w| w != prev) {
            prev = *walk.last().unwrap();
            walk.push(next);
        }
        let end = g.id(*walk.last().unwrap());
        if walk.len() > 1 && frontier.contains(end) {
            return Ok(walk.into_iter().map(|i| g.id(i).clone()).collect());
        }
    }
    if report.degree_one_start.is_empty() {
        return Err(Error::NotARay(format!("strand {} has no degree-one start vertex", s.index)));
    }
    Err(Error::horizon(
        format!("strand {} component reaching the frontier", s.index),
        0,
        None,
    ))
}
