//! Same-shape refinement of leveled 2-ray families, external alignment of the
//! resulting shape table, and pigeonhole selection of common 2-links.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use serde::Serialize;

use super::window::{Key, Window};
use crate::error::{Error, Result};
use crate::rays::{to_two_ray, FamilyGenerator, TwoRayStream};
use crate::shapes::{c1, c2, is_allowed_link, TwoLink, TwoShape};

/// A 2-ray seen inside a window, before any level-specific tailing.
#[derive(Debug)]
pub(crate) struct Base {
    stream: TwoRayStream,
    rays: [Vec<usize>; 2],
    /// Lefty start offsets.
    starts: [usize; 2],
    /// Both prefixes reach beyond every separation.
    visible: bool,
    /// Per ray: separator, positions on it, and the interned shape from the lefty start.
    hits: [Vec<(u32, Vec<usize>, u32)>; 2],
}

/// A 2-ray of a family: a base and the offsets of its tails.
#[derive(Debug, Clone)]
pub(crate) struct Member {
    /// Position in the family it was drawn from.
    pub src: usize,
    base: Arc<Base>,
    starts: [usize; 2],
}

impl Member {
    pub fn visible(&self) -> bool {
        self.base.visible
    }

    pub fn ray(&self, side: usize) -> &[usize] {
        &self.base.rays[side][self.starts[side]..]
    }

    fn retail(&self, floor: u32, win: &Window) -> Member {
        let mut m = self.clone();
        if m.visible() && floor > 0 {
            let (sa, sb) = win.lefty_starts(m.ray(0), m.ray(1), floor);
            m.starts = [m.starts[0] + sa, m.starts[1] + sb];
        }
        m
    }

    /// Interned shape of one ray of the tail on every separator it meets.
    fn shape_ids(&self, side: usize, win: &Window, it: &mut Interner) -> Vec<(u32, u32)> {
        let (full, start) = (&self.base.rays[side], self.starts[side]);
        let mut out = Vec::new();
        for (sep, pos, id) in &self.base.hits[side] {
            if pos[0] >= start {
                out.push((*sep, *id));
            } else if *pos.last().unwrap() >= start {
                let rest: Vec<usize> = pos.iter().filter(|&&p| p >= start).map(|&p| p - start).collect();
                let key = win.shape_key(&full[start..], *sep, &rest);
                out.push((*sep, it.ray(key)));
            }
        }
        out
    }

    /// The tail actually used, as a stream.
    pub fn tail_stream(&self, win: &Window) -> TwoRayStream {
        let stream = &self.base.stream;
        let tail = |r: &crate::rays::RayStream, side: usize| {
            if self.starts[side] == 0 {
                r.clone()
            } else {
                r.tail_from(win.id(self.ray(side)[0]).clone())
            }
        };
        TwoRayStream::new(tail(&stream.first, 0), tail(&stream.second, 1))
    }
}

fn make_base(stream: TwoRayStream, win: &Window, it: &mut Interner) -> Base {
    let h = win.horizon();
    let rays = [win.index_path(&stream.first.at(h)), win.index_path(&stream.second.at(h))];
    let visible = win.clears(&rays[0]) && win.clears(&rays[1]);
    let mut starts = [0, 0];
    let mut hits: [Vec<(u32, Vec<usize>, u32)>; 2] = [Vec::new(), Vec::new()];
    if visible {
        let (sa, sb) = win.lefty_starts(&rays[0], &rays[1], 0);
        starts = [sa, sb];
        for side in 0..2 {
            let tail = &rays[side][starts[side]..];
            for (sep, pos) in win.hits(tail) {
                let key = win.shape_key(tail, sep, &pos);
                let id = it.ray(key);
                hits[side].push((sep, pos.iter().map(|p| p + starts[side]).collect(), id));
            }
        }
    }
    Base {
        stream,
        rays,
        starts,
        visible,
        hits,
    }
}

/// Interned shapes; ray shape 0 and 2-shape 0 are empty.
#[derive(Debug, Clone)]
pub(crate) struct Interner {
    ray_ids: HashMap<Key, u32>,
    rays: Vec<Key>,
    pair_ids: HashMap<(u32, u32), u32>,
    pairs: Vec<(u32, u32)>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            ray_ids: HashMap::from([(Key::default(), 0)]),
            rays: vec![Key::default()],
            pair_ids: HashMap::from([((0, 0), 0)]),
            pairs: vec![(0, 0)],
        }
    }

    fn ray(&mut self, k: Key) -> u32 {
        if let Some(&id) = self.ray_ids.get(&k) {
            return id;
        }
        let id = self.rays.len() as u32;
        self.rays.push(k.clone());
        self.ray_ids.insert(k, id);
        id
    }

    fn pair(&mut self, a: u32, b: u32) -> u32 {
        let next = self.pairs.len() as u32;
        let id = *self.pair_ids.entry((a, b)).or_insert(next);
        if id == next {
            self.pairs.push((a, b));
        }
        id
    }

    pub fn key(&self, id: u32) -> (&[u32], &[u32]) {
        let (a, b) = self.pairs[id as usize];
        (&self.rays[a as usize], &self.rays[b as usize])
    }

    pub fn is_full(&self, id: u32) -> bool {
        let (a, b) = self.pairs[id as usize];
        a != 0 && b != 0
    }
}

/// Common 2-shapes of the refined families on the kept separators.
#[derive(Debug, Clone)]
pub struct ShapeTable {
    kept: Vec<usize>,
    rows: Vec<Vec<u32>>,
    interner: Interner,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShapeTableExport {
    pub kept: Vec<usize>,
    /// `rows[n - 1][t]` is the 2-shape of level `n` on separator `kept[t]`.
    pub rows: Vec<Vec<String>>,
}

impl ShapeTable {
    /// Separator indices on which every level has a common 2-shape.
    pub fn kept(&self) -> &[usize] {
        &self.kept
    }

    pub fn levels(&self) -> usize {
        self.rows.len()
    }

    pub(crate) fn id(&self, level: usize, sep: usize) -> Option<u32> {
        let t = self.kept.binary_search(&sep).ok()?;
        self.rows.get(level.checked_sub(1)?).map(|r| r[t])
    }

    pub(crate) fn interner(&self) -> &Interner {
        &self.interner
    }

    /// Common 2-shape of level `level` (from 1) on separator `sep`.
    pub fn get(&self, level: usize, sep: usize, win: &Window) -> Option<TwoShape> {
        self.id(level, sep).map(|id| win.two_shape(self.interner.key(id)))
    }

    pub fn export(&self, win: &Window) -> ShapeTableExport {
        ShapeTableExport {
            kept: self.kept.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|&id| win.two_shape(self.interner.key(id)).to_string())
                        .collect()
                })
                .collect(),
        }
    }
}

/// Refined families `D'_n` (each of size `c2 * n`) with their shape table.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub(crate) families: Vec<Vec<Member>>,
    pub table: ShapeTable,
}

impl Refinement {
    pub fn levels(&self) -> usize {
        self.families.len()
    }

    /// The refined family of level `level` (from 1), as tails of the inputs.
    pub fn family(&self, level: usize, win: &Window) -> Vec<TwoRayStream> {
        self.families[level - 1].iter().map(|m| m.tail_stream(win)).collect()
    }

    /// Positions in the input family of the refined members of `level`.
    pub fn sources(&self, level: usize) -> Vec<usize> {
        self.families[level - 1].iter().map(|m| m.src).collect()
    }
}

/// Source of the leveled input families.
pub trait LevelSource {
    /// The family of level `n` (from 1), or `None` once exhausted.
    fn level(&mut self, n: usize, size: usize) -> Result<Option<Vec<TwoRayStream>>>;
}

impl LevelSource for &[Vec<TwoRayStream>] {
    fn level(&mut self, n: usize, _size: usize) -> Result<Option<Vec<TwoRayStream>>> {
        Ok(self.get(n - 1).cloned())
    }
}

/// Levels drawn from a double-ray generator, split at the center edges.
pub struct GeneratorLevels<'a> {
    gen: &'a FamilyGenerator,
    horizon: usize,
    checked: HashMap<(usize, usize), TwoRayStream>,
}

impl<'a> GeneratorLevels<'a> {
    pub fn new(gen: &'a FamilyGenerator, horizon: usize) -> Self {
        GeneratorLevels {
            gen,
            horizon,
            checked: HashMap::new(),
        }
    }
}

impl LevelSource for GeneratorLevels<'_> {
    fn level(&mut self, _n: usize, size: usize) -> Result<Option<Vec<TwoRayStream>>> {
        let fam = self.gen.produce(size);
        if fam.len() < size {
            return Ok(None);
        }
        let mut out = Vec::with_capacity(size);
        for d in &fam {
            let id = (d.left().identity(), d.right().identity());
            let t = match self.checked.get(&id) {
                Some(t) => t.clone(),
                None => {
                    let t = to_two_ray(d, self.horizon)?;
                    self.checked.insert(id, t.clone());
                    t
                }
            };
            out.push(t);
        }
        Ok(Some(out))
    }
}

fn pick_class(counts: &HashMap<u32, usize>, need: usize, interner: &Interner) -> Option<u32> {
    counts
        .iter()
        .filter(|(_, &c)| c >= need)
        .map(|(&id, &c)| (id, c))
        .min_by(|a, b| {
            interner
                .is_full(b.0)
                .cmp(&interner.is_full(a.0))
                .then(b.1.cmp(&a.1))
                .then_with(|| interner.key(a.0).cmp(&interner.key(b.0)))
        })
        .map(|(id, _)| id)
}

/// Refines the leveled families so that each level induces one 2-shape on
/// every kept separator.
///
/// Level `n` must have at least `c1 * c2 * n` members. Levels are consumed
/// while the kept set still has an element past its stable prefix. The
/// returned table keeps only the stable prefix of the final kept set.
pub fn refine_same_shape_internal<S: LevelSource>(mut source: S, win: &Window) -> Result<Refinement> {
    let k = win.k();
    let per = c2(k)? as usize;
    let size_of = |n: usize| c1(k) as usize * per * n;
    let mut interner = Interner::new();
    let mut kept: Vec<usize> = (0..win.len()).collect();
    let mut families: Vec<Vec<Member>> = Vec::new();
    let mut rows: Vec<HashMap<usize, u32>> = Vec::new();
    let mut bases: HashMap<(usize, usize), Arc<Base>> = HashMap::new();
    for n in 1.. {
        if kept.len() < n {
            break;
        }
        let Some(input) = source.level(n, size_of(n))? else {
            break;
        };
        if input.len() < size_of(n) {
            return Err(Error::Input(format!(
                "level {n} has {} 2-rays, at least {} are needed",
                input.len(),
                size_of(n)
            )));
        }
        let floor = if n >= 2 { kept[n - 2] as u32 + 1 } else { 0 };
        let mut members: Vec<Member> = Vec::with_capacity(input.len());
        for (i, t) in input.into_iter().enumerate() {
            let id = (t.first.identity(), t.second.identity());
            let base = match bases.get(&id) {
                Some(b) => b.clone(),
                None => {
                    let b = Arc::new(make_base(t, win, &mut interner));
                    bases.insert(id, b.clone());
                    b
                }
            };
            let starts = base.starts;
            members.push(Member { src: i, base, starts }.retail(floor, win));
        }
        if !members.iter().any(|m| m.visible()) {
            break;
        }
        let mut dense: HashMap<usize, Vec<u32>> = HashMap::new();
        for (i, m) in members.iter().enumerate().filter(|(_, m)| m.visible()) {
            let mut row = vec![(0u32, 0u32); win.len()];
            for side in 0..2 {
                for (sep, id) in m.shape_ids(side, win, &mut interner) {
                    if side == 0 {
                        row[sep as usize].0 = id;
                    } else {
                        row[sep as usize].1 = id;
                    }
                }
            }
            dense.insert(i, row.into_iter().map(|(a, b)| interner.pair(a, b)).collect());
        }
        let id_at = |i: usize, sep: usize| dense.get(&i).map_or(0, |r| r[sep]);
        let need = per * n;
        let invisible = members.iter().filter(|m| !m.visible()).count();
        let mut chosen: Vec<(usize, Vec<u32>)> = Vec::new();
        for &sep in &kept[n - 1..] {
            let mut counts: HashMap<u32, usize> = HashMap::new();
            for &i in dense.keys() {
                *counts.entry(id_at(i, sep)).or_default() += 1;
            }
            *counts.entry(0).or_default() += invisible;
            let Some(class) = pick_class(&counts, need, &interner) else {
                return Err(Error::Input(format!(
                    "level {n}, separator {sep}: no 2-shape is shared by {need} members; \
                     the separator has more than {} 2-shapes",
                    c1(k)
                )));
            };
            let pick: Vec<u32> = (0..members.len())
                .filter(|&i| id_at(i, sep) == class)
                .take(need)
                .map(|i| i as u32)
                .collect();
            chosen.push((sep, pick));
        }
        if chosen.is_empty() {
            break;
        }
        let mut freq: HashMap<&[u32], (usize, usize)> = HashMap::new();
        for (pos, (_, pick)) in chosen.iter().enumerate() {
            freq.entry(pick).or_insert((0, pos)).0 += 1;
        }
        let mode: Vec<u32> = freq
            .iter()
            .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
            .map(|(p, _)| p.to_vec())
            .unwrap();
        let mut next: Vec<usize> = kept[..n - 1].to_vec();
        next.extend(chosen.iter().filter(|(_, p)| *p == mode).map(|(s, _)| *s));
        let family: Vec<Member> = mode.iter().map(|&i| members[i as usize].clone()).collect();
        let mut row = HashMap::new();
        for &sep in &next {
            let ids: Vec<u32> = mode.iter().map(|&i| id_at(i as usize, sep)).collect();
            if ids.iter().any(|&x| x != ids[0]) {
                return Err(Error::Input(format!(
                    "level {n}: refined members disagree on separator {sep}"
                )));
            }
            row.insert(sep, ids[0]);
        }
        kept = next;
        families.push(family);
        rows.push(row);
    }
    let levels = families.len();
    if levels == 0 {
        return Err(Error::horizon("a refined family level", 0, Some(2 * win.horizon())));
    }
    kept.truncate(levels - 1);
    let rows = rows.iter().map(|r| kept.iter().map(|s| r[s]).collect()).collect();
    Ok(Refinement {
        families,
        table: ShapeTable { kept, rows, interner },
    })
}

/// Levels and separators `(n_t, j_t)` with increasing entries such that the
/// 2-shape of level `n_t` on `j_t` is full and levels `n_t`, `n_{t+1}` agree
/// on `j_{t+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Alignment {
    pub pairs: Vec<(usize, usize)>,
}

/// Greedy alignment: least next level, then least next separator.
pub fn align_shapes_external(table: &ShapeTable) -> Alignment {
    let it = &table.interner;
    let full = |n: usize, j: usize| table.id(n, j).is_some_and(|id| it.is_full(id));
    let mut pairs = Vec::new();
    'first: for n in 1..=table.levels() {
        for &j in &table.kept {
            if full(n, j) {
                pairs.push((n, j));
                break 'first;
            }
        }
    }
    while let Some(&(n, j)) = pairs.last() {
        let mut found = None;
        'search: for n2 in n + 1..=table.levels() {
            for &j2 in table.kept.iter().filter(|&&x| x > j) {
                if full(n2, j2) && table.id(n, j2) == table.id(n2, j2) {
                    found = Some((n2, j2));
                    break 'search;
                }
            }
        }
        match found {
            Some(p) => pairs.push(p),
            None => break,
        }
    }
    Alignment { pairs }
}

/// One aligned level with its common 2-link and its chosen members.
#[derive(Debug, Clone)]
pub struct SelectedLevel {
    pub family: usize,
    pub seps: (usize, usize),
    pub link: TwoLink,
    pub(crate) members: Vec<Member>,
}

impl SelectedLevel {
    pub fn members(&self, win: &Window) -> Vec<TwoRayStream> {
        self.members.iter().map(|m| m.tail_stream(win)).collect()
    }
}

/// For every aligned level `t` but the last, `t` members of the refined family
/// sharing one 2-link between the level's separator and the next one, ordered
/// by least start vertex.
pub fn select_allowed(refined: &Refinement, align: &Alignment, win: &Window) -> Result<Vec<SelectedLevel>> {
    let it = refined.table.interner();
    let mut out = Vec::new();
    for t in 1..align.pairs.len() {
        let (n, j1) = align.pairs[t - 1];
        let j2 = align.pairs[t].1;
        let w1 = win.two_shape(it.key(refined.table.id(n, j1).unwrap()));
        let w2 = win.two_shape(it.key(refined.table.id(n, j2).unwrap()));
        let mut classes: BTreeMap<(Key, Key), Vec<usize>> = BTreeMap::new();
        for (i, m) in refined.families[n - 1].iter().enumerate() {
            let key = (win.link(m.ray(0), j1, j2), win.link(m.ray(1), j1, j2));
            let tau = win.two_link((&key.0, &key.1));
            let bad: Vec<String> = is_allowed_link(&tau.0, &w1.0, &w2.0)
                .into_iter()
                .chain(is_allowed_link(&tau.1, &w1.1, &w2.1))
                .map(|v| v.detail)
                .collect();
            if !bad.is_empty() {
                return Err(Error::LeftyFault(format!(
                    "member {} of level {n} induces {tau} between {w1} and {w2}: {}",
                    m.src,
                    bad.join("; ")
                )));
            }
            classes.entry(key).or_default().push(i);
        }
        let (key, idx) = classes
            .into_iter()
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
            .unwrap();
        if idx.len() < t {
            return Err(Error::Input(format!(
                "level {n}: largest 2-link class has {} members, {t} needed",
                idx.len()
            )));
        }
        let mut members: Vec<Member> = idx[..t].iter().map(|&i| refined.families[n - 1][i].clone()).collect();
        members.sort_by(|a, b| {
            let s = |m: &Member, side| win.id(m.ray(side)[0]).clone();
            s(a, 0).cmp(&s(b, 0)).then_with(|| s(a, 1).cmp(&s(b, 1)))
        });
        out.push(SelectedLevel {
            family: n,
            seps: (j1, j2),
            link: win.two_link((&key.0, &key.1)),
            members,
        });
    }
    Ok(out)
}
