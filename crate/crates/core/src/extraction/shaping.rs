//! Selection principle for abstract shapings: levels of colourings of indices
//! and of index pairs, thinned to a sequence with agreeing colours.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partial colouring of the window indices with a colouring of index pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shaping {
    single: Vec<Option<u32>>,
    /// Row-major `width x width`; only entries `a < b` are read.
    pair: Vec<u32>,
}

impl Shaping {
    pub fn new<F: Fn(usize, usize) -> u32>(single: Vec<Option<u32>>, pair: F) -> Shaping {
        let w = single.len();
        let mut flat = vec![0; w * w];
        for a in 0..w {
            for b in a + 1..w {
                flat[a * w + b] = pair(a, b);
            }
        }
        Shaping { single, pair: flat }
    }

    pub fn width(&self) -> usize {
        self.single.len()
    }

    pub fn c1(&self, j: usize) -> Option<u32> {
        self.single.get(j).copied().flatten()
    }

    /// Colour of the pair `{a, b}`, `a < b`.
    pub fn c2(&self, a: usize, b: usize) -> u32 {
        self.pair[a * self.width() + b]
    }

    /// Indices where the single colouring is undefined.
    pub fn undefined(&self) -> Vec<usize> {
        (0..self.width()).filter(|&j| self.single[j].is_none()).collect()
    }
}

/// Levels `i_n` (from 1), indices `j_n` and member sets `S_n` of a selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapingSelection {
    pub levels: Vec<usize>,
    pub indices: Vec<usize>,
    pub sets: Vec<Vec<usize>>,
}

impl ShapingSelection {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Recomputes both agreement conditions and the shape of the sequences;
    /// returns the violations found.
    pub fn verify(&self, d: &[Vec<Shaping>]) -> Vec<String> {
        let mut bad = Vec::new();
        let n = self.levels.len();
        if self.indices.len() != n || self.sets.len() != n {
            bad.push("sequences differ in length".into());
            return bad;
        }
        for w in self.levels.windows(2).chain(self.indices.windows(2)) {
            if w[0] >= w[1] {
                bad.push(format!("sequence not strictly increasing at {} -> {}", w[0], w[1]));
            }
        }
        for (t, set) in self.sets.iter().enumerate() {
            let level = self.levels[t];
            if set.len() < t + 1 {
                bad.push(format!("S_{} has {} members", t + 1, set.len()));
            }
            if level == 0 || level > d.len() || set.iter().any(|&m| m >= d[level - 1].len()) {
                bad.push(format!("S_{} names a missing member", t + 1));
                return bad;
            }
        }
        let member = |t: usize, m: usize| &d[self.levels[t] - 1][m];
        for t in 0..n {
            let j = self.indices[t];
            let mut colours = HashSet::new();
            for tt in t.saturating_sub(1)..=t {
                for &m in &self.sets[tt] {
                    colours.insert(member(tt, m).c1(j));
                }
            }
            if colours.len() != 1 || colours.contains(&None) {
                bad.push(format!("single colours at j_{} = {j} are {colours:?}", t + 1));
            }
            if t + 1 < n {
                let j2 = self.indices[t + 1];
                let pairs: HashSet<u32> = self.sets[t].iter().map(|&m| member(t, m).c2(j, j2)).collect();
                if pairs.len() != 1 {
                    bad.push(format!("pair colours on ({j}, {j2}) in S_{} are {pairs:?}", t + 1));
                }
            }
        }
        bad
    }
}

struct Search<'a> {
    d: &'a [Vec<Shaping>],
    width: usize,
    want: usize,
    singles: Vec<u32>,
    pairs: Vec<u32>,
    failed: HashSet<(usize, usize, usize, u32)>,
}

impl Search<'_> {
    /// Members of `level` with the given colours; `next` is `(j', c1(j'), c2(j, j'))`.
    fn class(&self, level: usize, j: usize, a: u32, next: Option<(usize, u32, u32)>) -> Vec<usize> {
        (0..self.d[level].len())
            .filter(|&m| {
                let s = &self.d[level][m];
                s.c1(j) == Some(a)
                    && next.is_none_or(|(j2, a2, b)| s.c1(j2) == Some(a2) && s.c2(j, j2) == b)
            })
            .collect()
    }

    /// Extends a selection whose next set is `S_n` (n from 1), after level
    /// index `prev`, at index `j` with single colour `a`.
    fn go(&mut self, n: usize, prev: usize, j: usize, a: u32, out: &mut ShapingSelection) -> bool {
        if self.failed.contains(&(n, prev, j, a)) {
            return false;
        }
        for level in prev..self.d.len() {
            if self.d[level].len() < n {
                continue;
            }
            if n == self.want {
                let set = self.class(level, j, a, None);
                if set.len() >= n {
                    out.levels.push(level + 1);
                    out.indices.push(j);
                    out.sets.push(set);
                    return true;
                }
                continue;
            }
            for j2 in j + 1..self.width {
                for a2 in self.singles.clone() {
                    for b in self.pairs.clone() {
                        let set = self.class(level, j, a, Some((j2, a2, b)));
                        if set.len() < n {
                            continue;
                        }
                        out.levels.push(level + 1);
                        out.indices.push(j);
                        out.sets.push(set);
                        if self.go(n + 1, level + 1, j2, a2, out) {
                            return true;
                        }
                        out.levels.pop();
                        out.indices.pop();
                        out.sets.pop();
                    }
                }
            }
        }
        self.failed.insert((n, prev, j, a));
        false
    }
}

fn search(d: &[Vec<Shaping>], width: usize, want: usize) -> Option<ShapingSelection> {
    let mut singles: Vec<u32> = d.iter().flatten().flat_map(|s| s.single.iter().flatten().copied()).collect();
    singles.sort_unstable();
    singles.dedup();
    let mut pairs: Vec<u32> = d
        .iter()
        .flatten()
        .flat_map(|s| (0..width).flat_map(move |a| (a + 1..width).map(move |b| s.c2(a, b))))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let mut st = Search {
        d,
        width,
        want,
        singles: singles.clone(),
        pairs,
        failed: HashSet::new(),
    };
    let mut out = ShapingSelection {
        levels: Vec::new(),
        indices: Vec::new(),
        sets: Vec::new(),
    };
    for j in 0..width {
        for &a in &singles {
            if st.go(1, 0, j, a, &mut out) {
                return Some(out);
            }
        }
    }
    None
}

/// Finds strictly increasing levels `i_1 < ... < i_N` and indices
/// `j_1 < ... < j_N` with sets `S_n` of at least `n` members of level `i_n`
/// such that `c1(j_n)` is defined and equal on `S_{n-1} ∪ S_n`, and
/// `c2(j_n, j_{n+1})` is equal on `S_n` for `n < N`. Each `S_n` is the
/// largest set with its colours. Complete: fails only when no such selection
/// of length `want` exists in the window.
pub fn shaping_select(d: &[Vec<Shaping>], want: usize) -> Result<ShapingSelection> {
    let width = d.iter().flatten().map(Shaping::width).max().unwrap_or(0);
    if d.iter().flatten().any(|s| s.width() != width) {
        return Err(Error::Input("shapings of one window must share its width".into()));
    }
    if let Some((i, _)) = d.iter().enumerate().find(|(_, l)| l.iter().any(|s| s.undefined().len() == width)) {
        return Err(Error::horizon(
            format!("a defined single colour at level {} within the window", i + 1),
            0,
            None,
        ));
    }
    if want == 0 {
        return Ok(ShapingSelection {
            levels: Vec::new(),
            indices: Vec::new(),
            sets: Vec::new(),
        });
    }
    if let Some(sel) = search(d, width, want) {
        return Ok(sel);
    }
    let achieved = (1..want).take_while(|&n| search(d, width, n).is_some()).count();
    Err(Error::horizon(format!("a selection of length {want}"), achieved, None))
}
