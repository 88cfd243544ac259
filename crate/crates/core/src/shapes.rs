//! Shape words over one separator, link words over two, allowed links and
//! the exact enumeration bounds c1 and c2.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::separations::{Separation, Side};

/// Largest separator accepted by the single-shape enumerator.
pub const SHAPE_BOUND: usize = 6;
/// Largest separator accepted by enumerators over pairs of shapes.
pub const PAIR_BOUND: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    L,
    M,
    R,
}

impl Letter {
    pub fn as_char(self) -> char {
        match self {
            Letter::L => 'l',
            Letter::M => 'm',
            Letter::R => 'r',
        }
    }
}

/// Alternating word `v1 x1 v2 ... v_n`; empty words print as `ε`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    vertices: Vec<VertexId>,
    letters: Vec<Letter>,
}

/// Word over one separator with letters in {l, r}.
pub type ShapeWord = Word;
/// Word over two separators with letters in {l, m, r}.
pub type LinkWord = Word;

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn new(vertices: Vec<VertexId>, letters: Vec<Letter>) -> Result<Self> {
        if letters.len() + 1 != vertices.len() && !(vertices.is_empty() && letters.is_empty()) {
            return Err(Error::Input(format!(
                "a word with {} vertices needs {} letters, got {}",
                vertices.len(),
                vertices.len().saturating_sub(1),
                letters.len()
            )));
        }
        Ok(Word { vertices, letters })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Option<&VertexId> {
        self.vertices.first()
    }

    pub fn last(&self) -> Option<&VertexId> {
        self.vertices.last()
    }

    /// Adjacent pairs joined by `letter`.
    pub fn pairs(&self, letter: Letter) -> BTreeSet<(VertexId, VertexId)> {
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == letter)
            .map(|(i, _)| (self.vertices[i].clone(), self.vertices[i + 1].clone()))
            .collect()
    }

    pub fn position(&self, v: &VertexId) -> Option<usize> {
        self.vertices.iter().position(|w| w == v)
    }

    /// Letters around each vertex of `l:σ:r`, the word framed by sentinel letters.
    pub fn framed(&self) -> Vec<(Letter, &VertexId, Letter)> {
        let mut frame = vec![Letter::L];
        frame.extend(self.letters.iter().copied());
        frame.push(Letter::R);
        self.vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (frame[i], v, frame[i + 1]))
            .collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "ε");
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, " {} ", self.letters[i - 1].as_char())?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tokens: Vec<&str> = s.split_whitespace().collect();
        if tokens.is_empty() || tokens == ["ε"] {
            return Ok(Word::empty());
        }
        if tokens.len().is_multiple_of(2) {
            return Err(Error::Input(format!("word `{s}` does not alternate")));
        }
        let mut vertices = Vec::new();
        let mut letters = Vec::new();
        for (i, t) in tokens.iter().enumerate() {
            if i % 2 == 0 {
                vertices.push(VertexId::new(t));
            } else {
                letters.push(match *t {
                    "l" => Letter::L,
                    "m" => Letter::M,
                    "r" => Letter::R,
                    other => return Err(Error::Input(format!("unknown letter `{other}` in `{s}`"))),
                });
            }
        }
        Word::new(vertices, letters)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Pair of shapes, one per ray of a 2-ray.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoShape(pub ShapeWord, pub ShapeWord);

/// Pair of link words, one per ray of a 2-ray.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwoLink(pub LinkWord, pub LinkWord);

impl TwoShape {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty() && self.1.is_empty()
    }

    /// Both coordinates nonempty, as for lefty 2-rays that meet the separation.
    pub fn is_full(&self) -> bool {
        !self.0.is_empty() && !self.1.is_empty()
    }

    pub fn is_disjoint(&self) -> bool {
        self.0.vertices.iter().all(|v| !self.1.vertices.contains(v))
    }
}

impl fmt::Display for TwoShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} | {})", self.0, self.1)
    }
}

impl fmt::Display for TwoLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} | {})", self.0, self.1)
    }
}

fn needs_prefix(prefix: &[VertexId], last_sep: &Separation) -> Result<()> {
    match prefix.last() {
        Some(v) if last_sep.side_of(v) == Side::B => Ok(()),
        Some(v) => Err(Error::NeedsLongerPrefix(format!(
            "prefix ends at {v}, not beyond the separator {:?}",
            last_sep.separator()
        ))),
        None => Err(Error::NeedsLongerPrefix("empty prefix".into())),
    }
}

/// Shape induced on `sep` by a ray with the given prefix.
pub fn induce_shape(prefix: &[VertexId], sep: &Separation) -> Result<ShapeWord> {
    needs_prefix(prefix, sep)?;
    let hits: Vec<usize> = (0..prefix.len()).filter(|&i| sep.side_of(&prefix[i]) == Side::X).collect();
    let mut letters = Vec::new();
    for w in hits.windows(2) {
        let sides: BTreeSet<Side> = (w[0]..w[1]).map(|i| sep.edge_side(&prefix[i], &prefix[i + 1])).collect();
        if sides.len() != 1 {
            return Err(Error::Input(format!(
                "segment {}..{} uses both sides: the separation does not separate",
                prefix[w[0]], prefix[w[1]]
            )));
        }
        letters.push(if sides.contains(&Side::A) { Letter::L } else { Letter::R });
    }
    Word::new(hits.iter().map(|&i| prefix[i].clone()).collect(), letters)
}

/// Link word induced on two separations (`first` precedes `second`).
pub fn induce_link(prefix: &[VertexId], first: &Separation, second: &Separation) -> Result<LinkWord> {
    needs_prefix(prefix, second)?;
    let hits: Vec<usize> = (0..prefix.len())
        .filter(|&i| first.side_of(&prefix[i]) == Side::X || second.side_of(&prefix[i]) == Side::X)
        .collect();
    let region = |i: usize| {
        let (u, v) = (&prefix[i], &prefix[i + 1]);
        if first.edge_side(u, v) == Side::A {
            Letter::L
        } else if second.edge_side(u, v) == Side::B {
            Letter::R
        } else {
            Letter::M
        }
    };
    let mut letters = Vec::new();
    for w in hits.windows(2) {
        let regions: BTreeSet<Letter> = (w[0]..w[1]).map(region).collect();
        if regions.len() != 1 {
            return Err(Error::Input(format!(
                "segment {}..{} crosses regions without meeting a separator",
                prefix[w[0]], prefix[w[1]]
            )));
        }
        letters.push(*regions.iter().next().unwrap());
    }
    Word::new(hits.iter().map(|&i| prefix[i].clone()).collect(), letters)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkBullet {
    /// Vertices are exactly those of both shapes.
    Vertices,
    /// Order within each shape is preserved.
    Order,
    /// Starts at the first shape's initial vertex, ends at the second's terminal one.
    Endpoints,
    /// `v l w` occurs iff it occurs in the first shape.
    LeftSubwords,
    /// `v r w` occurs iff it occurs in the second shape.
    RightSubwords,
    /// No vertex repeats.
    Distinct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkViolation {
    pub bullet: LinkBullet,
    pub detail: String,
}

/// Checks the seven conditions for `tau` to be an allowed link from `s1` to `s2`.
/// Returns every violated condition; an empty list certifies the link.
pub fn is_allowed_link(tau: &LinkWord, s1: &ShapeWord, s2: &ShapeWord) -> Vec<LinkViolation> {
    let mut out = Vec::new();
    let mut fail = |bullet, detail: String| out.push(LinkViolation { bullet, detail });

    let tv: BTreeSet<&VertexId> = tau.vertices.iter().collect();
    let sv: BTreeSet<&VertexId> = s1.vertices.iter().chain(&s2.vertices).collect();
    if tv != sv {
        let extra: Vec<String> = tv.difference(&sv).map(|v| v.to_string()).collect();
        let missing: Vec<String> = sv.difference(&tv).map(|v| v.to_string()).collect();
        fail(LinkBullet::Vertices, format!("extra {extra:?}, missing {missing:?}"));
    }
    for s in [s1, s2] {
        for w in s.vertices.windows(2) {
            if let (Some(a), Some(b)) = (tau.position(&w[0]), tau.position(&w[1])) {
                if a > b {
                    fail(LinkBullet::Order, format!("{} precedes {} in {s} but not in {tau}", w[0], w[1]));
                }
            }
        }
    }
    if let Some(v) = s1.first() {
        if tau.first() != Some(v) {
            fail(LinkBullet::Endpoints, format!("does not start at {v}"));
        }
    }
    if let Some(v) = s2.last() {
        if tau.last() != Some(v) {
            fail(LinkBullet::Endpoints, format!("does not end at {v}"));
        }
    }
    if tau.pairs(Letter::L) != s1.pairs(Letter::L) {
        fail(
            LinkBullet::LeftSubwords,
            format!("l-subwords of {tau} differ from those of {s1}"),
        );
    }
    if tau.pairs(Letter::R) != s2.pairs(Letter::R) {
        fail(
            LinkBullet::RightSubwords,
            format!("r-subwords of {tau} differ from those of {s2}"),
        );
    }
    if tv.len() != tau.vertices.len() {
        fail(LinkBullet::Distinct, format!("{tau} repeats a vertex"));
    }
    out
}

/// All shapes over `x`, by length, then vertex order, then letters (l before r).
pub fn enumerate_shapes(x: &[VertexId]) -> Result<Vec<ShapeWord>> {
    if x.len() > SHAPE_BOUND {
        return Err(Error::Input(format!(
            "separator of size {} exceeds the enumeration bound {SHAPE_BOUND}",
            x.len()
        )));
    }
    let mut xs = x.to_vec();
    xs.sort();
    xs.dedup();
    let mut out = vec![Word::empty()];
    for len in 1..=xs.len() {
        let mut arrangements = Vec::new();
        arrange(&xs, len, &mut Vec::new(), &mut vec![false; xs.len()], &mut arrangements);
        for a in arrangements {
            for mask in 0..(1usize << (len - 1)) {
                let letters = (0..len - 1)
                    .map(|b| if mask >> (len - 2 - b) & 1 == 0 { Letter::L } else { Letter::R })
                    .collect();
                out.push(Word::new(a.clone(), letters)?);
            }
        }
    }
    Ok(out)
}

fn arrange(xs: &[VertexId], len: usize, cur: &mut Vec<VertexId>, used: &mut [bool], out: &mut Vec<Vec<VertexId>>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    for i in 0..xs.len() {
        if !used[i] {
            used[i] = true;
            cur.push(xs[i].clone());
            arrange(xs, len, cur, used, out);
            cur.pop();
            used[i] = false;
        }
    }
}

/// Vertex-disjoint pairs of shapes over `x`.
pub fn enumerate_two_shapes(x: &[VertexId]) -> Result<Vec<TwoShape>> {
    if x.len() > PAIR_BOUND {
        return Err(Error::Input(format!(
            "separator of size {} exceeds the pair enumeration bound {PAIR_BOUND}",
            x.len()
        )));
    }
    let shapes = enumerate_shapes(x)?;
    let mut out = Vec::new();
    for a in &shapes {
        for b in &shapes {
            let t = TwoShape(a.clone(), b.clone());
            if t.is_disjoint() {
                out.push(t);
            }
        }
    }
    Ok(out)
}

/// All allowed links from `s1` to `s2`, in lexicographic order of vertex sequence.
///
/// A link is fixed by its vertex order: letters are forced to l on the
/// l-pairs of `s1`, to r on the r-pairs of `s2`, and to m elsewhere.
pub fn enumerate_allowed_links(s1: &ShapeWord, s2: &ShapeWord) -> Vec<LinkWord> {
    let mut universe: Vec<VertexId> = s1.vertices.iter().chain(&s2.vertices).cloned().collect();
    universe.sort();
    universe.dedup();
    let mut preds: HashMap<&VertexId, BTreeSet<&VertexId>> = HashMap::new();
    for s in [s1, s2] {
        for w in s.vertices.windows(2) {
            preds.entry(&w[1]).or_default().insert(&w[0]);
        }
    }
    let lp = s1.pairs(Letter::L);
    let rp = s2.pairs(Letter::R);
    let mut out = Vec::new();
    let mut cur: Vec<VertexId> = Vec::new();
    fn go(
        universe: &[VertexId],
        preds: &HashMap<&VertexId, BTreeSet<&VertexId>>,
        s1: &ShapeWord,
        s2: &ShapeWord,
        lp: &BTreeSet<(VertexId, VertexId)>,
        rp: &BTreeSet<(VertexId, VertexId)>,
        cur: &mut Vec<VertexId>,
        out: &mut Vec<LinkWord>,
    ) {
        if cur.len() == universe.len() {
            if s2.last().is_some_and(|v| cur.last() != Some(v)) {
                return;
            }
            let letters: Vec<Letter> = cur
                .windows(2)
                .map(|w| {
                    let p = (w[0].clone(), w[1].clone());
                    if lp.contains(&p) {
                        Letter::L
                    } else if rp.contains(&p) {
                        Letter::R
                    } else {
                        Letter::M
                    }
                })
                .collect();
            let tau = Word::new(cur.clone(), letters).unwrap();
            if is_allowed_link(&tau, s1, s2).is_empty() {
                out.push(tau);
            }
            return;
        }
        for v in universe {
            if cur.contains(v) {
                continue;
            }
            if cur.is_empty() && s1.first().is_some_and(|f| f != v) {
                continue;
            }
            if preds.get(v).is_some_and(|ps| ps.iter().any(|p| !cur.contains(p))) {
                continue;
            }
            cur.push(v.clone());
            go(universe, preds, s1, s2, lp, rp, cur, out);
            cur.pop();
        }
    }
    go(&universe, &preds, s1, s2, &lp, &rp, &mut cur, &mut out);
    out
}

/// Allowed 2-links from one 2-shape to another: products of coordinate links.
pub fn enumerate_allowed_two_links(s1: &TwoShape, s2: &TwoShape) -> Vec<TwoLink> {
    let a = enumerate_allowed_links(&s1.0, &s2.0);
    let b = enumerate_allowed_links(&s1.1, &s2.1);
    let mut out = Vec::new();
    for x in &a {
        for y in &b {
            out.push(TwoLink(x.clone(), y.clone()));
        }
    }
    out
}

fn generic_separator(tag: &str, k: usize) -> Vec<VertexId> {
    (0..k).map(|i| VertexId::new(format!("{tag}:{i}"))).collect()
}

/// Number of shapes over a separator of size `k`.
pub fn shape_count(k: usize) -> u64 {
    let mut total = 1u64;
    let mut arrangements = 1u64;
    for len in 1..=k as u64 {
        arrangements *= k as u64 - len + 1;
        total += arrangements << (len - 1);
    }
    total
}

/// Number of vertex-disjoint 2-shapes over a separator of size `k`.
pub fn c1(k: usize) -> u64 {
    // first shape uses `len` vertices; the second is any shape over the rest
    let mut total = shape_count(k);
    let mut arrangements = 1u64;
    for len in 1..=k as u64 {
        arrangements *= k as u64 - len + 1;
        total += (arrangements << (len - 1)) * shape_count(k - len as usize);
    }
    total
}

/// Number of ordered pairs of shapes, without the disjointness restriction.
pub fn c1_unrestricted(k: usize) -> u64 {
    shape_count(k).pow(2)
}

/// Largest number of allowed 2-links between a 2-shape on one separator and a
/// 2-shape on a disjoint separator, both of size `k`.
pub fn c2(k: usize) -> Result<u64> {
    if k > PAIR_BOUND {
        return Err(Error::Input(format!("c2 is computed for separators up to size {PAIR_BOUND}")));
    }
    let x1 = generic_separator("x", k);
    let x2 = generic_separator("y", k);
    let s1 = enumerate_shapes(&x1)?;
    let s2 = enumerate_shapes(&x2)?;
    let mut links: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for (i, a) in s1.iter().enumerate() {
        for (j, b) in s2.iter().enumerate() {
            links.insert((i, j), enumerate_allowed_links(a, b).len() as u64);
        }
    }
    let pairs = |s: &[ShapeWord]| -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..s.len() {
            for j in 0..s.len() {
                if s[i].vertices.iter().all(|v| !s[j].vertices.contains(v)) {
                    out.push((i, j));
                }
            }
        }
        out
    };
    let (p1, p2) = (pairs(&s1), pairs(&s2));
    let mut best = 0;
    for &(a0, a1) in &p1 {
        for &(b0, b1) in &p2 {
            best = best.max(links[&(a0, b0)] * links[&(a1, b1)]);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn two_vertex_shapes() {
        let x = [VertexId::new("u"), VertexId::new("v")];
        let shapes: Vec<String> = enumerate_shapes(&x).unwrap().iter().map(|s| s.to_string()).collect();
        assert_eq!(shapes, ["ε", "u", "v", "u l v", "u r v", "v l u", "v r u"]);
    }

    #[test]
    fn counts_match_enumeration() {
        for k in 0..=4 {
            let x = generic_separator("x", k);
            assert_eq!(enumerate_shapes(&x).unwrap().len() as u64, shape_count(k));
            assert_eq!(enumerate_two_shapes(&x).unwrap().len() as u64, c1(k));
        }
        assert_eq!(c1(1), 3);
    }

    #[test]
    fn c2_small() {
        assert_eq!(c2(1).unwrap(), 1);
        assert_eq!(c2(2).unwrap(), 2);
        println!("c1(3) = {}, c2(3) = {}", c1(3), c2(3).unwrap());
    }

    #[test]
    fn word_round_trip() {
        for s in ["ε", "a:3", "a:3 r b:3", "x l y m z"] {
            assert_eq!(w(s).to_string(), s);
        }
        assert!("a l".parse::<Word>().is_err());
        assert!("a q b".parse::<Word>().is_err());
    }

    #[test]
    fn spine_link_is_allowed() {
        assert!(is_allowed_link(&w("a:3 m a:5"), &w("a:3"), &w("a:5")).is_empty());
        let v = is_allowed_link(&w("a:3"), &w("a:3"), &w("a:5"));
        assert!(v.iter().any(|x| x.bullet == LinkBullet::Endpoints));
        let v = is_allowed_link(&w("a:3 m a:3 m a:5"), &w("a:3"), &w("a:5"));
        assert!(v.iter().any(|x| x.bullet == LinkBullet::Distinct));
    }

    #[test]
    fn framed_counts() {
        let word = w("u l v");
        let f = word.framed();
        assert_eq!(f[0], (Letter::L, &VertexId::new("u"), Letter::L));
        assert_eq!(f[1], (Letter::L, &VertexId::new("v"), Letter::R));
    }
}
