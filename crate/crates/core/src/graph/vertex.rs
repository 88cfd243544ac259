use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Segment {
    Num(i64),
    Text(Box<str>),
}

#[derive(Debug)]
struct Inner {
    text: Box<str>,
    key: Box<[Segment]>,
}

/// Canonical textual vertex identifier such as `a:3` or `m:a:3:1`.
///
/// Ids are compared segment by segment (segments separated by `:`), numeric
/// segments numerically, so `a:9 < a:10`. Cloning is a reference-count bump.
#[derive(Clone)]
pub struct VertexId(Arc<Inner>);

impl VertexId {
    pub fn new(text: impl AsRef<str>) -> Self {
        let text = text.as_ref();
        let key = text
            .split(':')
            .map(|seg| match seg.parse::<i64>() {
                Ok(n) if !seg.starts_with('+') => Segment::Num(n),
                _ => Segment::Text(seg.into()),
            })
            .collect();
        VertexId(Arc::new(Inner {
            text: text.into(),
            key,
        }))
    }

    pub fn as_str(&self) -> &str {
        &self.0.text
    }
}

impl PartialEq for VertexId {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.text == other.0.text
    }
}

impl Eq for VertexId {}

impl std::hash::Hash for VertexId {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.text.hash(state);
    }
}

fn cmp_segment(a: &Segment, b: &Segment) -> Ordering {
    match (a, b) {
        (Segment::Num(x), Segment::Num(y)) => x.cmp(y),
        (Segment::Num(_), Segment::Text(_)) => Ordering::Less,
        (Segment::Text(_), Segment::Num(_)) => Ordering::Greater,
        (Segment::Text(x), Segment::Text(y)) => x.cmp(y),
    }
}

impl Ord for VertexId {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        let (a, b) = (&self.0.key, &other.0.key);
        for (x, y) in a.iter().zip(b.iter()) {
            match cmp_segment(x, y) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        a.len()
            .cmp(&b.len())
            // "a:03" and "a:3" share a key; fall back to the raw text
            .then_with(|| self.0.text.cmp(&other.0.text))
    }
}

impl PartialOrd for VertexId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.text)
    }
}

impl fmt::Debug for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0.text)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId::new(s)
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId::new(s)
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(VertexId::new(s))
    }
}

/// Unordered edge with canonically ordered endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(VertexId, VertexId);

impl EdgeId {
    /// Returns `None` for a loop.
    pub fn new(u: VertexId, v: VertexId) -> Option<Self> {
        match u.cmp(&v) {
            Ordering::Less => Some(EdgeId(u, v)),
            Ordering::Greater => Some(EdgeId(v, u)),
            Ordering::Equal => None,
        }
    }

    pub fn endpoints(&self) -> (&VertexId, &VertexId) {
        (&self.0, &self.1)
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        &self.0 == v || &self.1 == v
    }

    pub fn other(&self, v: &VertexId) -> Option<&VertexId> {
        if &self.0 == v {
            Some(&self.1)
        } else if &self.1 == v {
            Some(&self.0)
        } else {
            None
        }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}--{}", self.0, self.1)
    }
}

/// Edges of a vertex sequence, in order.
pub fn path_edges(path: &[VertexId]) -> impl Iterator<Item = EdgeId> + '_ {
    path.windows(2)
        .filter_map(|w| EdgeId::new(w[0].clone(), w[1].clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_segments_compare_numerically() {
        assert!(VertexId::new("a:9") < VertexId::new("a:10"));
        assert!(VertexId::new("a:3") < VertexId::new("b:0"));
        assert!(VertexId::new("a:-2") < VertexId::new("a:1"));
        assert!(VertexId::new("a:3") < VertexId::new("a:3:0"));
        assert!(VertexId::new("a:03") != VertexId::new("a:3"));
        assert_ne!(
            VertexId::new("a:03").cmp(&VertexId::new("a:3")),
            Ordering::Equal
        );
    }

    #[test]
    fn edge_is_canonical() {
        let e = EdgeId::new("b:1".into(), "a:1".into()).unwrap();
        assert_eq!(e.endpoints().0.as_str(), "a:1");
        assert!(EdgeId::new("a".into(), "a".into()).is_none());
        assert_eq!(e.other(&"a:1".into()).unwrap().as_str(), "b:1");
    }
}
