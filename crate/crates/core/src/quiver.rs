//! Quivers and pure quiver mutation: composite arrows, arrow reversal at the
//! mutation vertex, and canonical removal of a maximal disjoint collection of
//! oriented 2-cycles.

use crate::error::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub String);

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ArrowId(pub String);

impl VertexId {
    pub fn new(s: impl Into<String>) -> VertexId {
        VertexId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl ArrowId {
    pub fn new(s: impl Into<String>) -> ArrowId {
        ArrowId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
    /// Name of the reversal a -> a*.
    pub fn starred(&self) -> ArrowId {
        ArrowId(format!("{}*", self.0))
    }
    /// Name of the composite [ba] of a followed by b.
    pub fn composite(b: &ArrowId, a: &ArrowId) -> ArrowId {
        ArrowId(format!("[{}{}]", b.0, a.0))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ArrowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Arrow {
    pub id: ArrowId,
    pub tail: VertexId,
    pub head: VertexId,
}

impl Arrow {
    pub fn new(id: impl Into<String>, tail: impl Into<String>, head: impl Into<String>) -> Arrow {
        Arrow {
            id: ArrowId::new(id),
            tail: VertexId::new(tail),
            head: VertexId::new(head),
        }
    }
}

/// A finite loop-free directed multigraph. Vertex and arrow lists are ordered;
/// the arrow-list order fixes pivot preferences downstream, so mutation keeps
/// untouched arrows in place and appends new composites at the end.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Quiver {
    vertices: Vec<VertexId>,
    arrows: Vec<Arrow>,
}

impl Quiver {
    pub fn new(vertices: Vec<VertexId>, arrows: Vec<Arrow>) -> Result<Quiver> {
        let q = Quiver { vertices, arrows };
        q.validate()?;
        Ok(q)
    }

    pub fn from_strs(vertices: &[&str], arrows: &[(&str, &str, &str)]) -> Result<Quiver> {
        Quiver::new(
            vertices.iter().map(|v| VertexId::new(*v)).collect(),
            arrows
                .iter()
                .map(|(id, t, h)| Arrow::new(*id, *t, *h))
                .collect(),
        )
    }

    fn validate(&self) -> Result<()> {
        let mut vs = BTreeSet::new();
        for v in &self.vertices {
            if !vs.insert(v) {
                return Err(Error::InvalidQuiver(format!("duplicate vertex {v}")));
            }
        }
        let mut ids = BTreeSet::new();
        for a in &self.arrows {
            if !ids.insert(&a.id) {
                return Err(Error::InvalidQuiver(format!("duplicate arrow {}", a.id)));
            }
            if !vs.contains(&a.tail) {
                return Err(Error::UnknownVertex(a.tail.0.clone()));
            }
            if !vs.contains(&a.head) {
                return Err(Error::UnknownVertex(a.head.0.clone()));
            }
            if a.tail == a.head {
                return Err(Error::LoopPresent(a.tail.0.clone()));
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn has_vertex(&self, v: &VertexId) -> bool {
        self.vertices.contains(v)
    }

    pub fn arrow(&self, id: &ArrowId) -> Result<&Arrow> {
        self.arrows
            .iter()
            .find(|a| &a.id == id)
            .ok_or_else(|| Error::UnknownArrow(id.0.clone()))
    }

    /// Arrows into k, sorted by arrow id.
    pub fn in_arrows(&self, k: &VertexId) -> Vec<&Arrow> {
        let mut v: Vec<&Arrow> = self.arrows.iter().filter(|a| &a.head == k).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    /// Arrows out of k, sorted by arrow id.
    pub fn out_arrows(&self, k: &VertexId) -> Vec<&Arrow> {
        let mut v: Vec<&Arrow> = self.arrows.iter().filter(|a| &a.tail == k).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    /// All oriented 2-cycles, as id pairs (x: u->v, y: v->u) with x.id < y.id.
    pub fn two_cycles(&self) -> Vec<(ArrowId, ArrowId)> {
        let mut out = Vec::new();
        for x in &self.arrows {
            for y in &self.arrows {
                if x.id < y.id && x.head == y.tail && x.tail == y.head {
                    out.push((x.id.clone(), y.id.clone()));
                }
            }
        }
        out.sort();
        out
    }

    pub fn has_two_cycle_at(&self, k: &VertexId) -> bool {
        self.arrows.iter().any(|x| {
            (&x.head == k || &x.tail == k)
                && self
                    .arrows
                    .iter()
                    .any(|y| x.head == y.tail && x.tail == y.head && x.id != y.id)
        })
    }

    /// Mutation at k requires a declared vertex, no loops anywhere, and no
    /// 2-cycle through k.
    pub fn validate_mutable(&self, k: &VertexId) -> Result<()> {
        if !self.has_vertex(k) {
            return Err(Error::UnknownVertex(k.0.clone()));
        }
        self.validate()?;
        if self.has_two_cycle_at(k) {
            return Err(Error::TwoCycleAtK(k.0.clone()));
        }
        Ok(())
    }

    /// The first two mutation steps: add a composite [ba] for every pair
    /// (a: j->k, b: k->i), then replace each arrow at k by its reversal.
    /// Untouched arrows keep their positions; reversals replace the original
    /// positions; composites are appended in (incoming, outgoing) sorted order.
    pub fn premutate(&self, k: &VertexId) -> Result<Quiver> {
        self.validate_mutable(k)?;
        let mut arrows = Vec::with_capacity(self.arrows.len());
        for a in &self.arrows {
            if &a.head == k {
                arrows.push(Arrow {
                    id: a.id.starred(),
                    tail: k.clone(),
                    head: a.tail.clone(),
                });
            } else if &a.tail == k {
                arrows.push(Arrow {
                    id: a.id.starred(),
                    tail: a.head.clone(),
                    head: k.clone(),
                });
            } else {
                arrows.push(a.clone());
            }
        }
        for a in self.in_arrows(k) {
            for b in self.out_arrows(k) {
                arrows.push(Arrow {
                    id: ArrowId::composite(&b.id, &a.id),
                    tail: a.tail.clone(),
                    head: b.head.clone(),
                });
            }
        }
        Quiver::new(self.vertices.clone(), arrows)
    }

    /// Deletes the arrows of the given disjoint 2-cycles.
    pub fn remove_two_cycles(&self, pairs: &[(ArrowId, ArrowId)]) -> Result<Quiver> {
        let mut used = BTreeSet::new();
        for (x, y) in pairs {
            let ax = self.arrow(x)?;
            let ay = self.arrow(y)?;
            if !(ax.head == ay.tail && ax.tail == ay.head) {
                return Err(Error::NotTwoCycle(format!("({x}, {y})")));
            }
            if !used.insert(x.clone()) || !used.insert(y.clone()) {
                return Err(Error::OverlappingPairs(format!("({x}, {y})")));
            }
        }
        let arrows = self
            .arrows
            .iter()
            .filter(|a| !used.contains(&a.id))
            .cloned()
            .collect();
        Quiver::new(self.vertices.clone(), arrows)
    }

    /// The canonical maximal disjoint collection of 2-cycles: candidate pairs
    /// sorted lexicographically by id, taken greedily.
    pub fn maximal_disjoint_two_cycles(&self) -> Vec<(ArrowId, ArrowId)> {
        let mut used: BTreeSet<ArrowId> = BTreeSet::new();
        let mut chosen = Vec::new();
        for (x, y) in self.two_cycles() {
            if !used.contains(&x) && !used.contains(&y) {
                used.insert(x.clone());
                used.insert(y.clone());
                chosen.push((x, y));
            }
        }
        chosen
    }

    /// Full quiver mutation: premutate, then remove the canonical maximal
    /// disjoint collection of 2-cycles.
    pub fn mutate(&self, k: &VertexId) -> Result<Quiver> {
        let pre = self.premutate(k)?;
        let pairs = pre.maximal_disjoint_two_cycles();
        pre.remove_two_cycles(&pairs)
    }

    /// Renames arrows; ids must stay unique.
    pub fn rename_arrows(&self, f: impl Fn(&ArrowId) -> ArrowId) -> Result<Quiver> {
        let arrows = self
            .arrows
            .iter()
            .map(|a| Arrow {
                id: f(&a.id),
                tail: a.tail.clone(),
                head: a.head.clone(),
            })
            .collect();
        Quiver::new(self.vertices.clone(), arrows)
    }

    /// Multiset of (id, tail, head) triples, for order-insensitive comparison.
    pub fn arrow_multiset(&self) -> BTreeSet<(String, String, String)> {
        self.arrows
            .iter()
            .map(|a| (a.id.0.clone(), a.tail.0.clone(), a.head.0.clone()))
            .collect()
    }
}

/// Strips the double-star suffix introduced by mutating twice at the same
/// vertex, identifying a** with a.
pub fn strip_double_star(id: &ArrowId) -> ArrowId {
    match id.0.strip_suffix("**") {
        Some(base) => ArrowId::new(base),
        None => id.clone(),
    }
}
