//! Combinatorial data of an orthogonal graph-manifold.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Permutation of the coordinate indices `0..n−1`; index 0 is the boundary
/// arclength coordinate, the rest are fibers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Permutation { images: (0..len).collect() }
    }

    /// Fails unless `images` is a bijection of `0..images.len()`.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = alloc::vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || core::mem::replace(&mut seen[i], true) {
                return Err(Error::Parse(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Permutation { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    /// `next ∘ self`: apply `self` first.
    pub fn then(&self, next: &Permutation) -> Permutation {
        Permutation { images: self.images.iter().map(|&i| next.images[i]).collect() }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = alloc::vec![0; self.images.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Coordinates seen from the other side: `out[self(i)] = coords[i]`.
    pub fn relabel(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; coords.len()];
        for (i, &c) in coords.iter().enumerate() {
            out[self.images[i]] = c;
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.images)
    }
}

/// Spec file contents before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSpec {
    pub n: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<RawEdge>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawEdge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub reverse: String,
    pub perm: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: String,
    pub detail: String,
}

impl Violation {
    fn new(kind: &str, detail: String) -> Self {
        Violation { kind: kind.into(), detail }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrientedEdge {
    pub id: String,
    pub from: usize,
    pub to: usize,
    pub reverse: usize,
    pub perm: Permutation,
}

/// A validated spec. Vertices and edges are referred to by index.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphManifoldSpec {
    pub n: usize,
    pub vertices: Vec<String>,
    pub edges: Vec<OrientedEdge>,
    /// Outgoing edges of each vertex in file order.
    pub boundary: Vec<Vec<usize>>,
}

/// Checks every invariant of the raw spec. Violations are listed in file order.
pub fn validate(raw: &RawSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if raw.n < 3 {
        out.push(Violation::new("dimension too small", format!("n = {} < 3", raw.n)));
    }
    let mut vertex_ids = BTreeMap::new();
    for (i, v) in raw.vertices.iter().enumerate() {
        if vertex_ids.insert(v.as_str(), i).is_some() {
            out.push(Violation::new("duplicate vertex", format!("vertex {v:?} listed twice")));
        }
    }
    if raw.vertices.is_empty() {
        out.push(Violation::new("empty graph", "no vertices".into()));
    }
    let mut edge_ids = BTreeMap::new();
    for (i, e) in raw.edges.iter().enumerate() {
        if edge_ids.insert(e.id.as_str(), i).is_some() {
            out.push(Violation::new("duplicate edge", format!("edge {:?} listed twice", e.id)));
        }
    }
    let width = raw.n.saturating_sub(1);
    for e in &raw.edges {
        for end in [&e.from, &e.to] {
            if !vertex_ids.contains_key(end.as_str()) {
                out.push(Violation::new("unknown vertex", format!("edge {:?} uses vertex {end:?}", e.id)));
            }
        }
        let perm = if e.perm.len() != width {
            out.push(Violation::new(
                "wrong permutation length",
                format!("edge {:?} has {} entries, expected {width}", e.id, e.perm.len()),
            ));
            None
        } else {
            match Permutation::new(e.perm.clone()) {
                Ok(p) => Some(p),
                Err(_) => {
                    out.push(Violation::new("not a permutation", format!("edge {:?}: {:?}", e.id, e.perm)));
                    None
                }
            }
        };
        if let Some(p) = &perm {
            if p.apply(0) == 0 {
                out.push(Violation::new("fixed base coordinate", format!("edge {:?} maps coordinate 0 to 0", e.id)));
            }
        }
        let Some(&r) = edge_ids.get(e.reverse.as_str()) else {
            out.push(Violation::new("unknown reverse", format!("edge {:?} names reverse {:?}", e.id, e.reverse)));
            continue;
        };
        let rev = &raw.edges[r];
        if rev.reverse != e.id || rev.from != e.to || rev.to != e.from {
            out.push(Violation::new(
                "non-involutive gluing",
                format!("edge {:?} and its reverse {:?} do not swap ends", e.id, rev.id),
            ));
            continue;
        }
        if let (Some(p), Ok(q)) = (&perm, Permutation::new(rev.perm.clone())) {
            if q.len() == p.len() && !p.then(&q).is_identity() {
                out.push(Violation::new(
                    "non-involutive gluing",
                    format!("permutations of {:?} and {:?} are not inverse", e.id, rev.id),
                ));
            }
        }
    }
    for v in &raw.vertices {
        if !raw.edges.iter().any(|e| &e.from == v) {
            out.push(Violation::new("isolated vertex", format!("vertex {v:?} has no boundary edges")));
        }
    }
    out
}

impl GraphManifoldSpec {
    pub fn from_raw(raw: &RawSpec) -> core::result::Result<Self, Vec<Violation>> {
        let violations = validate(raw);
        if !violations.is_empty() {
            return Err(violations);
        }
        let vid = |s: &str| raw.vertices.iter().position(|v| v == s).unwrap();
        let eid = |s: &str| raw.edges.iter().position(|e| e.id == s).unwrap();
        let edges: Vec<OrientedEdge> = raw
            .edges
            .iter()
            .map(|e| OrientedEdge {
                id: e.id.clone(),
                from: vid(&e.from),
                to: vid(&e.to),
                reverse: eid(&e.reverse),
                perm: Permutation::new(e.perm.clone()).unwrap(),
            })
            .collect();
        let boundary =
            (0..raw.vertices.len()).map(|v| (0..edges.len()).filter(|&i| edges[i].from == v).collect()).collect();
        Ok(GraphManifoldSpec { n: raw.n, vertices: raw.vertices.clone(), edges, boundary })
    }

    pub fn to_raw(&self) -> RawSpec {
        RawSpec {
            n: self.n,
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge {
                    id: e.id.clone(),
                    from: self.vertices[e.from].clone(),
                    to: self.vertices[e.to].clone(),
                    reverse: self.edges[e.reverse].id.clone(),
                    perm: e.perm.images().to_vec(),
                })
                .collect(),
        }
    }

    /// Number of coordinates per wall (arclength plus fibers).
    pub fn width(&self) -> usize {
        self.n - 1
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Composite permutation along a path of edges, last edge applied last.
    pub fn path_permutation(&self, path: &[usize]) -> Result<Permutation> {
        let mut p = Permutation::identity(self.width());
        for (i, &w) in path.iter().enumerate() {
            if i > 0 && self.edges[path[i - 1]].to != self.edges[w].from {
                return Err(Error::NotComposable(i));
            }
            p = p.then(&self.edges[w].perm);
        }
        Ok(p)
    }

    /// Explores all edge paths from vertex 0 up to `depth` steps and reports
    /// whether the coordinates `P⁻¹(0)` reached cover every index.
    pub fn check_irreducible(&self, depth: usize) -> Irreducibility {
        let mut witnesses: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        let start = (0usize, Permutation::identity(self.width()));
        seen.insert(start.clone());
        queue.push_back((start, Vec::new()));
        while let Some(((v, p), path)) = queue.pop_front() {
            witnesses.entry(p.inverse().apply(0)).or_insert_with(|| path.clone());
            if path.len() == depth {
                continue;
            }
            for &w in &self.boundary[v] {
                let next = (self.edges[w].to, p.then(&self.edges[w].perm));
                if seen.insert(next.clone()) {
                    let mut longer = path.clone();
                    longer.push(w);
                    queue.push_back((next, longer));
                }
            }
        }
        let missing: Vec<usize> = (0..self.width()).filter(|k| !witnesses.contains_key(k)).collect();
        let reason = if missing.is_empty() {
            None
        } else {
            Some(format!("coordinates {missing:?} never reach the base position within depth {depth}"))
        };
        Irreducibility {
            irreducible: missing.is_empty(),
            depth,
            witnesses: witnesses
                .into_iter()
                .map(|(coordinate, path)| Witness {
                    coordinate,
                    path: path.iter().map(|&w| self.edges[w].id.clone()).collect(),
                })
                .collect(),
            missing,
            reason,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub coordinate: usize,
    pub path: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Irreducibility {
    pub irreducible: bool,
    pub depth: usize,
    pub witnesses: Vec<Witness>,
    pub missing: Vec<usize>,
    pub reason: Option<String>,
}

/// Class key of a block reached with path permutation `p`: blocks `u`, `v` share
/// a class iff their keys agree (`P_v ∘ P_u⁻¹` fixes 0).
pub fn class_key(p: &Permutation) -> usize {
    p.inverse().apply(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    pub(crate) fn loop_spec(n: usize, perm: &[usize], rev: &[usize]) -> RawSpec {
        RawSpec {
            n,
            vertices: vec!["v".into()],
            edges: vec![
                RawEdge { id: "w".into(), from: "v".into(), to: "v".into(), reverse: "-w".into(), perm: perm.to_vec() },
                RawEdge { id: "-w".into(), from: "v".into(), to: "v".into(), reverse: "w".into(), perm: rev.to_vec() },
            ],
        }
    }

    #[test]
    fn transposition_loop_is_valid() {
        assert!(validate(&loop_spec(3, &[1, 0], &[1, 0])).is_empty());
    }

    #[test]
    fn fixed_base_coordinate_is_reported() {
        let v = validate(&loop_spec(4, &[0, 2, 1], &[0, 2, 1]));
        assert_eq!(v.iter().filter(|x| x.kind == "fixed base coordinate").count(), 2);
    }

    #[test]
    fn mismatched_reverse_is_reported() {
        let v = validate(&loop_spec(4, &[1, 2, 0], &[1, 2, 0]));
        assert!(v.iter().any(|x| x.kind == "non-involutive gluing"), "{v:?}");
        let mut raw = loop_spec(3, &[1, 0], &[1, 0]);
        raw.edges[1].reverse = "-w".into();
        assert!(validate(&raw).iter().any(|x| x.kind == "non-involutive gluing"));
    }

    #[test]
    fn malformed_permutations_are_reported() {
        let v = validate(&loop_spec(4, &[1, 1, 0], &[1, 0]));
        let kinds: Vec<String> = v.iter().map(|x| x.kind.to_string()).collect();
        assert!(kinds.contains(&"not a permutation".to_string()));
        assert!(kinds.contains(&"wrong permutation length".to_string()));
    }

    #[test]
    fn path_permutation_composes_in_order() {
        let spec = GraphManifoldSpec::from_raw(&loop_spec(4, &[1, 2, 0], &[2, 0, 1])).unwrap();
        assert!(spec.path_permutation(&[]).unwrap().is_identity());
        assert!(spec.path_permutation(&[0, 1]).unwrap().is_identity());
        let p = spec.path_permutation(&[0, 0]).unwrap();
        let s = &spec.edges[0].perm;
        for i in 0..3 {
            assert_eq!(p.apply(i), s.apply(s.apply(i)));
        }
    }

    #[test]
    fn non_composable_path_is_rejected() {
        let raw = RawSpec {
            n: 3,
            vertices: vec!["a".into(), "b".into()],
            edges: vec![
                RawEdge { id: "e".into(), from: "a".into(), to: "b".into(), reverse: "f".into(), perm: vec![1, 0] },
                RawEdge { id: "f".into(), from: "b".into(), to: "a".into(), reverse: "e".into(), perm: vec![1, 0] },
            ],
        };
        let spec = GraphManifoldSpec::from_raw(&raw).unwrap();
        assert_eq!(spec.path_permutation(&[0, 0]), Err(Error::NotComposable(1)));
        assert!(spec.path_permutation(&[0, 1]).unwrap().is_identity());
    }

    #[test]
    fn irreducibility_verdicts() {
        let flip = GraphManifoldSpec::from_raw(&loop_spec(3, &[1, 0], &[1, 0])).unwrap();
        assert!(flip.check_irreducible(1).irreducible);
        let cycle = GraphManifoldSpec::from_raw(&loop_spec(4, &[1, 2, 0], &[2, 0, 1])).unwrap();
        assert!(cycle.check_irreducible(2).irreducible);
        let split = GraphManifoldSpec::from_raw(&loop_spec(4, &[1, 0, 2], &[1, 0, 2])).unwrap();
        let verdict = split.check_irreducible(10);
        assert!(!verdict.irreducible);
        assert_eq!(verdict.missing, vec![2]);
        assert!(verdict.reason.is_some());
    }

    #[test]
    fn classes_along_forward_loops() {
        // Repeating the 3-cycle: the class is the depth mod 3.
        let cycle = GraphManifoldSpec::from_raw(&loop_spec(4, &[1, 2, 0], &[2, 0, 1])).unwrap();
        let keys: Vec<usize> =
            (0..7).map(|d| class_key(&cycle.path_permutation(&vec![0; d]).unwrap())).collect();
        for d in 0..7 {
            for e in 0..7 {
                assert_eq!(keys[d] == keys[e], d % 3 == e % 3);
            }
        }
        let flip = GraphManifoldSpec::from_raw(&loop_spec(3, &[1, 0], &[1, 0])).unwrap();
        for d in 0..6 {
            assert_eq!(class_key(&flip.path_permutation(&vec![0; d]).unwrap()), d % 2);
        }
    }
}
