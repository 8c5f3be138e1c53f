//! Finite truncation of the universal cover: blocks `H₀ × ℝⁿ⁻²` glued along
//! walls by coordinate permutations.

mod point;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{BoundaryComponent, BoundaryCoordinate, H0Point, ThetaTree};
use crate::manifold::{class_key, GraphManifoldSpec, Permutation};

pub use point::{CoverPoint, SampleConfig, DEFAULT_FIBER_RANGE};

/// Extra hexagon depth available to distance computations beyond `hex_depth`.
pub const DEFAULT_ADDRESS_SLACK: usize = 12;

/// One step of a block id: the edge crossed and the canonical index of the
/// boundary component of the parent it was crossed through.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Step {
    pub edge: usize,
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub steps: Vec<Step>,
    pub g_vertex: usize,
    pub rank: usize,
    pub parent: Option<usize>,
    /// Component of this block glued to the parent.
    pub parent_component: Option<BoundaryComponent>,
    /// Composite gluing permutation from the root block.
    pub path_perm: Permutation,
    /// Children keyed by the canonical index of the component they hang off.
    pub children: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Wall {
    pub lower: usize,
    pub lower_component: BoundaryComponent,
    pub upper: usize,
    pub upper_component: BoundaryComponent,
    /// G-edge crossed going from lower to upper.
    pub edge: usize,
    pub perm: Permutation,
}

/// Which side of a wall a block is on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// A wall of a chain together with the direction it is crossed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainStep {
    pub wall: usize,
    /// True when crossed from the lower block to the upper block.
    pub upward: bool,
}

impl ChainStep {
    pub fn entry_side(&self) -> Side {
        if self.upward {
            Side::Lower
        } else {
            Side::Upper
        }
    }

    pub fn exit_side(&self) -> Side {
        if self.upward {
            Side::Upper
        } else {
            Side::Lower
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Depths {
    pub t0_depth: usize,
    pub hex_depth: usize,
    pub address_depth: usize,
}

impl Depths {
    pub fn new(t0_depth: usize, hex_depth: usize) -> Self {
        Depths { t0_depth, hex_depth, address_depth: hex_depth + DEFAULT_ADDRESS_SLACK }
    }
}

#[derive(Clone, Debug)]
pub struct CoverComplex {
    pub spec: GraphManifoldSpec,
    pub depths: Depths,
    pub blocks: Vec<Block>,
    /// Wall `i` joins block `i + 1` to its parent.
    pub walls: Vec<Wall>,
    pub tree: ThetaTree,
    index: BTreeMap<Vec<Step>, usize>,
}

impl CoverComplex {
    /// Builds all blocks of rank ≤ `t0_depth`, with children across every
    /// boundary component meeting hexagons of depth ≤ `hex_depth`.
    pub fn explore(spec: &GraphManifoldSpec, depths: Depths) -> Result<Self> {
        if depths.hex_depth == 0 {
            return Err(Error::InvalidParameter("hex_depth must be at least 1".into()));
        }
        if depths.address_depth < depths.hex_depth {
            return Err(Error::InvalidParameter("address_depth must be at least hex_depth".into()));
        }
        let components = BoundaryComponent::count_within(depths.hex_depth);
        if spec.boundary.iter().any(|b| b.len() > components) {
            return Err(Error::InvalidParameter(format!(
                "hex_depth {} has only {components} boundary components per block",
                depths.hex_depth
            )));
        }
        let mut complex = CoverComplex {
            spec: spec.clone(),
            depths,
            blocks: Vec::new(),
            walls: Vec::new(),
            tree: ThetaTree::new(depths.address_depth),
            index: BTreeMap::new(),
        };
        complex.push_block(Block {
            steps: Vec::new(),
            g_vertex: 0,
            rank: 0,
            parent: None,
            parent_component: None,
            path_perm: Permutation::identity(spec.width()),
            children: BTreeMap::new(),
        });
        let mut next = 0;
        while next < complex.blocks.len() {
            let b = next;
            next += 1;
            if complex.blocks[b].rank >= depths.t0_depth {
                continue;
            }
            let skip = complex.blocks[b].parent_component.as_ref().map(|c| c.index());
            for i in (0..components).filter(|&i| Some(i) != skip) {
                complex.add_child(b, i);
            }
        }
        Ok(complex)
    }

    fn push_block(&mut self, block: Block) -> usize {
        let id = self.blocks.len();
        self.index.insert(block.steps.clone(), id);
        self.blocks.push(block);
        id
    }

    fn add_child(&mut self, parent: usize, component: usize) {
        let p = &self.blocks[parent];
        let edge = self.label(p.g_vertex, component);
        let e = &self.spec.edges[edge];
        let to = e.to;
        let back = self.first_component_labelled(to, e.reverse);
        let mut steps = p.steps.clone();
        steps.push(Step { edge, component });
        let child = Block {
            steps,
            g_vertex: to,
            rank: p.rank + 1,
            parent: Some(parent),
            parent_component: Some(BoundaryComponent::from_index(back)),
            path_perm: p.path_perm.then(&e.perm),
            children: BTreeMap::new(),
        };
        let perm = e.perm.clone();
        let id = self.push_block(child);
        self.blocks[parent].children.insert(component, id);
        self.walls.push(Wall {
            lower: parent,
            lower_component: BoundaryComponent::from_index(component),
            upper: id,
            upper_component: BoundaryComponent::from_index(back),
            edge,
            perm,
        });
    }

    /// Edge label of the component with canonical index `component` in a block
    /// over `g_vertex`: round-robin over the vertex's boundary edges.
    pub fn label(&self, g_vertex: usize, component: usize) -> usize {
        let edges = &self.spec.boundary[g_vertex];
        edges[component % edges.len()]
    }

    fn first_component_labelled(&self, g_vertex: usize, edge: usize) -> usize {
        self.spec.boundary[g_vertex].iter().position(|&e| e == edge).expect("reverse edge leaves its target")
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, b: usize) -> &Block {
        &self.blocks[b]
    }

    pub fn wall_to_parent(&self, b: usize) -> Option<usize> {
        b.checked_sub(1)
    }

    /// Wall through component `c` of block `b`, if explored.
    pub fn wall_at(&self, b: usize, c: &BoundaryComponent) -> Option<(usize, Side)> {
        let block = &self.blocks[b];
        if block.parent_component.as_ref() == Some(c) {
            return Some((b - 1, Side::Upper));
        }
        block.children.get(&c.index()).map(|&child| (child - 1, Side::Lower))
    }

    pub fn block_by_steps(&self, steps: &[Step]) -> Option<usize> {
        self.index.get(steps).copied()
    }

    pub fn block_name(&self, b: usize) -> String {
        let parts: Vec<String> = self.blocks[b]
            .steps
            .iter()
            .map(|s| format!("{}@{}", self.spec.edges[s.edge].id, s.component))
            .collect();
        parts.join("/")
    }

    pub fn block_by_name(&self, name: &str) -> Result<usize> {
        let mut steps = Vec::new();
        for part in name.split('/').filter(|s| !s.is_empty()) {
            let (edge, comp) =
                part.rsplit_once('@').ok_or_else(|| Error::Parse(format!("bad block step {part:?}")))?;
            let edge = self.spec.edge_index(edge).ok_or_else(|| Error::Parse(format!("unknown edge {edge:?}")))?;
            let component = comp.parse().map_err(|_| Error::Parse(format!("bad component in {part:?}")))?;
            steps.push(Step { edge, component });
        }
        self.block_by_steps(&steps).ok_or_else(|| Error::Unexplored(name.to_string()))
    }

    /// Blocks from `b` up to the root, starting with `b`.
    pub fn ancestors(&self, mut b: usize) -> Vec<usize> {
        let mut out = alloc::vec![b];
        while let Some(p) = self.blocks[b].parent {
            out.push(p);
            b = p;
        }
        out
    }

    pub fn lowest_common_ancestor(&self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (a, b);
        while self.blocks[a].rank > self.blocks[b].rank {
            a = self.blocks[a].parent.unwrap();
        }
        while self.blocks[b].rank > self.blocks[a].rank {
            b = self.blocks[b].parent.unwrap();
        }
        while a != b {
            a = self.blocks[a].parent.unwrap();
            b = self.blocks[b].parent.unwrap();
        }
        a
    }

    pub fn block_distance_in_tree(&self, a: usize, b: usize) -> usize {
        let l = self.lowest_common_ancestor(a, b);
        self.blocks[a].rank + self.blocks[b].rank - 2 * self.blocks[l].rank
    }

    /// Walls along the tree path from `a` to `b`, in order.
    pub fn wall_chain(&self, a: usize, b: usize) -> Vec<ChainStep> {
        let l = self.lowest_common_ancestor(a, b);
        let mut out = Vec::new();
        let mut x = a;
        while x != l {
            out.push(ChainStep { wall: x - 1, upward: false });
            x = self.blocks[x].parent.unwrap();
        }
        let mut down = Vec::new();
        let mut y = b;
        while y != l {
            down.push(ChainStep { wall: y - 1, upward: true });
            y = self.blocks[y].parent.unwrap();
        }
        out.extend(down.into_iter().rev());
        out
    }

    /// Blocks visited by a chain starting at `a`.
    pub fn chain_blocks(&self, a: usize, chain: &[ChainStep]) -> Vec<usize> {
        let mut out = alloc::vec![a];
        for s in chain {
            let w = &self.walls[s.wall];
            out.push(if s.upward { w.upper } else { w.lower });
        }
        out
    }

    pub fn wall_side_block(&self, wall: usize, side: Side) -> usize {
        let w = &self.walls[wall];
        match side {
            Side::Lower => w.lower,
            Side::Upper => w.upper,
        }
    }

    pub fn wall_component(&self, wall: usize, side: Side) -> &BoundaryComponent {
        let w = &self.walls[wall];
        match side {
            Side::Lower => &w.lower_component,
            Side::Upper => &w.upper_component,
        }
    }

    /// For each coordinate of the given side (0 = arclength, then fibers), the
    /// index of the matching coordinate in the wall's lower frame.
    pub fn side_indices(&self, wall: usize, side: Side) -> Vec<usize> {
        let w = &self.walls[wall];
        match side {
            Side::Lower => (0..w.perm.len()).collect(),
            Side::Upper => {
                let inv = w.perm.inverse();
                (0..w.perm.len()).map(|m| inv.apply(m)).collect()
            }
        }
    }

    /// Point of a wall from lower-frame coordinates, represented in the block on `side`.
    pub fn wall_point(&self, wall: usize, side: Side, lower: &[f64]) -> Result<CoverPoint> {
        let idx = self.side_indices(wall, side);
        let coords: Vec<f64> = idx.iter().map(|&i| lower[i]).collect();
        let component = self.wall_component(wall, side).clone();
        let base = self.tree.boundary_point(&BoundaryCoordinate { component, arclength: coords[0] })?;
        Ok(CoverPoint { block: self.wall_side_block(wall, side), base, fiber: coords[1..].to_vec() })
    }

    /// Lower-frame coordinates of a point of a wall represented on either side.
    pub fn wall_coordinates(&self, wall: usize, p: &CoverPoint) -> Result<Vec<f64>> {
        let side = if p.block == self.walls[wall].lower {
            Side::Lower
        } else if p.block == self.walls[wall].upper {
            Side::Upper
        } else {
            return Err(Error::NotOnWall);
        };
        let bc = self.tree.boundary_param(&p.base).map_err(|_| Error::NotOnWall)?;
        if &bc.component != self.wall_component(wall, side) {
            return Err(Error::NotOnWall);
        }
        let idx = self.side_indices(wall, side);
        let mut lower = alloc::vec![0.0; idx.len()];
        lower[idx[0]] = bc.arclength;
        for (j, &f) in p.fiber.iter().enumerate() {
            lower[idx[j + 1]] = f;
        }
        Ok(lower)
    }

    /// The same wall point seen from the other block.
    pub fn cross_wall(&self, p: &CoverPoint, wall: usize) -> Result<CoverPoint> {
        let lower = self.wall_coordinates(wall, p)?;
        let other = if p.block == self.walls[wall].lower { Side::Upper } else { Side::Lower };
        self.wall_point(wall, other, &lower)
    }

    /// Representation in the lowest-rank block containing the point.
    pub fn normalize(&self, p: &CoverPoint) -> CoverPoint {
        let mut cur = CoverPoint { block: p.block, base: self.tree.normalize(&p.base), fiber: p.fiber.clone() };
        while let Some(c) = &self.blocks[cur.block].parent_component {
            let on_parent = self.tree.boundary_param(&cur.base).map(|bc| &bc.component == c).unwrap_or(false);
            if !on_parent {
                break;
            }
            match self.cross_wall(&cur, cur.block - 1) {
                Ok(q) => cur = CoverPoint { base: self.tree.normalize(&q.base), ..q },
                Err(_) => break,
            }
        }
        cur
    }

    /// Class key of a block (see [`class_key`]).
    pub fn block_class_key(&self, b: usize) -> usize {
        class_key(&self.blocks[b].path_perm)
    }

    /// Checks the structural invariants; returns the first failure.
    pub fn check_invariants(&self) -> core::result::Result<(), String> {
        if self.blocks.len() != self.walls.len() + 1 {
            return Err("blocks != walls + 1".into());
        }
        for (i, w) in self.walls.iter().enumerate() {
            if w.upper != i + 1 || self.blocks[w.upper].parent != Some(w.lower) {
                return Err(format!("wall {i} does not join block {} to its parent", i + 1));
            }
            let rev = &self.spec.edges[self.spec.edges[w.edge].reverse].perm;
            if !w.perm.then(rev).is_identity() {
                return Err(format!("wall {i} permutations are not inverse"));
            }
            if self.label(self.blocks[w.upper].g_vertex, w.upper_component.index()) != self.spec.edges[w.edge].reverse {
                return Err(format!("wall {i} upper label is not the reverse edge"));
            }
            if self.label(self.blocks[w.lower].g_vertex, w.lower_component.index()) != w.edge {
                return Err(format!("wall {i} lower label mismatch"));
            }
        }
        Ok(())
    }

    pub fn summary(&self) -> ComplexSummary {
        let components = BoundaryComponent::count_within(self.depths.hex_depth);
        ComplexSummary {
            n: self.spec.n,
            depths: self.depths,
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(i, b)| BlockSummary {
                    id: self.block_name(i),
                    g_vertex: self.spec.vertices[b.g_vertex].clone(),
                    rank: b.rank,
                    parent: b.parent.map(|p| self.block_name(p)),
                    parent_component: b.parent_component.as_ref().map(|c| c.index()),
                    path_perm: b.path_perm.images().to_vec(),
                    labels: (0..components).map(|c| self.spec.edges[self.label(b.g_vertex, c)].id.clone()).collect(),
                })
                .collect(),
            walls: self
                .walls
                .iter()
                .map(|w| WallSummary {
                    lower: self.block_name(w.lower),
                    lower_component: w.lower_component.index(),
                    upper: self.block_name(w.upper),
                    upper_component: w.upper_component.index(),
                    edge: self.spec.edges[w.edge].id.clone(),
                    perm: w.perm.images().to_vec(),
                    offset: 0,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSummary {
    pub n: usize,
    pub depths: Depths,
    pub blocks: Vec<BlockSummary>,
    pub walls: Vec<WallSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub id: String,
    pub g_vertex: String,
    pub rank: usize,
    pub parent: Option<String>,
    pub parent_component: Option<usize>,
    pub path_perm: Vec<usize>,
    /// Edge label of each canonical boundary component within `hex_depth`.
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WallSummary {
    pub lower: String,
    pub lower_component: usize,
    pub upper: String,
    pub upper_component: usize,
    pub edge: String,
    pub perm: Vec<usize>,
    pub offset: i64,
}

/// Convenience for tests and callers holding a point as a base plus fibers.
pub fn point_on_boundary(tree: &ThetaTree, block: usize, component: &BoundaryComponent, t: f64, fiber: Vec<f64>) -> Result<CoverPoint> {
    let base: H0Point = tree.boundary_point(&BoundaryCoordinate { component: component.clone(), arclength: t })?;
    Ok(CoverPoint { block, base, fiber })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::manifold::{RawEdge, RawSpec};
    use alloc::vec;

    pub(crate) fn loop_spec(n: usize, perm: &[usize], rev: &[usize]) -> GraphManifoldSpec {
        GraphManifoldSpec::from_raw(&RawSpec {
            n,
            vertices: vec!["v".into()],
            edges: vec![
                RawEdge { id: "w".into(), from: "v".into(), to: "v".into(), reverse: "-w".into(), perm: perm.to_vec() },
                RawEdge { id: "-w".into(), from: "v".into(), to: "v".into(), reverse: "w".into(), perm: rev.to_vec() },
            ],
        })
        .unwrap()
    }

    pub(crate) fn flip() -> GraphManifoldSpec {
        loop_spec(3, &[1, 0], &[1, 0])
    }

    #[test]
    fn depth_zero_is_a_single_block() {
        let c = CoverComplex::explore(&flip(), Depths::new(0, 2)).unwrap();
        assert_eq!(c.block_count(), 1);
        assert!(c.walls.is_empty());
        assert!(CoverComplex::explore(&flip(), Depths::new(1, 0)).is_err());
    }

    #[test]
    fn block_counts_follow_the_component_count() {
        let c = CoverComplex::explore(&flip(), Depths::new(1, 2)).unwrap();
        assert_eq!(c.block_count(), 13);
        assert!(c.walls.iter().all(|w| w.perm.images() == [1, 0]));
        let c = CoverComplex::explore(&flip(), Depths::new(2, 4)).unwrap();
        assert_eq!(c.block_count(), 1 + 48 + 48 * 47);
        c.check_invariants().unwrap();
    }

    #[test]
    fn wall_chains_telescope() {
        let c = CoverComplex::explore(&flip(), Depths::new(2, 2)).unwrap();
        let a = *c.blocks[1].children.values().next().unwrap();
        let b = 2;
        assert_eq!(c.block_by_name(&c.block_name(a)), Ok(a));
        let chain = c.wall_chain(a, b);
        assert_eq!(chain.len(), 3);
        assert_eq!(c.block_distance_in_tree(a, b), 3);
        let blocks = c.chain_blocks(a, &chain);
        assert_eq!(*blocks.last().unwrap(), b);
        for (s, pair) in chain.iter().zip(blocks.windows(2)) {
            assert_eq!(c.wall_side_block(s.wall, s.entry_side()), pair[0]);
            assert_eq!(c.wall_side_block(s.wall, s.exit_side()), pair[1]);
        }
        assert!(c.wall_chain(a, a).is_empty());
        let parent = c.blocks[a].parent.unwrap();
        assert_eq!(c.wall_chain(parent, a), vec![ChainStep { wall: a - 1, upward: true }]);
    }

    #[test]
    fn crossing_swaps_arclength_and_fiber() {
        let c = CoverComplex::explore(&flip(), Depths::new(1, 2)).unwrap();
        let wall = 4;
        let w = &c.walls[wall];
        let p = point_on_boundary(&c.tree, w.lower, &w.lower_component, 0.75, vec![-2.0]).unwrap();
        let q = c.cross_wall(&p, wall).unwrap();
        assert_eq!(q.block, w.upper);
        let bc = c.tree.boundary_param(&q.base).unwrap();
        assert_eq!(bc.component, w.upper_component);
        assert!((bc.arclength + 2.0).abs() < 1e-10);
        assert!((q.fiber[0] - 0.75).abs() < 1e-10);
        let back = c.cross_wall(&q, wall).unwrap();
        assert!(c.tree.distance(&back.base, &p.base) < 1e-10);
        assert!((back.fiber[0] - p.fiber[0]).abs() < 1e-10);
        assert_eq!(c.normalize(&q).block, w.lower);
        let n = c.normalize(&q);
        assert_eq!(c.normalize(&n), n);
    }

    #[test]
    fn labels_are_round_robin() {
        let spec = loop_spec(4, &[1, 2, 0], &[2, 0, 1]);
        let c = CoverComplex::explore(&spec, Depths::new(1, 2)).unwrap();
        let labels: Vec<usize> = (0..12).map(|i| c.label(0, i)).collect();
        for window in labels.windows(2) {
            let mut w = window.to_vec();
            w.sort();
            assert_eq!(w, vec![0, 1]);
        }
    }
}
