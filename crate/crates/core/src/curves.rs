//! Explicit curves whose length is controlled by the product distance.
//!
//! Starting from the endpoint in the higher-rank block, the curve walks to
//! the embedded tree of its hexagon, follows the lifted `T_c` geodesic to the
//! boundary line facing the parent block, steps onto that line and recurses
//! from the parent. Once both ends share a block it closes with a geodesic.

use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::cover::{CoverComplex, CoverPoint};
use crate::error::{Error, Result};
use crate::geodesic::block_distance;
use crate::hyperbolic::{tbin_path, BoundaryCoordinate};
use crate::trees::{entry_point, phi_c, ClassSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Segment {
    /// Geodesic between two points of one block.
    Geodesic { from: CoverPoint, to: CoverPoint },
    /// Polyline along the embedded tree of one block at fixed fibers.
    Lifted { points: Vec<CoverPoint> },
}

impl Segment {
    pub fn start(&self) -> &CoverPoint {
        match self {
            Segment::Geodesic { from, .. } => from,
            Segment::Lifted { points } => &points[0],
        }
    }

    pub fn end(&self) -> &CoverPoint {
        match self {
            Segment::Geodesic { to, .. } => to,
            Segment::Lifted { points } => points.last().unwrap(),
        }
    }

    fn reversed(self) -> Segment {
        match self {
            Segment::Geodesic { from, to } => Segment::Geodesic { from: to, to: from },
            Segment::Lifted { mut points } => {
                points.reverse();
                Segment::Lifted { points }
            }
        }
    }

    pub fn length(&self, complex: &CoverComplex) -> f64 {
        match self {
            Segment::Geodesic { from, to } => block_distance(&complex.tree, from, to).expect("segment lies in one block"),
            Segment::Lifted { points } => points.windows(2).map(|w| complex.tree.distance(&w[0].base, &w[1].base)).sum(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockPath {
    pub segments: Vec<Segment>,
}

pub fn curve_length(complex: &CoverComplex, path: &BlockPath) -> f64 {
    path.segments.iter().map(|s| s.length(complex)).sum()
}

/// Measurements of one inductive step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub block: usize,
    pub class: usize,
    /// From the current point to its projection onto the embedded tree.
    pub to_tree: f64,
    /// Length of the lifted tree path.
    pub lifted: f64,
    /// Tree length of that path in `T_c`.
    pub tree_length: f64,
    /// From the end of the lifted path to the wall point.
    pub to_wall: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecialCurve {
    pub path: BlockPath,
    pub steps: Vec<StepRecord>,
}

pub fn build_special_curve(complex: &CoverComplex, classes: &ClassSystem, x: &CoverPoint, y: &CoverPoint) -> Result<SpecialCurve> {
    let mut a = complex.normalize(x);
    let mut b = complex.normalize(y);
    let guard = complex.block_distance_in_tree(a.block, b.block);
    let mut head = Vec::new();
    let mut tail = Vec::new();
    let mut steps = Vec::new();
    while a.block != b.block {
        if steps.len() >= guard {
            return Err(Error::InvalidParameter("special curve did not shorten the wall chain".into()));
        }
        let (ra, rb) = (complex.blocks[a.block].rank, complex.blocks[b.block].rank);
        let move_a = match ra.cmp(&rb) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => complex.block_name(a.block) <= complex.block_name(b.block),
        };
        if move_a {
            a = step(complex, classes, &a, &b, &mut head, &mut steps)?;
        } else {
            b = step(complex, classes, &b, &a, &mut tail, &mut steps)?;
        }
    }
    head.push(Segment::Geodesic { from: a, to: b });
    head.extend(tail.into_iter().rev().map(Segment::reversed));
    Ok(SpecialCurve { path: BlockPath { segments: head }, steps })
}

/// One inductive step from `p` (higher rank) toward `q`; returns the new
/// point in the parent block.
fn step(
    complex: &CoverComplex,
    classes: &ClassSystem,
    p: &CoverPoint,
    q: &CoverPoint,
    out: &mut Vec<Segment>,
    steps: &mut Vec<StepRecord>,
) -> Result<CoverPoint> {
    let tree = &complex.tree;
    let rho = tree.rho();
    let v = p.block;
    let class = classes.class_of(v);
    let component = complex.blocks[v].parent_component.clone().expect("higher-rank block has a parent");
    let start = tree.retract(&p.base);
    let target = phi_c(complex, classes, class, q)?;
    let (exit, _) = entry_point(complex, classes, class, &target, v)?;
    let (sigma, _) = component.gate(&exit, rho);
    let at = |base| CoverPoint { block: v, base, fiber: p.fiber.clone() };
    let polyline: Vec<CoverPoint> =
        tbin_path(&start, &exit, rho).iter().map(|t| tree.lift(t).map(at)).collect::<Result<_>>()?;
    let x0 = polyline[0].clone();
    let x1 = polyline.last().unwrap().clone();
    let wall_base = tree.boundary_point(&BoundaryCoordinate { component, arclength: sigma / (2.0 * rho) })?;
    let x2 = at(wall_base);
    let lifted = Segment::Lifted { points: polyline };
    let record = StepRecord {
        block: v,
        class,
        to_tree: block_distance(tree, p, &x0)?,
        lifted: lifted.length(complex),
        tree_length: crate::hyperbolic::tbin_distance(&start, &exit, rho),
        to_wall: block_distance(tree, &x1, &x2)?,
    };
    out.push(Segment::Geodesic { from: p.clone(), to: x0 });
    out.push(lifted);
    out.push(Segment::Geodesic { from: x1, to: x2.clone() });
    steps.push(record);
    let next = complex.normalize(&x2);
    debug_assert_eq!(Some(next.block), complex.blocks[v].parent);
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::tests::flip;
    use crate::cover::{Depths, SampleConfig};
    use crate::geodesic::{distance, SolverOptions};
    use crate::trees::{phi, product_distance};

    #[test]
    fn same_block_curve_is_the_geodesic() {
        let c = CoverComplex::explore(&flip(), Depths::new(1, 2)).unwrap();
        let classes = ClassSystem::new(&c);
        let cfg = SampleConfig { seed: 4, fiber_range: 8.0 };
        let x = c.sample_point(&cfg, 0);
        let y = CoverPoint { block: x.block, ..c.sample_point(&cfg, 1) };
        let curve = build_special_curve(&c, &classes, &x, &y).unwrap();
        assert_eq!(curve.path.segments.len(), 1);
        assert_eq!(curve_length(&c, &curve.path), block_distance(&c.tree, &x, &y).unwrap());
        assert_eq!(curve_length(&c, &BlockPath::default()), 0.0);
    }

    #[test]
    fn curves_connect_their_endpoints_and_respect_the_bound() {
        let c = CoverComplex::explore(&flip(), Depths::new(2, 3)).unwrap();
        let classes = ClassSystem::new(&c);
        let delta = c.tree.delta();
        let cfg = SampleConfig { seed: 8, fiber_range: 8.0 };
        for i in 0..40 {
            let x = c.sample_point(&cfg, 2 * i);
            let y = c.sample_point(&cfg, 2 * i + 1);
            let curve = build_special_curve(&c, &classes, &x, &y).unwrap();
            let segs = &curve.path.segments;
            assert_eq!(segs[0].start(), &c.normalize(&x));
            assert_eq!(segs.last().unwrap().end(), &c.normalize(&y));
            for w in segs.windows(2) {
                // Steps hand over at a wall point, represented in either block.
                let (e, s) = (c.normalize(w[0].end()), c.normalize(w[1].start()));
                assert_eq!(e.block, s.block);
                assert!(c.tree.distance(&e.base, &s.base) < 1e-9);
                assert_eq!(e.fiber, s.fiber);
            }
            for r in &curve.steps {
                assert!(r.to_tree <= delta && r.to_wall <= delta, "{r:?}");
                assert!(r.lifted <= r.tree_length + 1e-9, "{r:?}");
            }
            let len = curve_length(&c, &curve.path);
            let d = distance(&c, &x, &y, SolverOptions::default()).unwrap().distance;
            let e = product_distance(&c, &classes, &phi(&c, &classes, &x).unwrap(), &phi(&c, &classes, &y).unwrap()).unwrap();
            assert!(d <= len + 1e-6, "d {d} len {len}");
            assert!(len <= (2.0 * delta + 1.0) * e + 2.0 * delta + 0.07, "len {len} e {e}");
        }
    }
}
