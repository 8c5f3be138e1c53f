//! The trees `T₀` and `T_c` and the maps into them.
//!
//! `T_c` glues one piece per block: the binary tree `T_v` when the block is
//! in class `c`, otherwise a line carrying one fiber coordinate. Lines are
//! metrized as `2ρ·|Δt|` so that each wall identification of a line with a
//! boundary line of some `T_v` is an isometry and the result is a tree.
//! Distances are evaluated along the block chain between the two owners.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::cover::{CoverComplex, CoverPoint};
use crate::error::{Error, Result};
use crate::hyperbolic::{tbin_distance, TbinPoint};

/// Classes of blocks: `u ~ v` when the composite permutation between them
/// fixes the base coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassSystem {
    /// Class key of every block.
    pub block_keys: Vec<usize>,
    /// Keys that occur, in increasing order; class `i` has key `keys[i]`.
    pub keys: Vec<usize>,
    /// First block (in exploration order) of each class.
    pub representatives: Vec<usize>,
}

impl ClassSystem {
    pub fn new(complex: &CoverComplex) -> Self {
        let block_keys: Vec<usize> = (0..complex.block_count()).map(|b| complex.block_class_key(b)).collect();
        let mut keys = block_keys.clone();
        keys.sort_unstable();
        keys.dedup();
        let representatives = keys.iter().map(|k| block_keys.iter().position(|x| x == k).unwrap()).collect();
        ClassSystem { block_keys, keys, representatives }
    }

    pub fn count(&self) -> usize {
        self.keys.len()
    }

    pub fn class_of(&self, block: usize) -> usize {
        self.keys.binary_search(&self.block_keys[block]).unwrap()
    }

    pub fn contains(&self, class: usize, block: usize) -> bool {
        self.block_keys[block] == self.keys[class]
    }

    /// Coordinate of `block` read by class `class` (0 exactly for members).
    pub fn coordinate(&self, complex: &CoverComplex, class: usize, block: usize) -> usize {
        complex.blocks[block].path_perm.apply(self.keys[class])
    }

    /// Blocks grouped by class.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); self.count()];
        for b in 0..self.block_keys.len() {
            out[self.class_of(b)].push(b);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TcPoint {
    /// Point of the binary tree of a member block.
    Tree { owner: usize, point: TbinPoint },
    /// Value of the class's coordinate in a non-member block.
    Line { owner: usize, value: f64 },
}

impl TcPoint {
    pub fn owner(&self) -> usize {
        match self {
            TcPoint::Tree { owner, .. } | TcPoint::Line { owner, .. } => *owner,
        }
    }
}

/// Distance from a point of `T_c` to the points of a line piece:
/// `t ↦ floor + slope·|t − apex|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceProfile {
    pub apex: f64,
    pub floor: f64,
    pub slope: f64,
}

impl DistanceProfile {
    pub fn eval(&self, t: f64) -> f64 {
        self.floor + self.slope * (t - self.apex).abs()
    }
}

/// Where the propagation stands inside the current block.
#[derive(Clone, Debug, PartialEq)]
enum Front {
    Tree { point: TbinPoint, base: f64 },
    Line(DistanceProfile),
}

/// Lowest-rank block containing the point.
pub fn phi0(complex: &CoverComplex, x: &CoverPoint) -> usize {
    complex.normalize(x).block
}

pub fn phi_c(complex: &CoverComplex, classes: &ClassSystem, class: usize, x: &CoverPoint) -> Result<TcPoint> {
    if class >= classes.count() {
        return Err(Error::UnknownClass(class));
    }
    let x = complex.normalize(x);
    let owner = x.block;
    if classes.contains(class, owner) {
        Ok(TcPoint::Tree { owner, point: complex.tree.retract(&x.base) })
    } else {
        let k = classes.coordinate(complex, class, owner);
        Ok(TcPoint::Line { owner, value: x.fiber[k - 1] })
    }
}

/// Exact distance in `T_c`.
pub fn tc_distance(complex: &CoverComplex, classes: &ClassSystem, class: usize, a: &TcPoint, b: &TcPoint) -> Result<f64> {
    let front = propagate(complex, classes, class, a, b.owner())?;
    let rho = complex.tree.rho();
    Ok(match (front, b) {
        (Front::Tree { point, base }, TcPoint::Tree { point: q, .. }) => base + tbin_distance(&point, q, rho),
        (Front::Line(profile), TcPoint::Line { value, .. }) => profile.eval(*value),
        _ => return Err(Error::UnknownClass(class)),
    })
}

/// Pushes the distance-from-`a` function along the block chain to `target`.
fn propagate(complex: &CoverComplex, classes: &ClassSystem, class: usize, a: &TcPoint, target: usize) -> Result<Front> {
    if class >= classes.count() {
        return Err(Error::UnknownClass(class));
    }
    let rho = complex.tree.rho();
    let slope = 2.0 * rho;
    let owner = a.owner();
    if owner >= complex.block_count() || target >= complex.block_count() {
        return Err(Error::Unexplored(alloc::format!("block index {}", owner.max(target))));
    }
    let mut front = match a {
        TcPoint::Tree { point, owner } => {
            if !classes.contains(class, *owner) {
                return Err(Error::UnknownClass(class));
            }
            Front::Tree { point: point.clone(), base: 0.0 }
        }
        TcPoint::Line { value, owner } => {
            if classes.contains(class, *owner) {
                return Err(Error::UnknownClass(class));
            }
            Front::Line(DistanceProfile { apex: *value, floor: 0.0, slope })
        }
    };
    for step in complex.wall_chain(owner, target) {
        let next = complex.wall_side_block(step.wall, step.exit_side());
        front = match front {
            Front::Tree { point, base } => {
                let (sigma, gap) = complex.wall_component(step.wall, step.entry_side()).gate(&point, rho);
                Front::Line(DistanceProfile { apex: sigma / slope, floor: base + gap, slope })
            }
            Front::Line(profile) if classes.contains(class, next) => {
                let comp = complex.wall_component(step.wall, step.exit_side());
                Front::Tree { point: comp.line_point(slope * profile.apex, rho), base: profile.floor }
            }
            line => line,
        };
    }
    Ok(front)
}

/// Transports a point of `T_u` to `T_v` for members `u`, `v` of one class
/// joined through non-members. `None` when the point does not lie on the
/// boundary line of `u` facing `v`.
pub fn transport(complex: &CoverComplex, classes: &ClassSystem, class: usize, point: &TbinPoint, u: usize, v: usize) -> Result<Option<TbinPoint>> {
    let front = propagate(complex, classes, class, &TcPoint::Tree { owner: u, point: point.clone() }, v)?;
    Ok(match front {
        Front::Tree { point, base } if base == 0.0 => Some(point),
        _ => None,
    })
}

/// Point of `T_v` (for a member `v` of the class) where the `T_c` geodesic
/// from `a` enters the piece `T_v`, with the distance from `a` to it. The
/// owner of `a` must not lie below `v`.
pub fn entry_point(complex: &CoverComplex, classes: &ClassSystem, class: usize, a: &TcPoint, v: usize) -> Result<(TbinPoint, f64)> {
    match propagate(complex, classes, class, a, v)? {
        Front::Tree { point, base } => Ok((point, base)),
        Front::Line(_) => Err(Error::UnknownClass(class)),
    }
}

/// `φ(x) = (φ₀(x), φ_c(x) for every class)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub block: usize,
    pub classes: Vec<TcPoint>,
}

pub fn phi(complex: &CoverComplex, classes: &ClassSystem, x: &CoverPoint) -> Result<ProductPoint> {
    Ok(ProductPoint {
        block: phi0(complex, x),
        classes: (0..classes.count()).map(|c| phi_c(complex, classes, c, x)).collect::<Result<_>>()?,
    })
}

/// Per-factor distances: `T₀` first, then one entry per class.
pub fn factor_distances(complex: &CoverComplex, classes: &ClassSystem, p: &ProductPoint, q: &ProductPoint) -> Result<Vec<f64>> {
    let mut out = alloc::vec![complex.block_distance_in_tree(p.block, q.block) as f64];
    for c in 0..classes.count() {
        out.push(tc_distance(complex, classes, c, &p.classes[c], &q.classes[c])?);
    }
    Ok(out)
}

/// Sum metric on `T₀ × ∏ T_c`.
pub fn product_distance(complex: &CoverComplex, classes: &ClassSystem, p: &ProductPoint, q: &ProductPoint) -> Result<f64> {
    Ok(factor_distances(complex, classes, p, q)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::tests::{flip, loop_spec};
    use crate::cover::{point_on_boundary, Depths, SampleConfig};
    use alloc::vec;

    #[test]
    fn classes_of_the_flip_loop_follow_depth_parity() {
        let c = CoverComplex::explore(&flip(), Depths::new(3, 1)).unwrap();
        let classes = ClassSystem::new(&c);
        assert_eq!(classes.count(), 2);
        for b in 0..c.block_count() {
            assert_eq!(classes.class_of(b), c.blocks[b].rank % 2);
            if let Some(p) = c.blocks[b].parent {
                assert_ne!(classes.class_of(b), classes.class_of(p));
            }
        }
    }

    #[test]
    fn three_cycle_has_three_classes() {
        let c = CoverComplex::explore(&loop_spec(4, &[1, 2, 0], &[2, 0, 1]), Depths::new(3, 1)).unwrap();
        assert_eq!(ClassSystem::new(&c).count(), 3);
        let split = CoverComplex::explore(&loop_spec(4, &[1, 0, 2], &[1, 0, 2]), Depths::new(3, 1)).unwrap();
        assert_eq!(ClassSystem::new(&split).count(), 2);
    }

    #[test]
    fn line_pieces_read_the_fiber_at_odd_depth() {
        let c = CoverComplex::explore(&flip(), Depths::new(1, 2)).unwrap();
        let classes = ClassSystem::new(&c);
        let cfg = SampleConfig { seed: 1, fiber_range: 8.0 };
        let mut x = c.sample_point(&cfg, 0);
        x.block = 3;
        assert_eq!(classes.coordinate(&c, 0, 3), 1);
        match phi_c(&c, &classes, 0, &x).unwrap() {
            TcPoint::Line { value, .. } => assert_eq!(value, x.fiber[0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn same_piece_distances() {
        let c = CoverComplex::explore(&flip(), Depths::new(2, 2)).unwrap();
        let classes = ClassSystem::new(&c);
        let rho = c.tree.rho();
        let p = TbinPoint::Vertex("01".parse().unwrap());
        let q = TbinPoint::along(&"2".parse().unwrap(), 1, 0.3, rho);
        let a = TcPoint::Tree { owner: 0, point: p.clone() };
        let b = TcPoint::Tree { owner: 0, point: q.clone() };
        assert_eq!(tc_distance(&c, &classes, 0, &a, &b).unwrap(), tbin_distance(&p, &q, rho));
        let l1 = TcPoint::Line { owner: 0, value: 1.0 };
        let l2 = TcPoint::Line { owner: 0, value: -0.5 };
        assert!((tc_distance(&c, &classes, 1, &l1, &l2).unwrap() - 3.0 * rho).abs() < 1e-12);
    }

    #[test]
    fn wall_points_have_one_image() {
        let c = CoverComplex::explore(&flip(), Depths::new(2, 2)).unwrap();
        let classes = ClassSystem::new(&c);
        for wall in [0, 5, 20] {
            let w = &c.walls[wall];
            let p = point_on_boundary(&c.tree, w.lower, &w.lower_component, 0.37, vec![2.5]).unwrap();
            let q = c.cross_wall(&p, wall).unwrap();
            for class in 0..2 {
                // Evaluate without normalizing on each side.
                let on = |x: &CoverPoint| {
                    if classes.contains(class, x.block) {
                        TcPoint::Tree { owner: x.block, point: c.tree.retract(&x.base) }
                    } else {
                        TcPoint::Line { owner: x.block, value: x.fiber[classes.coordinate(&c, class, x.block) - 1] }
                    }
                };
                let d = tc_distance(&c, &classes, class, &on(&p), &on(&q)).unwrap();
                assert!(d < 1e-9, "wall {wall} class {class}: {d}");
            }
        }
    }

    #[test]
    fn shifting_one_fiber_moves_only_its_reader() {
        let spec = loop_spec(4, &[1, 2, 0], &[2, 0, 1]);
        let c = CoverComplex::explore(&spec, Depths::new(1, 2)).unwrap();
        let classes = ClassSystem::new(&c);
        let cfg = SampleConfig { seed: 2, fiber_range: 4.0 };
        let x = c.sample_point(&cfg, 0);
        let mut y = x.clone();
        y.fiber[1] += 0.75;
        let (px, py) = (phi(&c, &classes, &x).unwrap(), phi(&c, &classes, &y).unwrap());
        let d = factor_distances(&c, &classes, &px, &py).unwrap();
        for class in 0..3 {
            let reads = classes.coordinate(&c, class, x.block) == 2;
            let expected = if reads { 0.75 * 2.0 * c.tree.rho() } else { 0.0 };
            assert!((d[class + 1] - expected).abs() < 1e-12, "class {class}: {d:?}");
        }
        assert_eq!(d[0], 0.0);
    }
}
