#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::address::HexAddress;
use super::boundary::{BoundaryComponent, BoundaryCoordinate};
use super::chart::{interpolate, unit_distance, unit_distance_derivative, Vec3};
use super::hexagon::{hexagon_constants, HexagonGeometry};
use super::tbin::TbinPoint;
use crate::error::{Error, Result};

/// Distance below which a chart point counts as lying on a side line.
pub const ON_SIDE_TOL: f64 = 1e-9;

/// Point of the θ-tree: a hexagon and a position in that hexagon's copy of the
/// root chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct H0Point {
    pub hex: HexAddress,
    pub local: Vec3,
}

/// The θ-tree `H₀` with a hexagon truncation depth.
#[derive(Clone, Debug)]
pub struct ThetaTree {
    pub geometry: HexagonGeometry,
    pub max_depth: usize,
}

pub const DEFAULT_HEX_DEPTH: usize = 6;

impl Default for ThetaTree {
    fn default() -> Self {
        ThetaTree::new(DEFAULT_HEX_DEPTH)
    }
}

impl ThetaTree {
    pub fn new(max_depth: usize) -> Self {
        ThetaTree { geometry: hexagon_constants(), max_depth }
    }

    pub fn rho(&self) -> f64 {
        self.geometry.rho
    }

    pub fn delta(&self) -> f64 {
        self.geometry.delta
    }

    pub fn check(&self, hex: &HexAddress) -> Result<()> {
        if hex.depth() > self.max_depth {
            Err(Error::Truncated { depth: hex.depth(), limit: self.max_depth })
        } else {
            Ok(())
        }
    }

    pub fn point(&self, hex: HexAddress, local: Vec3) -> Result<H0Point> {
        self.check(&hex)?;
        Ok(H0Point { hex, local })
    }

    /// Intrinsic distance. `H₀` is convex, so this is the chart distance after
    /// developing `q`'s hexagon into `p`'s.
    pub fn distance(&self, p: &H0Point, q: &H0Point) -> f64 {
        let m = self.geometry.develop(&p.hex, &q.hex);
        self.geometry.distance(p.local, m.apply(q.local))
    }

    /// Representation with the shortest hexagon address.
    pub fn normalize(&self, p: &H0Point) -> H0Point {
        let mut cur = p.clone();
        while let Some(l) = cur.hex.last() {
            if self.geometry.distance_to_side(cur.local, 2 * l as usize) > ON_SIDE_TOL {
                break;
            }
            let moved = self.geometry.reflections[l as usize].apply(cur.local).renormalized();
            cur = H0Point { hex: cur.hex.parent().unwrap(), local: moved };
        }
        cur
    }

    pub fn same_point(&self, p: &H0Point, q: &H0Point, tol: f64) -> bool {
        self.distance(p, q) <= tol
    }

    /// Distances to the three marked sides of the point's hexagon.
    pub fn marked_side_distances(&self, p: &H0Point) -> [f64; 3] {
        core::array::from_fn(|m| self.geometry.distance_to_side(p.local, 2 * m))
    }

    /// Retraction onto the embedded binary tree.
    ///
    /// With `d` the distance to the nearest marked side `i` (lowest index on
    /// ties), the image is the point at offset `ρ·max(0, 1 − 2d)` from the
    /// hexagon's vertex along the edge crossing side `i`.
    pub fn retract(&self, p: &H0Point) -> TbinPoint {
        let d = self.marked_side_distances(p);
        let mut best = 0;
        for m in 1..3 {
            if d[m] < d[best] {
                best = m;
            }
        }
        let rho = self.rho();
        let offset = rho * (1.0 - 2.0 * d[best]).max(0.0);
        TbinPoint::along(&p.hex, best as u8, offset, rho)
    }

    /// Point of the embedded tree polyline (hexagon center to marked-side
    /// midpoints) corresponding to a tree point; offsets scale linearly.
    pub fn lift(&self, t: &TbinPoint) -> Result<H0Point> {
        let rho = self.rho();
        match t {
            TbinPoint::Vertex(a) => self.point(a.clone(), Vec3::ORIGIN),
            TbinPoint::Edge { parent, letter, offset } => {
                let (hex, from_home) = if *offset <= rho {
                    (parent.clone(), *offset)
                } else {
                    (parent.cross(*letter), 2.0 * rho - offset)
                };
                let mid = self.geometry.midpoints[*letter as usize];
                self.point(hex, interpolate(Vec3::ORIGIN, mid, from_home / rho))
            }
        }
    }

    /// Vertex `side` of the root hexagon and the unit tangent there toward
    /// vertex `side + 1`.
    fn side_frame(&self, side: u8) -> (Vec3, Vec3) {
        let g = &self.geometry;
        let a = g.vertices[side as usize];
        (a, a.tangent_towards(g.vertices[(side as usize + 1) % 6]))
    }

    /// Point of a boundary component at arclength `t`.
    pub fn boundary_point(&self, c: &BoundaryCoordinate) -> Result<H0Point> {
        let (j, s) = BoundaryComponent::local_parameter(c.arclength);
        let hex = c.component.hexagon(j);
        self.check(&hex)?;
        let (a, tan) = self.side_frame(c.component.side);
        let local = a.march(tan, s * self.geometry.side_unit_curvature).renormalized();
        Ok(H0Point { hex, local })
    }

    /// Boundary point together with its velocity in its hexagon's chart.
    pub fn boundary_point_with_velocity(&self, c: &BoundaryCoordinate) -> Result<(H0Point, Vec3)> {
        let (j, s) = BoundaryComponent::local_parameter(c.arclength);
        let hex = c.component.hexagon(j);
        self.check(&hex)?;
        let (a, tan) = self.side_frame(c.component.side);
        let len = s * self.geometry.side_unit_curvature;
        let local = a.march(tan, len).renormalized();
        let sign = if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let vel = (a.scale(len.sinh()) + tan.scale(len.cosh())).scale(sign * self.geometry.side_unit_curvature);
        Ok((H0Point { hex, local }, vel))
    }

    /// Derivative of `distance(p, q)` when `p` moves with chart velocity `vp`.
    pub fn distance_derivative(&self, p: &H0Point, vp: Vec3, q: &H0Point) -> f64 {
        let m = self.geometry.develop(&p.hex, &q.hex);
        unit_distance_derivative(p.local, m.apply(q.local), vp) / self.geometry.side_unit_curvature
    }

    /// Boundary coordinate of a point lying on an unmarked side.
    pub fn boundary_param(&self, p: &H0Point) -> Result<BoundaryCoordinate> {
        let g = &self.geometry;
        let side = [1u8, 3, 5]
            .into_iter()
            .find(|&u| g.distance_to_side(p.local, u as usize) <= ON_SIDE_TOL)
            .ok_or(Error::NotOnBoundary)?;
        let component = BoundaryComponent::through(&p.hex, side);
        let j = component.chain_index(&p.hex).expect("hexagon lies on its own chain");
        let s = unit_distance(g.vertices[side as usize], p.local) / g.side_unit_curvature;
        let s = s.clamp(0.0, 1.0);
        let arclength = if j.rem_euclid(2) == 0 { j as f64 + s } else { j as f64 + 1.0 - s };
        Ok(BoundaryCoordinate { component, arclength })
    }

    /// Monotone retraction profile of a boundary line: arclength `t` goes to
    /// line parameter `2ρ·t` of the tree line through the component's chain.
    pub fn boundary_retraction(&self, component: &BoundaryComponent, t: f64) -> TbinPoint {
        component.line_point(2.0 * self.rho() * t, self.rho())
    }

    /// Arclength of the foot of the perpendicular from `p` to the line of `component`.
    pub fn project_to_boundary(&self, component: &BoundaryComponent, p: &H0Point) -> f64 {
        let g = &self.geometry;
        let m = g.develop(&component.root, &p.hex);
        let x = m.apply(p.local);
        let (a, tan) = self.side_frame(component.side);
        let tau = (x.minkowski(tan) / -x.minkowski(a)).clamp(-1.0 + 1e-16, 1.0 - 1e-16).atanh();
        tau / g.side_unit_curvature
    }

    /// Whether a chart point is inside the root hexagon.
    pub fn in_hexagon(&self, local: Vec3) -> bool {
        self.geometry.contains(local, 1e-12)
    }

    /// Finds the hexagon containing a chart point given in `hex`'s chart by
    /// crossing marked sides. `None` when the point leaves `H₀` through an
    /// unmarked side or lies beyond the truncation depth.
    pub fn locate(&self, hex: &HexAddress, local: Vec3) -> Option<H0Point> {
        let g = &self.geometry;
        let (mut hex, mut local) = (hex.clone(), local);
        loop {
            let worst = (0..6).max_by(|&a, &b| local.minkowski(g.normals[a]).total_cmp(&local.minkowski(g.normals[b])))?;
            if local.minkowski(g.normals[worst]) <= 1e-12 {
                return Some(H0Point { hex, local });
            }
            if worst % 2 == 1 {
                return None;
            }
            let m = (worst / 2) as u8;
            hex = hex.cross(m);
            if hex.depth() > self.max_depth {
                return None;
            }
            local = g.reflections[m as usize].apply(local).renormalized();
        }
    }

    /// Uniform chart position in the hexagon (rejection in Klein coordinates,
    /// where the hexagon is a Euclidean polygon).
    pub fn sample_local<R: Rng>(&self, rng: &mut R) -> Vec3 {
        let klein: Vec<[f64; 2]> = self.geometry.vertices.iter().map(|v| [v.0[1] / v.0[0], v.0[2] / v.0[0]]).collect();
        let lo = [0, 1].map(|i| klein.iter().map(|k| k[i]).fold(f64::INFINITY, f64::min));
        let hi = [0, 1].map(|i| klein.iter().map(|k| k[i]).fold(f64::NEG_INFINITY, f64::max));
        loop {
            let k = [rng.gen_range(lo[0]..hi[0]), rng.gen_range(lo[1]..hi[1])];
            let r2 = k[0] * k[0] + k[1] * k[1];
            if r2 >= 1.0 {
                continue;
            }
            let x0 = 1.0 / (1.0 - r2).sqrt();
            let x = Vec3::on_hyperboloid(k[0] * x0, k[1] * x0);
            if self.in_hexagon(x) {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbolic::tbin::tbin_distance;

    fn tree() -> ThetaTree {
        ThetaTree::new(8)
    }

    #[test]
    fn hexagon_side_endpoints_are_one_apart() {
        let t = tree();
        let hex: HexAddress = "02".parse().unwrap();
        let a = t.point(hex.clone(), t.geometry.vertices[3]).unwrap();
        let b = t.point(hex, t.geometry.vertices[4]).unwrap();
        assert!((t.distance(&a, &b) - 1.0).abs() < 1e-12);
        assert_eq!(t.distance(&a, &a), 0.0);
    }

    #[test]
    fn marked_side_point_has_equal_representations() {
        let t = tree();
        let hex: HexAddress = "1".parse().unwrap();
        let mid = t.geometry.midpoints[0];
        let p = H0Point { hex: hex.clone(), local: mid };
        let q = H0Point { hex: hex.cross(0), local: t.geometry.reflections[0].apply(mid) };
        assert!(t.distance(&p, &q) < 1e-12);
        assert_eq!(t.normalize(&q).hex, hex);
        assert!(t.retract(&p).approx_eq(&t.retract(&q), t.rho(), 1e-12));
        assert!(t.retract(&p).approx_eq(&TbinPoint::along(&hex, 0, t.rho(), t.rho()), t.rho(), 1e-12));
    }

    #[test]
    fn center_retracts_to_vertex_and_tree_locus_is_fixed() {
        let t = tree();
        let hex: HexAddress = "210".parse().unwrap();
        let c = t.point(hex.clone(), Vec3::ORIGIN).unwrap();
        assert_eq!(t.retract(&c), TbinPoint::Vertex(hex.clone()));
        for m in 0..3u8 {
            let p = t.point(hex.clone(), t.geometry.midpoints[m as usize]).unwrap();
            let r = t.retract(&p);
            assert!(tbin_distance(&r, &TbinPoint::along(&hex, m, t.rho(), t.rho()), t.rho()) < 1e-12);
            assert_eq!(t.lift(&r).map(|q| t.distance(&q, &p) < 1e-12), Ok(true));
        }
    }

    #[test]
    fn boundary_round_trip_and_unit_grid() {
        let t = tree();
        let comp = BoundaryComponent { root: "20".parse().unwrap(), side: 3 };
        let origin = t.boundary_point(&BoundaryCoordinate { component: comp.clone(), arclength: 0.0 }).unwrap();
        assert!(t.geometry.distance(origin.local, t.geometry.vertices[3]) < 1e-12);
        let one = t.boundary_point(&BoundaryCoordinate { component: comp.clone(), arclength: 1.0 }).unwrap();
        assert!((t.distance(&origin, &one) - 1.0).abs() < 1e-12);
        assert_eq!(BoundaryComponent::through(&comp.root, 3), comp);
        for i in -30..30 {
            let s = 0.13 * i as f64 + 0.01;
            let c = BoundaryCoordinate { component: comp.clone(), arclength: s };
            let p = t.boundary_point(&c).unwrap();
            let back = t.boundary_param(&p).unwrap();
            assert_eq!(back.component, comp);
            assert!((back.arclength - s).abs() < 1e-10);
            // The boundary is a geodesic: arclength differences are distances.
            assert!((t.distance(&origin, &p) - s.abs()).abs() < 1e-9);
            assert!((t.project_to_boundary(&comp, &p) - s).abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_retraction_matches_pointwise_retraction() {
        let t = tree();
        let comp = BoundaryComponent { root: "1".parse().unwrap(), side: 1 };
        for i in -40..40 {
            let s = 0.1 * i as f64 + 0.003;
            let p = t.boundary_point(&BoundaryCoordinate { component: comp.clone(), arclength: s }).unwrap();
            let direct = t.retract(&p);
            let profile = t.boundary_retraction(&comp, s);
            assert!(tbin_distance(&direct, &profile, t.rho()) < 1e-9, "t = {s}");
        }
        // Corner → edge midpoint; middle of a grid segment → vertex.
        let corner = t.boundary_retraction(&comp, 2.0);
        assert_eq!(t.boundary_retraction(&comp, 2.5), TbinPoint::Vertex(comp.hexagon(2)));
        assert!((tbin_distance(&corner, &TbinPoint::Vertex(comp.hexagon(2)), t.rho()) - t.rho()).abs() < 1e-12);
    }

    #[test]
    fn truncation_is_reported() {
        let t = ThetaTree::new(2);
        let comp = BoundaryComponent { root: HexAddress::root(), side: 3 };
        assert!(t.boundary_point(&BoundaryCoordinate { component: comp.clone(), arclength: 2.5 }).is_ok());
        assert_eq!(
            t.boundary_point(&BoundaryCoordinate { component: comp, arclength: 3.5 }),
            Err(Error::Truncated { depth: 3, limit: 2 })
        );
    }
}
