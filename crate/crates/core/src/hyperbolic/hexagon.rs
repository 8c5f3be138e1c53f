#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::address::HexAddress;
use super::chart::{unit_distance, Isometry, Vec3};

/// The equilateral right-angled hexagon and the constants derived from it.
///
/// Coordinates live in the curvature −1 chart; every reported length is divided
/// by `side_unit_curvature` so that sides have length 1 (curvature −κ).
///
/// Side `j` joins vertex `j` to vertex `j + 1`. Even sides are marked; marked
/// side `m` is hexagon side `2m`.
#[derive(Clone, Debug, PartialEq)]
pub struct HexagonGeometry {
    pub side_unit_curvature: f64,
    pub kappa: f64,
    pub rho: f64,
    pub delta: f64,
    pub vertices: [Vec3; 6],
    pub marked_sides: [usize; 3],
    /// Outward side normals; the hexagon is `{X : ⟨X, n_j⟩ ≤ 0}`.
    pub normals: [Vec3; 6],
    /// Reflections in the three marked sides.
    pub reflections: [Isometry; 3],
    /// Midpoints of the three marked sides.
    pub midpoints: [Vec3; 3],
    /// Curvature −κ length of an embedded half-edge (center to marked midpoint).
    pub half_edge_length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub s: f64,
    pub kappa: f64,
    pub rho: f64,
    pub delta: f64,
}

/// Builds the hexagon and its constants.
///
/// With `u = cosh s` the right-angled hexagon law for equal sides reads
/// `u² − u − 2 = 0`, so `cosh s = 2`. The vertices sit at distance `R` from
/// the chart origin with `cosh R = √3` (right triangle with angles π/6, π/4).
pub fn hexagon_constants() -> HexagonGeometry {
    let s = 2.0f64.acosh();
    let circumradius = 3.0f64.sqrt().acosh();
    let vertices: [Vec3; 6] = core::array::from_fn(|k| {
        let angle = core::f64::consts::FRAC_PI_3 * k as f64;
        let r = circumradius.sinh();
        Vec3::on_hyperboloid(r * angle.cos(), r * angle.sin())
    });
    let normals: [Vec3; 6] =
        core::array::from_fn(|j| Vec3::line_normal(vertices[j], vertices[(j + 1) % 6], Vec3::ORIGIN));
    let reflections: [Isometry; 3] = core::array::from_fn(|m| Isometry::reflection(normals[2 * m]));
    let midpoints: [Vec3; 3] = core::array::from_fn(|m| {
        let a = vertices[2 * m];
        let b = vertices[2 * m + 1];
        a.march(a.tangent_towards(b), s / 2.0).renormalized()
    });
    let rho = unit_distance(midpoints[0], midpoints[1]) / s;
    let mut diameter = 0.0f64;
    for i in 0..6 {
        for j in i + 1..6 {
            diameter = diameter.max(unit_distance(vertices[i], vertices[j]));
        }
    }
    HexagonGeometry {
        side_unit_curvature: s,
        kappa: s * s,
        rho,
        delta: diameter / s,
        vertices,
        marked_sides: [0, 2, 4],
        normals,
        reflections,
        midpoints,
        half_edge_length: unit_distance(Vec3::ORIGIN, midpoints[0]) / s,
    }
}

impl HexagonGeometry {
    pub fn constants(&self) -> Constants {
        Constants { s: self.side_unit_curvature, kappa: self.kappa, rho: self.rho, delta: self.delta }
    }

    /// Distance in the curvature −κ metric.
    pub fn distance(&self, a: Vec3, b: Vec3) -> f64 {
        unit_distance(a, b) / self.side_unit_curvature
    }

    pub fn side_length(&self, j: usize) -> f64 {
        self.distance(self.vertices[j], self.vertices[(j + 1) % 6])
    }

    /// Interior angle at vertex `j` (between sides `j − 1` and `j`).
    pub fn interior_angle(&self, j: usize) -> f64 {
        let v = self.vertices[j];
        let back = v.tangent_towards(self.vertices[(j + 5) % 6]);
        let fwd = v.tangent_towards(self.vertices[(j + 1) % 6]);
        back.minkowski(fwd).clamp(-1.0, 1.0).acos()
    }

    /// Distance from the last vertex reached by marching six unit sides with
    /// right-angle turns back to the start. Zero exactly when κ is right.
    pub fn closure_error(&self) -> f64 {
        let start = self.vertices[0];
        let mut p = start;
        let mut t = p.tangent_towards(self.vertices[1]);
        let s = self.side_unit_curvature;
        for _ in 0..6 {
            let q = p.march(t, s);
            let tq = p.scale(s.sinh()) + t.scale(s.cosh());
            // The unit normal of the line just walked is the tangent after a
            // quarter turn; pick the one pointing back toward the interior.
            p = q;
            t = -Vec3::line_normal(q, q + tq, Vec3::ORIGIN);
        }
        self.distance(p, start)
    }

    /// Whether a chart point lies in the root hexagon (closed, with slack `eps`).
    pub fn contains(&self, x: Vec3, eps: f64) -> bool {
        self.normals.iter().all(|n| x.minkowski(*n) <= eps)
    }

    /// Curvature −κ distance from a point of the hexagon to the line of side `j`.
    pub fn distance_to_side(&self, x: Vec3, j: usize) -> f64 {
        x.minkowski(self.normals[j]).abs().asinh() / self.side_unit_curvature
    }

    /// Isometry taking the chart of hexagon `to` into the chart of hexagon `from`.
    pub fn develop(&self, from: &HexAddress, to: &HexAddress) -> Isometry {
        let p = from.common_prefix_len(to);
        let mut m = Isometry::IDENTITY;
        for &l in from.letters()[p..].iter().rev() {
            m = m * self.reflections[l as usize];
        }
        for &l in &to.letters()[p..] {
            m = m * self.reflections[l as usize];
        }
        m
    }

    /// Marked sides adjacent to unmarked side `u`: `(lo, hi)` where `lo` meets
    /// vertex `u` and `hi` meets vertex `u + 1`.
    pub fn adjacent_marked(u: usize) -> (u8, u8) {
        debug_assert!(u % 2 == 1);
        (((u - 1) / 2) as u8, (((u + 1) % 6) / 2) as u8)
    }
}
