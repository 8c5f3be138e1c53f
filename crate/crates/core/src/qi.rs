//! Constants and per-pair checks of the embedding inequalities.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cover::{point_on_boundary, CoverComplex, CoverPoint, SampleConfig, Side};
use crate::error::Result;
use crate::geodesic::{distance, SolverOptions};
use crate::hyperbolic::{tbin_distance, H0Point, HexAddress, ThetaTree, Vec3};
use crate::trees::{factor_distances, phi, ClassSystem};

/// Resolution budget carried by every tree-distance tolerance.
pub const PROFILE_RESOLUTION: f64 = 1.0 / 64.0;

/// `C = max{2δ + 1, 2δ(n − 1) + 1}`.
pub fn constant_c(n: usize, delta: f64) -> f64 {
    (2.0 * delta + 1.0).max(2.0 * delta * (n as f64 - 1.0) + 1.0)
}

/// Slack `ε = 4h + 10·tol` allowed on every sampled inequality.
pub fn tolerance(tol: f64) -> f64 {
    4.0 * PROFILE_RESOLUTION + 10.0 * tol
}

/// Distances measured for one sampled pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairEvaluation {
    /// Distance in the cover.
    pub d: f64,
    /// Sum-metric distance of the images.
    pub e: f64,
    /// `T₀` distance followed by one distance per class.
    pub factors: Vec<f64>,
    pub truncated: bool,
}

pub fn evaluate_pair(complex: &CoverComplex, classes: &ClassSystem, x: &CoverPoint, y: &CoverPoint, options: SolverOptions) -> Result<PairEvaluation> {
    let g = distance(complex, x, y, options)?;
    let factors = factor_distances(complex, classes, &phi(complex, classes, x)?, &phi(complex, classes, y)?)?;
    Ok(PairEvaluation { d: g.distance, e: factors.iter().sum(), factors, truncated: g.truncated })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub c: f64,
    pub delta: f64,
    pub n: usize,
    pub eps: f64,
}

impl Bounds {
    pub fn new(n: usize, delta: f64, tol: f64) -> Self {
        Bounds { c: constant_c(n, delta), delta, n, eps: tolerance(tol) }
    }

    /// `d/C − 1 − ε ≤ e`.
    pub fn lower_holds(&self, d: f64, e: f64) -> bool {
        d / self.c - 1.0 - self.eps <= e
    }

    /// `e ≤ C·d + 1 + ε`.
    pub fn upper_holds(&self, d: f64, e: f64) -> bool {
        e <= self.c * d + 1.0 + self.eps
    }

    /// `e ≤ (2δ(n − 1) + 1)·d + 1 + ε`.
    pub fn lipschitz_holds(&self, d: f64, e: f64) -> bool {
        e <= (2.0 * self.delta * (self.n as f64 - 1.0) + 1.0) * d + 1.0 + self.eps
    }

    /// `|φ_c(x)φ_c(y)| ≤ 2δ·d + ε`.
    pub fn class_lipschitz_holds(&self, d: f64, tc: f64) -> bool {
        tc <= 2.0 * self.delta * d + self.eps
    }

    /// `|φ₀(x)φ₀(y)| ≤ d + 1`.
    pub fn block_tree_holds(&self, d: f64, t0: f64) -> bool {
        t0 <= d + 1.0
    }

    /// Upper end of the special-curve bound `(2δ + 1)·e + 2δ + ε`.
    pub fn curve_bound(&self, e: f64) -> f64 {
        (2.0 * self.delta + 1.0) * e + 2.0 * self.delta + self.eps
    }
}

const PAIR_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Pair `index` of a verification run, drawn from stream `index` so runs are
/// independent of evaluation order. Pairs cycle through four kinds:
/// independent points, points of one block, nearby points of one block, and
/// points on either side of a wall close to it.
pub fn sample_pair(complex: &CoverComplex, config: &SampleConfig, index: u64) -> (CoverPoint, CoverPoint) {
    let x = complex.sample_point(config, 2 * index);
    let y = complex.sample_point(config, 2 * index + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ PAIR_SALT);
    rng.set_stream(index);
    match index % 4 {
        1 => {
            let y = CoverPoint { block: x.block, ..y };
            (x, y)
        }
        2 => {
            let tree = &complex.tree;
            let s = tree.geometry.side_unit_curvature;
            let angle = rng.gen_range(0.0..core::f64::consts::TAU);
            let len = rng.gen_range(0.0..=1.0);
            let local = x.base.local;
            let toward = Vec3::on_hyperboloid(local.0[1] + angle.cos(), local.0[2] + angle.sin());
            let moved = local.march(local.tangent_towards(toward), len * s).renormalized();
            let base = tree.locate(&x.base.hex, moved).unwrap_or_else(|| x.base.clone());
            let fiber = x.fiber.iter().map(|f| f + rng.gen_range(-0.5..=0.5)).collect();
            let y = CoverPoint { block: x.block, base, fiber };
            (x, y)
        }
        3 if !complex.walls.is_empty() => {
            let wall = rng.gen_range(0..complex.walls.len());
            let comp = complex.wall_component(wall, Side::Lower).clone();
            let (lo, hi) = comp.arclength_range(complex.depths.hex_depth).unwrap_or((0.0, 1.0));
            let t = rng.gen_range(lo..=hi);
            let on_wall = point_on_boundary(&complex.tree, complex.walls[wall].lower, &comp, t, x.fiber.clone())
                .expect("wall point within the sampled depth");
            let across = complex.cross_wall(&on_wall, wall).expect("point lies on the wall");
            let (a, b) = (rng.gen_range(0.0..=0.5), rng.gen_range(0.0..=0.5));
            let shift: Vec<f64> = across.fiber.iter().map(|f| f + rng.gen_range(-0.5..=0.5)).collect();
            (inward(complex, on_wall, a), inward(complex, CoverPoint { fiber: shift, ..across }, b))
        }
        _ => (x, y),
    }
}

/// Moves a point of a hexagon side toward the hexagon's center.
fn inward(complex: &CoverComplex, p: CoverPoint, len: f64) -> CoverPoint {
    let s = complex.tree.geometry.side_unit_curvature;
    let local = p.base.local;
    let moved = local.march(local.tangent_towards(Vec3::ORIGIN), len * s).renormalized();
    CoverPoint { base: H0Point { hex: p.base.hex.clone(), local: moved }, ..p }
}

/// Largest sampled ratio `|r(p)r(q)| / |pq|` of the tree retraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetractionEstimate {
    pub pairs: usize,
    pub max_ratio: f64,
    pub witness: Option<(H0Point, H0Point)>,
}

/// Samples `pairs` nearby pairs: `p` uniform in a hexagon of depth below the
/// truncation, `q` at distance up to `max_step` in a uniform direction.
pub fn retraction_lipschitz(tree: &ThetaTree, seed: u64, pairs: usize, max_step: f64) -> RetractionEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = tree.geometry.side_unit_curvature;
    let rho = tree.rho();
    let depth = tree.max_depth.saturating_sub(1);
    let mut best = RetractionEstimate { pairs: 0, max_ratio: 0.0, witness: None };
    while best.pairs < pairs {
        let hex = HexAddress::from_shortlex_index(rng.gen_range(0..HexAddress::count_within(depth)));
        let local = tree.sample_local(&mut rng);
        let angle = rng.gen_range(0.0..core::f64::consts::TAU);
        let len = rng.gen_range(1e-4..=max_step);
        let toward = Vec3::on_hyperboloid(local.0[1] + angle.cos(), local.0[2] + angle.sin());
        let moved = local.march(local.tangent_towards(toward), len * s).renormalized();
        let Some(q) = tree.locate(&hex, moved) else { continue };
        let p = H0Point { hex, local };
        let d = tree.distance(&p, &q);
        if d <= 0.0 {
            continue;
        }
        best.pairs += 1;
        let ratio = tbin_distance(&tree.retract(&p), &tree.retract(&q), rho) / d;
        if ratio > best.max_ratio {
            best.max_ratio = ratio;
            best.witness = Some((p, q));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_c_instances() {
        let delta = 1.7;
        assert_eq!(constant_c(3, delta), 4.0 * delta + 1.0);
        assert_eq!(constant_c(2, delta), 2.0 * delta + 1.0);
        assert_eq!(constant_c(5, 0.0), 1.0);
        assert!((tolerance(1e-6) - (4.0 / 64.0 + 1e-5)).abs() < 1e-15);
    }

    #[test]
    fn equal_points_pass_with_slack() {
        let b = Bounds::new(3, 1.74, 1e-6);
        assert!(b.lower_holds(0.0, 0.0) && b.upper_holds(0.0, 0.0) && b.lipschitz_holds(0.0, 0.0));
        assert!(!b.upper_holds(1.0, b.c + 1.1));
        assert!(!b.lower_holds(10.0 * b.c, 1.0));
    }

    #[test]
    fn pairs_are_reproducible_and_varied() {
        use crate::cover::Depths;
        use crate::manifold::{GraphManifoldSpec, RawEdge, RawSpec};
        use alloc::vec;
        let edge = |id: &str, rev: &str| RawEdge { id: id.into(), from: "v".into(), to: "v".into(), reverse: rev.into(), perm: vec![1, 0] };
        let spec = GraphManifoldSpec::from_raw(&RawSpec { n: 3, vertices: vec!["v".into()], edges: vec![edge("w", "-w"), edge("-w", "w")] }).unwrap();
        let c = CoverComplex::explore(&spec, Depths::new(2, 3)).unwrap();
        let cfg = SampleConfig { seed: 5, fiber_range: 8.0 };
        for i in 0..40 {
            let (x, y) = sample_pair(&c, &cfg, i);
            assert_eq!((x.clone(), y.clone()), sample_pair(&c, &cfg, i));
            for p in [&x, &y] {
                assert!(c.tree.in_hexagon(p.base.local));
            }
            let d = distance(&c, &x, &y, SolverOptions::default()).unwrap().distance;
            match i % 4 {
                1 => assert_eq!(x.block, y.block),
                2 => assert!(d <= 1.0 + 0.5 * 2.0f64.sqrt() + 1e-6, "{d}"),
                3 => assert!(d <= 1.0 + 0.5 * 2.0f64.sqrt() + 1e-6, "{d}"),
                _ => {}
            }
        }
    }

    #[test]
    fn retraction_is_two_delta_lipschitz_on_samples() {
        let tree = ThetaTree::new(4);
        let est = retraction_lipschitz(&tree, 3, 2000, 0.5);
        assert_eq!(est.pairs, 2000);
        // The profile has slope 2ρ near marked sides.
        assert!(est.max_ratio > 1.5 * tree.rho(), "{est:?}");
        assert!(est.max_ratio <= 2.0 * tree.delta());
    }
}
