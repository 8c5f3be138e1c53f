//! Distances in the glued model space.
//!
//! A geodesic between two blocks crosses exactly the walls on the tree path
//! between them, so the distance is the minimum over crossing points of the
//! sum of in-block distances. That sum is convex in the crossing coordinates.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::cover::{ChainStep, CoverComplex, CoverPoint, Side};
use crate::error::{Error, Result};
use crate::hyperbolic::{BoundaryCoordinate, ThetaTree};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MARGIN: f64 = 1.0;
pub const MAX_ITERATIONS: usize = 10_000;

/// `√(d_H₀² + |Δfiber|²)` for two points of one block.
pub fn block_distance(tree: &ThetaTree, p: &CoverPoint, q: &CoverPoint) -> Result<f64> {
    if p.block != q.block {
        return Err(Error::DifferentBlocks);
    }
    let h = tree.distance(&p.base, &q.base);
    Ok(h.hypot(fiber_gap(&p.fiber, &q.fiber)))
}

fn fiber_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub wall: usize,
    pub upward: bool,
    /// Coordinates in the wall's lower frame (arclength on the lower
    /// component, then fibers of the lower block).
    pub coordinates: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub distance: f64,
    pub crossings: Vec<Crossing>,
    pub truncated: bool,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub margin: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, margin: DEFAULT_MARGIN }
    }
}

/// The forced wall chain between two points, with endpoints lying on the
/// first or last wall moved across it.
struct Problem<'a> {
    complex: &'a CoverComplex,
    x: CoverPoint,
    y: CoverPoint,
    chain: Vec<ChainStep>,
    width: usize,
}

impl<'a> Problem<'a> {
    fn new(complex: &'a CoverComplex, x: &CoverPoint, y: &CoverPoint) -> Result<Self> {
        for p in [x, y] {
            if p.block >= complex.block_count() {
                return Err(Error::Unexplored(alloc::format!("block index {}", p.block)));
            }
            complex.tree.check(&p.base.hex)?;
        }
        let mut x = x.clone();
        let mut y = y.clone();
        let mut chain = complex.wall_chain(x.block, y.block);
        while let Some(first) = chain.first() {
            match complex.cross_wall(&x, first.wall) {
                Ok(moved) => {
                    x = moved;
                    chain.remove(0);
                }
                Err(_) => break,
            }
        }
        while let Some(last) = chain.last() {
            match complex.cross_wall(&y, last.wall) {
                Ok(moved) => {
                    y = moved;
                    chain.pop();
                }
                Err(_) => break,
            }
        }
        Ok(Problem { complex, x, y, chain, width: complex.spec.width() })
    }

    fn dim(&self) -> usize {
        self.chain.len() * self.width
    }

    fn crossing_point(&self, i: usize, side: Side, z: &[f64]) -> Result<CoverPoint> {
        let w = self.width;
        self.complex.wall_point(self.chain[i].wall, side, &z[i * w..(i + 1) * w])
    }

    /// Total length; `None` when a crossing point leaves the addressable range.
    fn length(&self, z: &[f64]) -> Option<f64> {
        let k = self.chain.len();
        let mut total = 0.0;
        for leg in 0..=k {
            let a = if leg == 0 { self.x.clone() } else { self.crossing_point(leg - 1, self.chain[leg - 1].exit_side(), z).ok()? };
            let b = if leg == k { self.y.clone() } else { self.crossing_point(leg, self.chain[leg].entry_side(), z).ok()? };
            total += block_distance(&self.complex.tree, &a, &b).ok()?;
        }
        Some(total)
    }

    /// Length and gradient with respect to the crossing coordinates.
    fn length_and_gradient(&self, z: &[f64]) -> Option<(f64, Vec<f64>)> {
        let k = self.chain.len();
        let w = self.width;
        let tree = &self.complex.tree;
        let mut total = 0.0;
        let mut grad = vec![0.0; z.len()];
        // (point, chart velocity of the base per unit arclength, lower-frame indices, offset in z)
        type End = (CoverPoint, Option<(crate::hyperbolic::Vec3, Vec<usize>, usize)>);
        let end = |i: usize, side: Side| -> Option<End> {
            let step = self.chain[i];
            let idx = self.complex.side_indices(step.wall, side);
            let comp = self.complex.wall_component(step.wall, side).clone();
            let coords = &z[i * w..(i + 1) * w];
            let t = coords[idx[0]];
            let (base, vel) = tree.boundary_point_with_velocity(&BoundaryCoordinate { component: comp, arclength: t }).ok()?;
            let fiber = idx[1..].iter().map(|&j| coords[j]).collect();
            let block = self.complex.wall_side_block(step.wall, side);
            Some((CoverPoint { block, base, fiber }, Some((vel, idx, i * w))))
        };
        for leg in 0..=k {
            let (a, da) = if leg == 0 { (self.x.clone(), None) } else { end(leg - 1, self.chain[leg - 1].exit_side())? };
            let (b, db) = if leg == k { (self.y.clone(), None) } else { end(leg, self.chain[leg].entry_side())? };
            let h = tree.distance(&a.base, &b.base);
            let len = h.hypot(fiber_gap(&a.fiber, &b.fiber));
            total += len;
            if len <= 1e-300 {
                continue;
            }
            for (me, other, d) in [(&a, &b, &da), (&b, &a, &db)] {
                let Some((vel, idx, off)) = d else { continue };
                if h > 0.0 {
                    grad[off + idx[0]] += h / len * tree.distance_derivative(&me.base, *vel, &other.base);
                }
                for m in 1..w {
                    grad[off + idx[m]] += (me.fiber[m - 1] - other.fiber[m - 1]) / len;
                }
            }
        }
        Some((total, grad))
    }

    /// Staircase guess: walk from `x`, dropping perpendiculars onto each wall.
    fn initial_guess(&self) -> Vec<f64> {
        let w = self.width;
        let mut z = vec![0.0; self.dim()];
        let mut cur = self.x.clone();
        for (i, step) in self.chain.iter().enumerate() {
            let side = step.entry_side();
            let comp = self.complex.wall_component(step.wall, side);
            let mut t = self.complex.tree.project_to_boundary(comp, &cur.base);
            if let Some((lo, hi)) = comp.arclength_range(self.complex.depths.address_depth) {
                t = t.clamp(lo + 0.5, hi - 0.5);
            }
            let idx = self.complex.side_indices(step.wall, side);
            z[i * w + idx[0]] = t;
            for m in 1..w {
                z[i * w + idx[m]] = cur.fiber[m - 1];
            }
            cur = self.crossing_point(i, step.exit_side(), &z).expect("clamped crossing point is addressable");
        }
        z
    }

    fn near_truncation(&self, z: &[f64], margin: f64) -> bool {
        let w = self.width;
        self.chain.iter().enumerate().any(|(i, step)| {
            [Side::Lower, Side::Upper].into_iter().any(|side| {
                let comp = self.complex.wall_component(step.wall, side);
                let t = z[i * w + self.complex.side_indices(step.wall, side)[0]];
                match comp.arclength_range(self.complex.depths.address_depth) {
                    Some((lo, hi)) => t < lo + margin || t > hi - margin,
                    None => true,
                }
            })
        })
    }

    fn crossings(&self, z: &[f64]) -> Vec<Crossing> {
        let w = self.width;
        self.chain
            .iter()
            .enumerate()
            .map(|(i, s)| Crossing { wall: s.wall, upward: s.upward, coordinates: z[i * w..(i + 1) * w].to_vec() })
            .collect()
    }
}

/// Geodesic distance by damped Newton iteration on the crossing coordinates.
pub fn distance(complex: &CoverComplex, x: &CoverPoint, y: &CoverPoint, options: SolverOptions) -> Result<Geodesic> {
    let problem = Problem::new(complex, x, y)?;
    if problem.chain.is_empty() {
        let d = block_distance(&complex.tree, &problem.x, &problem.y)?;
        return Ok(Geodesic { distance: d, crossings: Vec::new(), truncated: false, iterations: 0 });
    }
    let z0 = problem.initial_guess();
    let (z, value, iterations) = newton(&problem, z0, options.tol)?;
    Ok(Geodesic {
        distance: value,
        crossings: problem.crossings(&z),
        truncated: problem.near_truncation(&z, options.margin),
        iterations,
    })
}

/// Length of the path through the given crossings, which must follow the
/// forced wall chain from `x` to `y`. `None` when a crossing point is not
/// addressable.
pub fn path_length(complex: &CoverComplex, x: &CoverPoint, y: &CoverPoint, crossings: &[Crossing]) -> Result<Option<f64>> {
    let problem = Problem::new(complex, x, y)?;
    if crossings.len() != problem.chain.len() || crossings.iter().zip(&problem.chain).any(|(c, s)| c.wall != s.wall) {
        return Err(Error::InvalidParameter("crossings do not follow the wall chain".into()));
    }
    let z: Vec<f64> = crossings.iter().flat_map(|c| c.coordinates.iter().copied()).collect();
    if z.len() != problem.dim() {
        return Err(Error::InvalidParameter("wrong number of crossing coordinates".into()));
    }
    Ok(problem.length(&z))
}

fn newton(problem: &Problem<'_>, mut z: Vec<f64>, tol: f64) -> Result<(Vec<f64>, f64, usize)> {
    let n = z.len();
    let (mut value, mut grad) = problem.length_and_gradient(&z).ok_or(Error::Truncated {
        depth: problem.complex.depths.address_depth + 1,
        limit: problem.complex.depths.address_depth,
    })?;
    let mut damping = 1e-9;
    let grad_tol = 1e-10;
    for it in 0..MAX_ITERATIONS {
        let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if gnorm < grad_tol {
            return Ok((z, value, it));
        }
        let hessian = finite_difference_hessian(problem, &z, &grad);
        let g = DVector::from_column_slice(&grad);
        let mut accepted = false;
        while damping < 1e12 {
            let shifted = &hessian + DMatrix::identity(n, n) * damping;
            let Some(chol) = shifted.cholesky() else {
                damping *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let slope = g.dot(&step);
            let mut t = 1.0;
            for _ in 0..50 {
                let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
                if let Some(v) = problem.length(&trial) {
                    if v <= value + 1e-4 * t * slope {
                        let (v2, g2) = problem.length_and_gradient(&trial).expect("length evaluated");
                        let gain = value - v2;
                        z = trial;
                        value = v2;
                        grad = g2;
                        accepted = true;
                        if gain <= tol * 1e-6 * (1.0 + value) && t * step.amax() < 1e-12 {
                            return Ok((z, value, it + 1));
                        }
                        break;
                    }
                }
                t *= 0.5;
            }
            if accepted {
                damping = (damping * 0.1).max(1e-12);
                break;
            }
            damping *= 10.0;
        }
        if !accepted {
            // No descent direction improves the value: converged to rounding.
            return if gnorm < 1e-6 {
                Ok((z, value, it))
            } else {
                Err(Error::NoConvergence { iterations: it, gradient: gnorm })
            };
        }
    }
    let gnorm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, gradient: gnorm })
}

fn finite_difference_hessian(problem: &Problem<'_>, z: &[f64], grad: &[f64]) -> DMatrix<f64> {
    let n = z.len();
    let mut h = DMatrix::zeros(n, n);
    let mut probe = z.to_vec();
    for i in 0..n {
        let step = 1e-5 * (1.0 + z[i].abs());
        probe[i] = z[i] + step;
        let plus = problem.length_and_gradient(&probe);
        probe[i] = z[i] - step;
        let minus = problem.length_and_gradient(&probe);
        probe[i] = z[i];
        let column: Vec<f64> = match (plus, minus) {
            (Some((_, gp)), Some((_, gm))) => gp.iter().zip(&gm).map(|(a, b)| (a - b) / (2.0 * step)).collect(),
            (Some((_, gp)), None) => gp.iter().zip(grad).map(|(a, b)| (a - b) / step).collect(),
            (None, Some((_, gm))) => grad.iter().zip(&gm).map(|(a, b)| (a - b) / step).collect(),
            (None, None) => vec![0.0; n],
        };
        for j in 0..n {
            h[(j, i)] = column[j];
        }
    }
    (&h + h.transpose()) * 0.5
}

/// Grid search oracle for chains of at most two walls.
///
/// An exhaustive grid over a window containing both endpoints' perpendicular
/// feet, then a fixed schedule of halving grids around the best point so far
/// until the step reaches `grid_step`. A smaller `grid_step` runs the same
/// schedule further, so the value never increases.
pub fn brute_force_distance(complex: &CoverComplex, x: &CoverPoint, y: &CoverPoint, grid_step: f64) -> Result<f64> {
    let problem = Problem::new(complex, x, y)?;
    let k = problem.chain.len();
    if k == 0 {
        return block_distance(&complex.tree, &problem.x, &problem.y);
    }
    if k > 2 {
        return Err(Error::ChainTooLong(k));
    }
    if grid_step <= 0.0 {
        return Err(Error::InvalidParameter("grid_step must be positive".into()));
    }
    let dim = problem.dim();
    let forward = problem.initial_guess();
    let backward = reversed_guess(&problem);
    let pad = 2.0;
    let mut lo: Vec<f64> = (0..dim).map(|i| forward[i].min(backward[i]) - pad).collect();
    let mut hi: Vec<f64> = (0..dim).map(|i| forward[i].max(backward[i]) + pad).collect();
    let per_dim = ((160_000f64).powf(1.0 / dim as f64).floor() as usize).max(3);
    let eval = |z: &[f64]| problem.length(z).unwrap_or(f64::INFINITY);
    let (mut best, mut best_z) = loop {
        let steps: Vec<f64> = (0..dim).map(|i| (hi[i] - lo[i]) / (per_dim - 1) as f64).collect();
        let (v, z) = grid_min(dim, per_dim, |i, j| lo[i] + j as f64 * steps[i], &eval);
        let on_edge = (0..dim).filter(|&i| z[i] <= lo[i] + 0.5 * steps[i] || z[i] >= hi[i] - 0.5 * steps[i]).collect::<Vec<_>>();
        if on_edge.is_empty() || v.is_infinite() {
            break (v, z);
        }
        for i in on_edge {
            let width = hi[i] - lo[i];
            lo[i] -= width / 2.0;
            hi[i] += width / 2.0;
        }
        if hi.iter().zip(&lo).any(|(h, l)| h - l > 200.0) {
            break (v, z);
        }
    };
    let zoom_points = 11;
    let mut step: Vec<f64> = (0..dim).map(|i| (hi[i] - lo[i]) / (per_dim - 1) as f64).collect();
    while step.iter().cloned().fold(0.0, f64::max) > grid_step {
        step.iter_mut().for_each(|s| *s *= 0.5);
        let half = (zoom_points / 2) as f64;
        let center = best_z.clone();
        let (v, z) = grid_min(dim, zoom_points, |i, j| center[i] + (j as f64 - half) * step[i], &eval);
        if v < best {
            best = v;
            best_z = z;
        }
    }
    Ok(best)
}

/// Staircase guess built from `y` backwards.
fn reversed_guess(problem: &Problem<'_>) -> Vec<f64> {
    let w = problem.width;
    let mut z = vec![0.0; problem.dim()];
    let mut cur = problem.y.clone();
    for (i, step) in problem.chain.iter().enumerate().rev() {
        let side = step.exit_side();
        let comp = problem.complex.wall_component(step.wall, side);
        let mut t = problem.complex.tree.project_to_boundary(comp, &cur.base);
        if let Some((lo, hi)) = comp.arclength_range(problem.complex.depths.address_depth) {
            t = t.clamp(lo + 0.5, hi - 0.5);
        }
        let idx = problem.complex.side_indices(step.wall, side);
        z[i * w + idx[0]] = t;
        for m in 1..w {
            z[i * w + idx[m]] = cur.fiber[m - 1];
        }
        cur = problem.crossing_point(i, step.entry_side(), &z).expect("clamped crossing point is addressable");
    }
    z
}

fn grid_min(dim: usize, points: usize, coord: impl Fn(usize, usize) -> f64, eval: &impl Fn(&[f64]) -> f64) -> (f64, Vec<f64>) {
    let mut counter = vec![0usize; dim];
    let mut z: Vec<f64> = (0..dim).map(|i| coord(i, 0)).collect();
    let mut best = (f64::INFINITY, z.clone());
    loop {
        let v = eval(&z);
        if v < best.0 {
            best = (v, z.clone());
        }
        let mut i = 0;
        loop {
            if i == dim {
                return best;
            }
            counter[i] += 1;
            if counter[i] < points {
                z[i] = coord(i, counter[i]);
                break;
            }
            counter[i] = 0;
            z[i] = coord(i, 0);
            i += 1;
        }
    }
}
