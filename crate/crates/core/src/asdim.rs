//! Colored coverings of finite samples of trees and products of trees.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric matrix of pairwise distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    size: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            for j in i + 1..size {
                let d = f(i, j);
                data[i * size + j] = d;
                data[j * size + i] = d;
            }
        }
        DistanceMatrix { size, data }
    }

    /// Builds from the upper triangle listed row by row (`i < j`).
    pub fn from_upper(size: usize, upper: &[f64]) -> Self {
        let mut it = upper.iter();
        Self::from_fn(size, |_, _| *it.next().expect("upper triangle has size·(size−1)/2 entries"))
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size + j]
    }

    /// Entrywise sum.
    pub fn sum(parts: &[DistanceMatrix]) -> DistanceMatrix {
        let size = parts[0].size;
        let mut data = vec![0.0; size * size];
        for p in parts {
            for (a, b) in data.iter_mut().zip(&p.data) {
                *a += b;
            }
        }
        DistanceMatrix { size, data }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub color: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColoredCovering {
    pub scale: f64,
    pub colors: usize,
    pub diameter_bound: f64,
    pub pieces: Vec<Piece>,
    /// Piece of each sample point.
    pub assignment: Vec<usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Gromov product `(x|y)` at the root.
pub fn meet_level(root_distance: &[f64], dist: &DistanceMatrix, i: usize, j: usize) -> f64 {
    (root_distance[i] + root_distance[j] - dist.get(i, j)) / 2.0
}

/// Two-colored covering of a tree sample at scale `r`: annuli of width `r`
/// around the root, split where branches meet below `kr − r/2`.
pub fn tree_covering(root_distance: &[f64], dist: &DistanceMatrix, r: f64) -> Result<ColoredCovering> {
    if r <= 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter("scale must be positive".into()));
    }
    let n = root_distance.len();
    let annulus: Vec<i64> = root_distance.iter().map(|f| (f / r).floor() as i64).collect();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if annulus[i] == annulus[j] && meet_level(root_distance, dist, i, j) >= annulus[i] as f64 * r - r / 2.0 {
                uf.union(i, j);
            }
        }
    }
    let mut ids = BTreeMap::new();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut assignment = vec![0; n];
    for i in 0..n {
        let root = uf.find(i);
        let id = *ids.entry(root).or_insert_with(|| {
            pieces.push(Piece { color: annulus[i].rem_euclid(2) as usize, members: Vec::new() });
            pieces.len() - 1
        });
        pieces[id].members.push(i);
        assignment[i] = id;
    }
    Ok(ColoredCovering { scale: r, colors: 2, diameter_bound: 3.0 * r, pieces, assignment })
}

/// Product of coverings of the same sample in several factors; colors are
/// tuples of factor colors.
pub fn product_covering(factors: &[ColoredCovering]) -> Result<ColoredCovering> {
    let first = factors.first().ok_or_else(|| Error::InvalidParameter("no factors".into()))?;
    if factors.iter().any(|f| f.scale != first.scale || f.assignment.len() != first.assignment.len()) {
        return Err(Error::ScaleMismatch);
    }
    let n = first.assignment.len();
    let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut pieces: Vec<Piece> = Vec::new();
    let mut assignment = vec![0; n];
    for i in 0..n {
        let key: Vec<usize> = factors.iter().map(|f| f.assignment[i]).collect();
        let id = *ids.entry(key.clone()).or_insert_with(|| {
            let mut color = 0;
            for (f, &p) in factors.iter().zip(&key).rev() {
                color = color * f.colors + f.pieces[p].color;
            }
            pieces.push(Piece { color, members: Vec::new() });
            pieces.len() - 1
        });
        pieces[id].members.push(i);
        assignment[i] = id;
    }
    Ok(ColoredCovering {
        scale: first.scale,
        colors: factors.iter().map(|f| f.colors).product(),
        diameter_bound: factors.iter().map(|f| f.diameter_bound).sum(),
        pieces,
        assignment,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringCheck {
    pub points: usize,
    pub pieces: usize,
    pub colors_used: usize,
    pub uncovered: usize,
    /// Smallest distance between different pieces of one color; `None` when
    /// no color has two pieces.
    pub min_separation: Option<f64>,
    pub max_diameter: f64,
    pub required_separation: f64,
    pub allowed_diameter: f64,
    pub passed: bool,
}

/// Exhaustive pairwise check of a covering against a distance matrix.
pub fn check_covering(cov: &ColoredCovering, dist: &DistanceMatrix, required_separation: f64, allowed_diameter: f64) -> CoveringCheck {
    let n = dist.len();
    let uncovered = (0..n).filter(|&i| cov.assignment.get(i).map_or(true, |&p| !cov.pieces[p].members.contains(&i))).count();
    let mut min_separation = f64::INFINITY;
    let mut max_diameter = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let (pi, pj) = (cov.assignment[i], cov.assignment[j]);
            let d = dist.get(i, j);
            if pi == pj {
                max_diameter = max_diameter.max(d);
            } else if cov.pieces[pi].color == cov.pieces[pj].color {
                min_separation = min_separation.min(d);
            }
        }
    }
    let mut colors: Vec<usize> = cov.pieces.iter().map(|p| p.color).collect();
    colors.sort_unstable();
    colors.dedup();
    CoveringCheck {
        points: n,
        pieces: cov.pieces.len(),
        colors_used: colors.len(),
        uncovered,
        min_separation: min_separation.is_finite().then_some(min_separation),
        max_diameter,
        required_separation,
        allowed_diameter,
        passed: uncovered == 0 && min_separation >= required_separation && max_diameter <= allowed_diameter,
    }
}
