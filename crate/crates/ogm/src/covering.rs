//! Coverings of sampled factor trees, their product, and the pullback to the
//! cover through the embedding.

use log::info;
use ogm_core::asdim::{check_covering, product_covering, tree_covering, CoveringCheck, DistanceMatrix};
use ogm_core::cover::CoverPoint;
use ogm_core::geodesic::distance;
use ogm_core::hyperbolic::{H0Point, HexAddress, Vec3};
use ogm_core::trees::{phi, phi_c, tc_distance, ProductPoint, TcPoint};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::session::Session;
use crate::verify::{par_map, Verdict};

pub const DEFAULT_SCALES: [f64; 3] = [8.0, 16.0, 32.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleChecks {
    pub scale: f64,
    /// `T₀` first, then one entry per class.
    pub factors: Vec<CoveringCheck>,
    pub product: CoveringCheck,
    pub pullback: CoveringCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringReport {
    pub kind: String,
    pub config: RunConfig,
    pub spec_digest: String,
    pub c: f64,
    pub eps: f64,
    pub points: usize,
    /// Point pairs left out of the pullback check because their geodesic
    /// came too close to the truncation.
    pub truncated_pairs: usize,
    pub scales: Vec<ScaleChecks>,
    pub verdict: Verdict,
}

/// Pairwise distances of `points` items computed in parallel, row by row.
fn matrix(workers: usize, points: usize, f: impl Fn(usize, usize) -> f64 + Sync + Send) -> DistanceMatrix {
    let rows: Vec<Vec<f64>> = par_map(workers, points, |i| {
        let i = i as usize;
        (i + 1..points).map(|j| f(i, j)).collect()
    });
    let upper: Vec<f64> = rows.into_iter().flatten().collect();
    DistanceMatrix::from_upper(points, &upper)
}

/// Sampled factor trees of the embedding: root distances and distance
/// matrices of `T₀` and every `T_c`, plus cover distances.
pub struct SampledImages {
    pub points: Vec<CoverPoint>,
    pub images: Vec<ProductPoint>,
    pub roots: Vec<Vec<f64>>,
    pub factors: Vec<DistanceMatrix>,
    pub cover: DistanceMatrix,
    pub truncated_pairs: usize,
}

pub fn sample_images(session: &Session, workers: usize) -> anyhow::Result<SampledImages> {
    let c = &session.complex;
    let classes = &session.classes;
    let cfg = session.sample_config();
    let n = session.config.samples;
    let points: Vec<CoverPoint> = (0..n as u64).map(|i| c.sample_point(&cfg, i)).collect();
    let images = points.iter().map(|p| phi(c, classes, p)).collect::<Result<Vec<_>, _>>()?;
    let origin = CoverPoint {
        block: c.root(),
        base: H0Point { hex: HexAddress::root(), local: Vec3::ORIGIN },
        fiber: vec![0.0; session.spec.width() - 1],
    };
    info!("computing factor distances for {n} points");
    let mut roots = vec![images.iter().map(|p| c.blocks[p.block].rank as f64).collect::<Vec<_>>()];
    let mut factors = vec![matrix(workers, n, |i, j| c.block_distance_in_tree(images[i].block, images[j].block) as f64)];
    for class in 0..classes.count() {
        let root = phi_c(c, classes, class, &origin)?;
        let pts: Vec<&TcPoint> = images.iter().map(|p| &p.classes[class]).collect();
        let dist = |a: &TcPoint, b: &TcPoint| tc_distance(c, classes, class, a, b).expect("class exists");
        roots.push(pts.iter().map(|p| dist(&root, p)).collect());
        factors.push(matrix(workers, n, |i, j| dist(pts[i], pts[j])));
    }
    info!("computing cover distances for {n} points");
    let opts = session.options();
    // Truncated pairs become NaN, which the covering check's min/max skip.
    let cover = matrix(workers, n, |i, j| match distance(c, &points[i], &points[j], opts) {
        Ok(g) if !g.truncated => g.distance,
        _ => f64::NAN,
    });
    let mut truncated_pairs = 0;
    for i in 0..n {
        for j in i + 1..n {
            if cover.get(i, j).is_nan() {
                truncated_pairs += 1;
            }
        }
    }
    Ok(SampledImages { points, images, roots, factors, cover, truncated_pairs })
}

pub fn check_scale(session: &Session, sampled: &SampledImages, scale: f64) -> anyhow::Result<ScaleChecks> {
    let b = session.bounds();
    let mut factor_checks = Vec::new();
    let mut coverings = Vec::new();
    for (root, dist) in sampled.roots.iter().zip(&sampled.factors) {
        let cov = tree_covering(root, dist, scale)?;
        factor_checks.push(check_covering(&cov, dist, scale, cov.diameter_bound));
        coverings.push(cov);
    }
    let prod = product_covering(&coverings)?;
    let sum = DistanceMatrix::sum(&sampled.factors);
    let product = check_covering(&prod, &sum, scale, prod.diameter_bound);
    let separation = (scale - 1.0) / b.c - 1.0;
    let diameter = b.c * (prod.diameter_bound + 1.0) + b.c * b.eps;
    let pullback = check_covering(&prod, &sampled.cover, separation, diameter);
    Ok(ScaleChecks { scale, factors: factor_checks, product, pullback })
}

pub fn covering_report(session: &Session, workers: usize, scales: &[f64]) -> anyhow::Result<CoveringReport> {
    let sampled = sample_images(session, workers)?;
    let checks = scales.iter().map(|&r| check_scale(session, &sampled, r)).collect::<anyhow::Result<Vec<_>>>()?;
    let pass = checks.iter().all(|s| s.factors.iter().all(|f| f.passed) && s.product.passed && s.pullback.passed);
    let b = session.bounds();
    Ok(CoveringReport {
        kind: "covering".into(),
        config: session.config.clone(),
        spec_digest: session.digest.clone(),
        c: b.c,
        eps: b.eps,
        points: sampled.points.len(),
        truncated_pairs: sampled.truncated_pairs,
        scales: checks,
        verdict: Verdict::from_pass(pass),
    })
}
