//! Sampled checks of the embedding inequalities.
//!
//! Pairs are evaluated in parallel and aggregated in index order, so reports
//! do not depend on the number of workers.

use log::{info, warn};
use ogm_core::cover::Depths;
use ogm_core::curves::{build_special_curve, curve_length};
use ogm_core::geodesic::distance;
use ogm_core::hyperbolic::Constants;
use ogm_core::qi::{evaluate_pair, retraction_lipschitz, sample_pair, PairEvaluation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::session::{Rejected, Session};

pub const RETRACTION_PAIRS: usize = 100_000;
const RETRACTION_STEP: f64 = 0.5;

/// Runs `f` on `0..count` with `workers` threads (0 = all cores), keeping order.
pub fn par_map<T: Send>(workers: usize, count: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
    pool.install(|| (0..count as u64).into_par_iter().map(f).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_pass(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// A sampled pair, replayable from the run's seed and its index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: u64,
    pub x: String,
    pub y: String,
    pub d: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub bound: String,
    pub checked: usize,
    pub failed: usize,
    /// Smallest `rhs − lhs` seen.
    pub worst_margin: f64,
    /// Largest `lhs / d` over pairs with `d > 0`, where meaningful.
    pub worst_ratio: Option<f64>,
    /// The pair attaining the worst margin.
    pub witness: Option<Witness>,
}

/// Accumulates `lhs ≤ rhs` over pairs in index order.
struct Check {
    summary: CheckSummary,
    track_ratio: bool,
}

impl Check {
    fn new(name: impl Into<String>, bound: impl Into<String>, track_ratio: bool) -> Self {
        Check {
            summary: CheckSummary {
                name: name.into(),
                bound: bound.into(),
                checked: 0,
                failed: 0,
                worst_margin: f64::INFINITY,
                worst_ratio: None,
                witness: None,
            },
            track_ratio,
        }
    }

    fn record(&mut self, index: u64, d: f64, lhs: f64, rhs: f64) {
        let s = &mut self.summary;
        s.checked += 1;
        let margin = rhs - lhs;
        if !(margin >= 0.0) {
            s.failed += 1;
        }
        if margin < s.worst_margin || margin.is_nan() {
            s.worst_margin = margin;
            s.witness = Some(Witness { index, x: String::new(), y: String::new(), d, lhs, rhs });
        }
        if self.track_ratio && d > 0.0 {
            let r = lhs / d;
            s.worst_ratio = Some(s.worst_ratio.map_or(r, |w: f64| w.max(r)));
        }
    }

    fn finish(mut self, session: &Session) -> CheckSummary {
        if let Some(w) = &mut self.summary.witness {
            let (x, y) = sample_pair(&session.complex, &session.sample_config(), w.index);
            w.x = session.format_point(&x);
            w.y = session.format_point(&y);
        }
        self.summary
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetractionSummary {
    pub pairs: usize,
    pub max_ratio: f64,
    pub bound: f64,
    pub half_edge_length: f64,
    pub rho: f64,
    pub passed: bool,
    pub warning: Option<String>,
}

pub fn retraction_summary(session: &Session) -> RetractionSummary {
    let tree = &session.complex.tree;
    let est = retraction_lipschitz(tree, session.config.seed, RETRACTION_PAIRS, RETRACTION_STEP);
    let half_edge = tree.geometry.half_edge_length;
    let warning = (half_edge > tree.rho()).then(|| {
        let w = format!("embedded half-edge {half_edge} exceeds rho {}; ratio {}", tree.rho(), half_edge / tree.rho());
        warn!("{w}");
        w
    });
    let bound = 2.0 * tree.delta();
    RetractionSummary {
        pairs: est.pairs,
        max_ratio: est.max_ratio,
        bound,
        half_edge_length: half_edge,
        rho: tree.rho(),
        passed: est.max_ratio <= bound,
        warning,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverFailure {
    pub index: u64,
    pub x: String,
    pub y: String,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: String,
    pub config: RunConfig,
    pub spec_digest: String,
    pub depths: Depths,
    pub constants: Constants,
    pub c: f64,
    pub eps: f64,
    pub classes: usize,
    pub samples: usize,
    pub evaluated: usize,
    /// Pairs whose geodesic came too close to the truncation; excluded.
    pub truncated: usize,
    pub solver_failures: Vec<SolverFailure>,
    pub retraction: Option<RetractionSummary>,
    pub checks: Vec<CheckSummary>,
    pub verdict: Verdict,
}

/// Outcome of one sampled pair.
#[derive(Clone, Debug)]
pub enum PairOutcome {
    Measured(PairEvaluation),
    Truncated,
    Failed(String),
}

/// Evaluates `d` and the factor distances for pairs `0..samples`.
pub fn evaluate_pairs(session: &Session, workers: usize) -> Vec<PairOutcome> {
    let cfg = session.sample_config();
    let opts = session.options();
    info!("evaluating {} pairs", session.config.samples);
    par_map(workers, session.config.samples, |i| {
        let (x, y) = sample_pair(&session.complex, &cfg, i);
        match evaluate_pair(&session.complex, &session.classes, &x, &y, opts) {
            Ok(p) if p.truncated => PairOutcome::Truncated,
            Ok(p) => PairOutcome::Measured(p),
            Err(e) => PairOutcome::Failed(e.to_string()),
        }
    })
}

fn base_report(session: &Session, kind: &str, outcomes: &[PairOutcome], checks: Vec<CheckSummary>, retraction: Option<RetractionSummary>) -> anyhow::Result<VerificationReport> {
    let cfg = session.sample_config();
    let evaluated = outcomes.iter().filter(|o| matches!(o, PairOutcome::Measured(_))).count();
    let truncated = outcomes.iter().filter(|o| matches!(o, PairOutcome::Truncated)).count();
    if evaluated == 0 {
        anyhow::bail!(Rejected(format!("no usable samples: {truncated} of {} pairs truncated", outcomes.len())));
    }
    let solver_failures: Vec<SolverFailure> = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| match o {
            PairOutcome::Failed(error) => {
                let (x, y) = sample_pair(&session.complex, &cfg, i as u64);
                Some(SolverFailure { index: i as u64, x: session.format_point(&x), y: session.format_point(&y), error: error.clone() })
            }
            _ => None,
        })
        .collect();
    let bounds = session.bounds();
    let pass = solver_failures.is_empty() && checks.iter().all(|c| c.failed == 0) && retraction.as_ref().map_or(true, |r| r.passed);
    Ok(VerificationReport {
        kind: kind.into(),
        config: session.config.clone(),
        spec_digest: session.digest.clone(),
        depths: session.complex.depths,
        constants: session.complex.tree.geometry.constants(),
        c: bounds.c,
        eps: bounds.eps,
        classes: session.classes.count(),
        samples: outcomes.len(),
        evaluated,
        truncated,
        solver_failures,
        retraction,
        checks,
        verdict: Verdict::from_pass(pass),
    })
}

fn measured(outcomes: &[PairOutcome]) -> impl Iterator<Item = (u64, &PairEvaluation)> {
    outcomes.iter().enumerate().filter_map(|(i, o)| match o {
        PairOutcome::Measured(p) => Some((i as u64, p)),
        _ => None,
    })
}

pub fn qi_report(session: &Session, outcomes: &[PairOutcome], retraction: Option<RetractionSummary>) -> anyhow::Result<VerificationReport> {
    let b = session.bounds();
    let mut lower = Check::new("lower", "d/C - 1 - eps <= e", false);
    let mut upper = Check::new("upper", "e <= C d + 1 + eps", true);
    let mut lipschitz = Check::new("upper-lipschitz", "e <= (2 delta (n-1) + 1) d + 1 + eps", true);
    let k = 2.0 * b.delta * (b.n as f64 - 1.0) + 1.0;
    for (i, p) in measured(outcomes) {
        lower.record(i, p.d, p.d / b.c - 1.0 - b.eps, p.e);
        upper.record(i, p.d, p.e, b.c * p.d + 1.0 + b.eps);
        lipschitz.record(i, p.d, p.e, k * p.d + 1.0 + b.eps);
    }
    let checks = vec![lower.finish(session), upper.finish(session), lipschitz.finish(session)];
    base_report(session, "verify-qi", outcomes, checks, retraction)
}

pub fn lipschitz_report(session: &Session, outcomes: &[PairOutcome], retraction: Option<RetractionSummary>) -> anyhow::Result<VerificationReport> {
    let b = session.bounds();
    let mut block_tree = Check::new("block-tree", "|phi0(x) phi0(y)| <= d + 1", false);
    let mut classes: Vec<Check> = (0..session.classes.count())
        .map(|c| Check::new(format!("class-{c}"), "|phi_c(x) phi_c(y)| <= 2 delta d + eps", true))
        .collect();
    for (i, p) in measured(outcomes) {
        block_tree.record(i, p.d, p.factors[0], p.d + 1.0);
        for (c, check) in classes.iter_mut().enumerate() {
            check.record(i, p.d, p.factors[c + 1], 2.0 * b.delta * p.d + b.eps);
        }
    }
    let mut checks = vec![block_tree.finish(session)];
    checks.extend(classes.into_iter().map(|c| c.finish(session)));
    base_report(session, "verify-lipschitz", outcomes, checks, retraction)
}

/// `(d, e)` of every measured pair, in index order.
pub fn distance_pairs(outcomes: &[PairOutcome]) -> Vec<(f64, f64)> {
    measured(outcomes).map(|(_, p)| (p.d, p.e)).collect()
}

/// Special-curve checks on the first `pairs` sampled pairs.
pub fn curves_report(session: &Session, workers: usize, pairs: usize) -> anyhow::Result<VerificationReport> {
    let cfg = session.sample_config();
    let opts = session.options();
    let b = session.bounds();
    let delta = b.delta;
    type Measured = (PairEvaluation, f64, Vec<(f64, f64, f64, f64)>);
    let results: Vec<Result<Option<Measured>, String>> = par_map(workers, pairs, |i| {
        let (x, y) = sample_pair(&session.complex, &cfg, i);
        let p = evaluate_pair(&session.complex, &session.classes, &x, &y, opts).map_err(|e| e.to_string())?;
        if p.truncated {
            return Ok(None);
        }
        let curve = build_special_curve(&session.complex, &session.classes, &x, &y).map_err(|e| e.to_string())?;
        let len = curve_length(&session.complex, &curve.path);
        let steps = curve.steps.iter().map(|s| (s.to_tree, s.to_wall, s.lifted, s.tree_length)).collect();
        Ok(Some((p, len, steps)))
    });
    let mut dominates = Check::new("curve-dominates-distance", "d - tol <= length", false);
    let mut bounded = Check::new("curve-bound", "length <= (2 delta + 1) e + 2 delta + eps", false);
    let mut to_tree = Check::new("step-to-tree", "|x x0| <= delta", false);
    let mut to_wall = Check::new("step-to-wall", "|x1 x2| <= delta", false);
    let mut lifted = Check::new("lifted-path", "lifted length <= tree length", false);
    let mut outcomes = Vec::with_capacity(pairs);
    for (i, r) in results.into_iter().enumerate() {
        let i = i as u64;
        match r {
            Ok(Some((p, len, steps))) => {
                dominates.record(i, p.d, p.d - session.config.tol, len);
                bounded.record(i, p.d, len, b.curve_bound(p.e));
                for (t, w, l, tl) in steps {
                    to_tree.record(i, p.d, t, delta);
                    to_wall.record(i, p.d, w, delta);
                    lifted.record(i, p.d, l, tl + 1e-9);
                }
                outcomes.push(PairOutcome::Measured(p));
            }
            Ok(None) => outcomes.push(PairOutcome::Truncated),
            Err(e) => outcomes.push(PairOutcome::Failed(e)),
        }
    }
    let checks = [dominates, bounded, to_tree, to_wall, lifted].into_iter().map(|c| c.finish(session)).collect();
    base_report(session, "curves", &outcomes, checks, None)
}

/// Geodesic distance and chain between two points, for the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicReport {
    pub config: RunConfig,
    pub spec_digest: String,
    pub from: String,
    pub to: String,
    pub distance: f64,
    pub chain: Vec<ChainEntry>,
    pub truncated_flag: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainEntry {
    pub lower: String,
    pub upper: String,
    pub upward: bool,
    pub coordinates: Vec<f64>,
}

pub fn geodesic_report(session: &Session, from: &str, to: &str) -> anyhow::Result<GeodesicReport> {
    let (x, y) = (session.parse_point(from)?, session.parse_point(to)?);
    let g = distance(&session.complex, &x, &y, session.options())?;
    let c = &session.complex;
    Ok(GeodesicReport {
        config: session.config.clone(),
        spec_digest: session.digest.clone(),
        from: from.into(),
        to: to.into(),
        distance: g.distance,
        chain: g
            .crossings
            .iter()
            .map(|cr| ChainEntry {
                lower: c.block_name(c.walls[cr.wall].lower),
                upper: c.block_name(c.walls[cr.wall].upper),
                upward: cr.upward,
                coordinates: cr.coordinates.clone(),
            })
            .collect(),
        truncated_flag: g.truncated,
        iterations: g.iterations,
    })
}
