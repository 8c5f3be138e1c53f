//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use ogm::covering::{check_scale, covering_report, sample_images};
use ogm::verify::{self, curves_report, evaluate_pairs, lipschitz_report, qi_report, Verdict};
use ogm::{RunConfig, Session};
use ogm_core::asdim::{check_covering, tree_covering, DistanceMatrix};
use ogm_core::cover::{CoverPoint, SampleConfig};
use ogm_core::geodesic::{brute_force_distance, distance, SolverOptions};
use ogm_core::hyperbolic::{hexagon_constants, tbin_distance, HexAddress, TbinPoint, ThetaTree};
use ogm_core::qi::retraction_lipschitz;
use ogm_core::trees::{phi_c, tc_distance, transport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1.0 / 64.0;
const IRREDUCIBLE: [&str; 3] = ["flip_n3", "cycle_n4", "two_vertex_n5"];

fn spec_path(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("specs");
    p.push(format!("{name}.json"));
    p.display().to_string()
}

fn session(name: &str, t0_depth: usize, hex_depth: usize, samples: usize, seed: u64) -> Session {
    Session::open(RunConfig { spec: spec_path(name), t0_depth, hex_depth, samples, seed, ..RunConfig::default() }).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn hexagon_algebra() -> Outcome {
    let start = Instant::now();
    let g = hexagon_constants();
    let cosh_err = (g.side_unit_curvature.cosh() - 2.0).abs();
    let angle_err = (0..6).map(|j| (g.interior_angle(j) - std::f64::consts::FRAC_PI_2).abs()).fold(0.0, f64::max);
    let closure = g.closure_error();
    let elapsed = start.elapsed();
    outcome(
        cosh_err <= 1e-12 && angle_err <= 1e-9 && closure <= 1e-9 && elapsed < Duration::from_secs(1),
        format!("cosh(s)-2 = {cosh_err:.1e}, angle error {angle_err:.1e}, closure {closure:.1e}"),
    )
}

/// `y` in a block one or two walls away from `x`'s.
fn chain_instance(s: &Session, cfg: &SampleConfig, index: u64, walls: usize) -> (CoverPoint, CoverPoint) {
    let c = &s.complex;
    let mut i = 2 * index;
    let x = loop {
        let x = c.sample_point(cfg, i);
        if c.blocks[x.block].rank == 2 {
            break x;
        }
        i += 1 << 32;
    };
    let parent = c.blocks[x.block].parent.unwrap();
    let target = match walls {
        1 => parent,
        _ => {
            // Grandparent or a sibling, alternately.
            let siblings: Vec<usize> = c.blocks[parent].children.values().copied().filter(|&b| b != x.block).collect();
            if index % 2 == 0 {
                c.blocks[parent].parent.unwrap()
            } else {
                siblings[index as usize % siblings.len()]
            }
        }
    };
    let y = CoverPoint { block: target, ..c.sample_point(cfg, 2 * index + 1) };
    assert_eq!(c.wall_chain(x.block, y.block).len(), walls);
    (x, y)
}

fn solver_vs_oracle() -> Outcome {
    let start = Instant::now();
    let s = session("flip_n3", 2, 4, 1, 0);
    let cfg = SampleConfig { seed: 21, fiber_range: 4.0 };
    let mut worst = 0.0f64;
    let mut counts = [0usize; 2];
    for (walls, count) in [(1, 100), (2, 50)] {
        for i in 0..count {
            let (x, y) = chain_instance(&s, &cfg, i, walls);
            let g = distance(&s.complex, &x, &y, SolverOptions::default()).unwrap();
            let b = brute_force_distance(&s.complex, &x, &y, 1e-3).unwrap();
            worst = worst.max((g.distance - b).abs() / b);
            counts[walls - 1] += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-3 && elapsed < Duration::from_secs(120),
        format!("{} one-wall, {} two-wall instances, worst relative error {worst:.2e}, {:.1}s", counts[0], counts[1], elapsed.as_secs_f64()),
    )
}

fn retraction_constant() -> Outcome {
    let tree = ThetaTree::new(6);
    let est = retraction_lipschitz(&tree, 1, 100_000, 0.5);
    let half = tree.geometry.half_edge_length;
    let mut detail = format!("max ratio {:.4} over {} pairs, bound 2delta = {:.4}", est.max_ratio, est.pairs, 2.0 * tree.delta());
    if half <= tree.rho() {
        detail += &format!("; half-edge {half:.4} <= rho {:.4}", tree.rho());
    } else {
        detail += &format!("; WARN half-edge {half:.4} > rho, ratio {:.4}", half / tree.rho());
    }
    outcome(est.pairs == 100_000 && est.max_ratio <= 2.0 * tree.delta(), detail)
}

fn class_structure() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in IRREDUCIBLE {
        let s = session(name, 3, 2, 1, 0);
        let ok = s.classes.count() == s.spec.n - 1 && s.require_irreducible().is_ok();
        pass &= ok;
        parts.push(format!("{name}: {} classes", s.classes.count()));
    }
    let reducible = session("reducible_n4", 3, 2, 1, 0);
    match reducible.require_irreducible() {
        Err(e) => parts.push(format!("reducible_n4 rejected ({e})")),
        Ok(_) => {
            pass = false;
            parts.push("reducible_n4 accepted".into());
        }
    }
    outcome(pass, parts.join("; "))
}

fn worst_of(report: &verify::VerificationReport) -> String {
    report
        .checks
        .iter()
        .map(|c| match c.worst_ratio {
            Some(r) => format!("{} {}/{} ratio {r:.3}", c.name, c.checked - c.failed, c.checked),
            None => format!("{} {}/{} margin {:.3}", c.name, c.checked - c.failed, c.checked, c.worst_margin),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn lipschitz_suite() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in IRREDUCIBLE {
        let start = Instant::now();
        let s = session(name, 2, 4, 1000, 5);
        let outcomes = evaluate_pairs(&s, 0);
        let r = lipschitz_report(&s, &outcomes, None).unwrap();
        let ok = r.verdict == Verdict::Pass && r.evaluated >= 1000 && start.elapsed() < Duration::from_secs(300);
        pass &= ok;
        parts.push(format!("{name} [{}]", worst_of(&r)));
    }
    outcome(pass, parts.join("; "))
}

fn qi_sandwich() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in IRREDUCIBLE {
        let start = Instant::now();
        let s = session(name, 2, 4, 600, 6);
        let outcomes = evaluate_pairs(&s, 0);
        let r = qi_report(&s, &outcomes, None).unwrap();
        let ok = r.verdict == Verdict::Pass && r.evaluated >= 500 && start.elapsed() < Duration::from_secs(600);
        pass &= ok;
        parts.push(format!("{name} C = {:.3}, {} pairs ({} truncated) [{}]", r.c, r.evaluated, r.truncated, worst_of(&r)));
    }
    outcome(pass, parts.join("; "))
}

fn special_curves() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in IRREDUCIBLE {
        let s = session(name, 2, 4, 1, 7);
        let r = curves_report(&s, 0, 300).unwrap();
        pass &= r.verdict == Verdict::Pass && r.evaluated + r.truncated == 300;
        parts.push(format!("{name} [{}]", worst_of(&r)));
    }
    outcome(pass, parts.join("; "))
}

fn tree_metrics() -> Outcome {
    let mut worst_four_point = f64::NEG_INFINITY;
    let mut quadruples = 0;
    for name in IRREDUCIBLE {
        let s = session(name, 2, 4, 1, 8);
        let (c, k) = (&s.complex, &s.classes);
        let cfg = s.sample_config();
        for q in 0..1000u64 {
            let class = q as usize % k.count();
            let p: Vec<_> = (0..4).map(|i| phi_c(c, k, class, &c.sample_point(&cfg, 4 * q + i)).unwrap()).collect();
            let d = |i: usize, j: usize| tc_distance(c, k, class, &p[i], &p[j]).unwrap();
            let sums = [d(0, 1) + d(2, 3), d(0, 2) + d(1, 3), d(0, 3) + d(1, 2)];
            for i in 0..3 {
                let others = (0..3).filter(|&j| j != i).map(|j| sums[j]).fold(f64::NEG_INFINITY, f64::max);
                worst_four_point = worst_four_point.max(sums[i] - others);
            }
            quadruples += 1;
        }
    }
    let s = session("flip_n3", 2, 4, 1, 9);
    let (c, k) = (&s.complex, &s.classes);
    let rho = c.tree.rho();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut transported = 0;
    let mut worst_transport = 0.0f64;
    let mut attempts = 0;
    while transported < 100 && attempts < 100_000 {
        attempts += 1;
        let u = rng.gen_range(0..c.block_count());
        let v = rng.gen_range(0..c.block_count());
        let class = k.class_of(u);
        if u == v || !k.contains(class, v) {
            continue;
        }
        let blocks = c.chain_blocks(u, &c.wall_chain(u, v));
        if blocks[1..blocks.len() - 1].iter().any(|&b| k.contains(class, b)) {
            continue;
        }
        let first = c.wall_chain(u, v)[0];
        let comp = c.wall_component(first.wall, first.entry_side());
        let grid = |r: &mut ChaCha8Rng| r.gen_range(-4i32..4) as f64 + r.gen_range(0.0..1.0);
        let (a, b) = (comp.line_point(2.0 * rho * grid(&mut rng), rho), comp.line_point(2.0 * rho * grid(&mut rng), rho));
        if let (Some(a2), Some(b2)) = (transport(c, k, class, &a, u, v).unwrap(), transport(c, k, class, &b, u, v).unwrap()) {
            worst_transport = worst_transport.max((tbin_distance(&a, &b, rho) - tbin_distance(&a2, &b2, rho)).abs());
            transported += 1;
        }
    }
    outcome(
        worst_four_point <= 4.0 * H && transported == 100 && worst_transport <= 1e-6,
        format!("four-point excess {worst_four_point:.2e} on {quadruples} quadruples; transport error {worst_transport:.2e} on {transported} pairs"),
    )
}

fn tbin_sample(seed: u64, size: usize, depth: usize, rho: f64) -> (Vec<f64>, DistanceMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<TbinPoint> = (0..size)
        .map(|_| {
            // Uniform depth, then a uniform address of that depth.
            let level = rng.gen_range(0..=depth);
            let first = if level == 0 { 0 } else { HexAddress::count_within(level - 1) };
            let a = HexAddress::from_shortlex_index(rng.gen_range(first..HexAddress::count_within(level)));
            TbinPoint::along(&a, rng.gen_range(0..3u8), rng.gen_range(0.0..2.0 * rho), rho)
        })
        .collect();
    let root = TbinPoint::Vertex(HexAddress::root());
    let f = pts.iter().map(|p| tbin_distance(&root, p, rho)).collect();
    (f, DistanceMatrix::from_fn(size, |i, j| tbin_distance(&pts[i], &pts[j], rho)))
}

fn coverings() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    let rho = hexagon_constants().rho;
    let (f, d) = tbin_sample(10, 400, 40, rho);
    for r in [4.0, 16.0, 64.0] {
        let cov = tree_covering(&f, &d, r).unwrap();
        let check = check_covering(&cov, &d, r, 3.0 * r);
        pass &= check.passed && check.colors_used <= 2;
        parts.push(format!("T_bin R={r}: {} pieces", check.pieces));
    }
    let s = session("flip_n3", 2, 4, 250, 10);
    let sampled = sample_images(&s, 0).unwrap();
    for r in [4.0, 16.0, 64.0] {
        let checks = check_scale(&s, &sampled, r).unwrap();
        pass &= checks.factors.iter().all(|c| c.passed && c.colors_used <= 2);
    }
    parts.push("factor trees at R=4,16,64 pass".into());
    for r in [8.0, 16.0] {
        let checks = check_scale(&s, &sampled, r).unwrap();
        pass &= checks.product.passed && checks.pullback.passed;
        parts.push(format!(
            "R={r}: product diameter {:.1} <= {:.1}, pullback separation {:.3} >= {:.3}",
            checks.product.max_diameter,
            checks.product.allowed_diameter,
            checks.pullback.min_separation.unwrap_or(f64::INFINITY),
            checks.pullback.required_separation
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(180);
    parts.push(format!("{:.1}s", elapsed.as_secs_f64()));
    outcome(pass, parts.join("; "))
}

fn determinism() -> Outcome {
    let s = session("cycle_n4", 2, 3, 120, 11);
    let json = |workers: usize| {
        let outcomes = evaluate_pairs(&s, workers);
        let qi = qi_report(&s, &outcomes, Some(verify::retraction_summary(&s))).unwrap();
        let lip = lipschitz_report(&s, &outcomes, None).unwrap();
        let curves = curves_report(&s, workers, 40).unwrap();
        serde_json::to_string(&(qi, lip, curves)).unwrap()
    };
    let (one, four, again) = (json(1), json(4), json(1));
    let small = session("cycle_n4", 2, 3, 40, 11);
    let cover = |workers: usize| serde_json::to_string(&covering_report(&small, workers, &[8.0]).unwrap()).unwrap();
    let (c1, c3) = (cover(1), cover(3));
    outcome(one == four && one == again && c1 == c3, format!("reports of {} bytes identical for 1 and 4 workers and on replay", one.len() + c1.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("hexagon algebra", hexagon_algebra),
        ("solver vs oracle", solver_vs_oracle),
        ("retraction constant", retraction_constant),
        ("class structure", class_structure),
        ("Lipschitz suite", lipschitz_suite),
        ("QI sandwich", qi_sandwich),
        ("special curves", special_curves),
        ("tree-system metrics", tree_metrics),
        ("coverings", coverings),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {name}: {} ({:.1}s) {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
