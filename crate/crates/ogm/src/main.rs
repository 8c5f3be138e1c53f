use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};
use log::{error, info};
use ogm_core::cover::{ComplexSummary, DEFAULT_FIBER_RANGE};
use ogm_core::curves::{build_special_curve, curve_length, SpecialCurve};
use ogm_core::geodesic::distance;
use ogm_core::hyperbolic::hexagon_constants;
use ogm_core::manifold::{validate, Irreducibility};
use ogm_core::trees::{factor_distances, phi, ProductPoint};
use serde::{Deserialize, Serialize};

use ogm::covering::{covering_report, CoveringReport, DEFAULT_SCALES};
use ogm::output::{constants_json, emit, write_csv};
use ogm::spec_io;
use ogm::verify::{self, Verdict, VerificationReport};
use ogm::{RunConfig, Session, UsageError};

#[derive(Parser)]
#[command(name = "ogm", version, about = "Sampled checks of a tree-product embedding of graph-manifold covers")]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Log more on standard error (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct RunArgs {
    /// Spec file (JSON).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value_t = 2)]
    t0_depth: usize,
    #[arg(long, default_value_t = 4)]
    hex_depth: usize,
    /// Output of `ogm explore`; its depths replace --t0-depth and --hex-depth.
    #[arg(long)]
    complex: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_FIBER_RANGE)]
    fiber_range: f64,
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dump (d, e) pairs as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
struct PairArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
}

#[derive(Subcommand)]
enum Command {
    /// Check a spec file; prints one JSON line per violation.
    Validate { spec: PathBuf },
    /// Hexagon constants s, kappa, rho, delta.
    Constants,
    /// Explore the cover complex and dump its blocks and walls.
    Explore(RunArgs),
    /// Geodesic distance between two points.
    Geodesic(PairArgs),
    /// Image of a point in the product of trees.
    Phi {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        at: String,
    },
    /// Factor distances between the images of two points.
    TreeDist {
        #[command(flatten)]
        pair: PairArgs,
        /// Only this class.
        #[arg(long)]
        class: Option<usize>,
    },
    /// Special curve between two points.
    Curve(PairArgs),
    /// Sampled check of both embedding inequalities.
    VerifyQi(RunArgs),
    /// Sampled Lipschitz checks of every factor map.
    VerifyLipschitz(RunArgs),
    /// Colored coverings of the sampled trees and their pullback.
    Covering {
        #[command(flatten)]
        run: RunArgs,
        /// Covering scale; repeat for several.
        #[arg(long = "scale")]
        scales: Vec<f64>,
    },
    /// Every check in one report.
    Report {
        #[command(flatten)]
        run: RunArgs,
        /// Pairs used for the special-curve checks.
        #[arg(long, default_value_t = 300)]
        curves: usize,
        #[arg(long = "scale")]
        scales: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct ExploreOutput {
    config: RunConfig,
    spec_digest: String,
    irreducibility: Irreducibility,
    class_sizes: Vec<usize>,
    complex: ComplexSummary,
}

#[derive(Serialize)]
struct PhiOutput {
    config: RunConfig,
    spec_digest: String,
    point: String,
    block: String,
    image: ProductPoint,
}

#[derive(Serialize)]
struct TreeDistOutput {
    config: RunConfig,
    spec_digest: String,
    from: String,
    to: String,
    /// `T₀` first, then one entry per class.
    factors: Vec<f64>,
    total: f64,
}

#[derive(Serialize)]
struct CurveOutput {
    config: RunConfig,
    spec_digest: String,
    from: String,
    to: String,
    length: f64,
    bound: f64,
    distance: f64,
    product_distance: f64,
    curve: SpecialCurve,
}

#[derive(Serialize)]
struct FullReport {
    kind: String,
    config: RunConfig,
    spec_digest: String,
    irreducibility: Irreducibility,
    qi: VerificationReport,
    lipschitz: VerificationReport,
    curves: VerificationReport,
    covering: CoveringReport,
    verdict: Verdict,
}

fn config_from(run: &RunArgs) -> anyhow::Result<RunConfig> {
    let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
    let mut config = RunConfig {
        spec: run.spec.display().to_string(),
        t0_depth: run.t0_depth,
        hex_depth: run.hex_depth,
        samples: run.samples,
        seed: run.seed,
        tol: run.tol,
        fiber_range: run.fiber_range,
        out: path(&run.out),
        csv: path(&run.csv),
    };
    if let Some(file) = &run.complex {
        let text = std::fs::read_to_string(file).map_err(|e| UsageError(format!("cannot read {}: {e}", file.display())))?;
        let explored: ExploreOutput =
            serde_json::from_str(&text).map_err(|e| UsageError(format!("{} is not an explore output: {e}", file.display())))?;
        let digest = spec_io::digest(&spec_io::read_raw(&run.spec)?);
        if explored.spec_digest != digest {
            return Err(UsageError(format!("{} was explored from a different spec", file.display())).into());
        }
        config.t0_depth = explored.complex.depths.t0_depth;
        config.hex_depth = explored.complex.depths.hex_depth;
    }
    Ok(config)
}

fn out_path(config: &RunConfig) -> Option<&str> {
    config.out.as_deref()
}

fn status(verdict: Verdict) -> ExitCode {
    match verdict {
        Verdict::Pass => ExitCode::SUCCESS,
        Verdict::Fail => ExitCode::from(1),
    }
}

fn scales_or_default(scales: &[f64]) -> Vec<f64> {
    if scales.is_empty() {
        DEFAULT_SCALES.to_vec()
    } else {
        scales.to_vec()
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let workers = cli.workers;
    match cli.command {
        Command::Validate { spec } => {
            let raw = spec_io::read_raw(&spec)?;
            let violations = validate(&raw);
            for v in &violations {
                println!("{}", serde_json::to_string(v)?);
            }
            if violations.is_empty() {
                println!("{}", serde_json::json!({ "valid": true, "spec_digest": spec_io::digest(&raw) }));
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Constants => {
            println!("{}", constants_json(&hexagon_constants().constants()));
            Ok(ExitCode::SUCCESS)
        }
        Command::Explore(run) => {
            let session = Session::open(config_from(&run)?)?;
            let out = ExploreOutput {
                config: session.config.clone(),
                spec_digest: session.digest.clone(),
                irreducibility: session.irreducibility(),
                class_sizes: session.classes.partition().iter().map(Vec::len).collect(),
                complex: session.complex.summary(),
            };
            emit(&out, out_path(&session.config))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Geodesic(pair) => {
            let session = Session::open(config_from(&pair.run)?)?;
            let report = verify::geodesic_report(&session, &pair.from, &pair.to)?;
            emit(&report, out_path(&session.config))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Phi { run, at } => {
            let session = Session::open(config_from(&run)?)?;
            let x = session.parse_point(&at)?;
            let image = phi(&session.complex, &session.classes, &x)?;
            let out = PhiOutput {
                config: session.config.clone(),
                spec_digest: session.digest.clone(),
                point: at,
                block: session.complex.block_name(image.block),
                image,
            };
            emit(&out, out_path(&session.config))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::TreeDist { pair, class } => {
            let session = Session::open(config_from(&pair.run)?)?;
            let (c, k) = (&session.complex, &session.classes);
            let (x, y) = (session.parse_point(&pair.from)?, session.parse_point(&pair.to)?);
            let mut factors = factor_distances(c, k, &phi(c, k, &x)?, &phi(c, k, &y)?)?;
            if let Some(class) = class {
                let d = *factors.get(class + 1).ok_or_else(|| UsageError(format!("class {class} does not exist")))?;
                factors = vec![d];
            }
            let out = TreeDistOutput {
                config: session.config.clone(),
                spec_digest: session.digest.clone(),
                from: pair.from,
                to: pair.to,
                total: factors.iter().sum(),
                factors,
            };
            emit(&out, out_path(&session.config))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Curve(pair) => {
            let session = Session::open(config_from(&pair.run)?)?;
            let (c, k) = (&session.complex, &session.classes);
            let (x, y) = (session.parse_point(&pair.from)?, session.parse_point(&pair.to)?);
            let curve = build_special_curve(c, k, &x, &y)?;
            let e: f64 = factor_distances(c, k, &phi(c, k, &x)?, &phi(c, k, &y)?)?.iter().sum();
            let out = CurveOutput {
                config: session.config.clone(),
                spec_digest: session.digest.clone(),
                from: pair.from,
                to: pair.to,
                length: curve_length(c, &curve.path),
                bound: session.bounds().curve_bound(e),
                distance: distance(c, &x, &y, session.options())?.distance,
                product_distance: e,
                curve,
            };
            emit(&out, out_path(&session.config))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::VerifyQi(run) => {
            let session = Session::open(config_from(&run)?)?;
            session.require_irreducible()?;
            let outcomes = verify::evaluate_pairs(&session, workers);
            let report = verify::qi_report(&session, &outcomes, Some(verify::retraction_summary(&session)))?;
            if let Some(csv) = &session.config.csv {
                write_csv(csv, &verify::distance_pairs(&outcomes))?;
            }
            emit(&report, out_path(&session.config))?;
            info!("verdict {:?}", report.verdict);
            Ok(status(report.verdict))
        }
        Command::VerifyLipschitz(run) => {
            let session = Session::open(config_from(&run)?)?;
            session.require_irreducible()?;
            let outcomes = verify::evaluate_pairs(&session, workers);
            let report = verify::lipschitz_report(&session, &outcomes, Some(verify::retraction_summary(&session)))?;
            if let Some(csv) = &session.config.csv {
                write_csv(csv, &verify::distance_pairs(&outcomes))?;
            }
            emit(&report, out_path(&session.config))?;
            Ok(status(report.verdict))
        }
        Command::Covering { run, scales } => {
            let session = Session::open(config_from(&run)?)?;
            session.require_irreducible()?;
            let report = covering_report(&session, workers, &scales_or_default(&scales))?;
            emit(&report, out_path(&session.config))?;
            Ok(status(report.verdict))
        }
        Command::Report { run, curves, scales } => {
            let session = Session::open(config_from(&run)?)?;
            let irreducibility = session.require_irreducible()?;
            let outcomes = verify::evaluate_pairs(&session, workers);
            let retraction = verify::retraction_summary(&session);
            let qi = verify::qi_report(&session, &outcomes, Some(retraction.clone()))?;
            let lipschitz = verify::lipschitz_report(&session, &outcomes, Some(retraction))?;
            let curves = verify::curves_report(&session, workers, curves)?;
            let covering = covering_report(&session, workers, &scales_or_default(&scales))?;
            if let Some(csv) = &session.config.csv {
                write_csv(csv, &verify::distance_pairs(&outcomes))?;
            }
            let pass = [qi.verdict, lipschitz.verdict, curves.verdict, covering.verdict].iter().all(|v| *v == Verdict::Pass);
            let report = FullReport {
                kind: "report".into(),
                config: session.config.clone(),
                spec_digest: session.digest.clone(),
                irreducibility,
                qi,
                lipschitz,
                curves,
                covering,
                verdict: Verdict::from_pass(pass),
            };
            emit(&report, out_path(&session.config))?;
            Ok(status(report.verdict))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OGM_LOG", level)).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            error!("{e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

