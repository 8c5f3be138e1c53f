use std::path::Path;

use anyhow::bail;
use log::info;
use ogm_core::cover::{CoverComplex, CoverPoint, Depths, SampleConfig};
use ogm_core::geodesic::SolverOptions;
use ogm_core::manifold::{GraphManifoldSpec, Irreducibility, RawSpec};
use ogm_core::qi::Bounds;
use ogm_core::trees::ClassSystem;

use crate::config::{RunConfig, UsageError};
use crate::spec_io;

/// A loaded spec with its explored complex and classes.
pub struct Session {
    pub config: RunConfig,
    pub raw: RawSpec,
    pub spec: GraphManifoldSpec,
    pub digest: String,
    pub complex: CoverComplex,
    pub classes: ClassSystem,
}

/// The spec does not meet a precondition of the requested run.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejected(pub String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

impl Session {
    pub fn open(config: RunConfig) -> anyhow::Result<Self> {
        config.check()?;
        let loaded = spec_io::load(Path::new(&config.spec))?;
        let depths = Depths::new(config.t0_depth, config.hex_depth);
        let complex = CoverComplex::explore(&loaded.spec, depths)?;
        let classes = ClassSystem::new(&complex);
        info!("explored {} blocks, {} classes", complex.block_count(), classes.count());
        Ok(Session { config, raw: loaded.raw, spec: loaded.spec, digest: loaded.digest, complex, classes })
    }

    pub fn irreducibility(&self) -> Irreducibility {
        self.spec.check_irreducible(self.config.t0_depth)
    }

    /// Verifier runs refuse specs that split off a Euclidean factor.
    pub fn require_irreducible(&self) -> anyhow::Result<Irreducibility> {
        let check = self.irreducibility();
        if !check.irreducible {
            let reason = check.reason.clone().unwrap_or_default();
            bail!(Rejected(format!("spec is not irreducible: {reason}")));
        }
        if self.classes.count() != self.spec.width() {
            bail!(Rejected(format!(
                "explored complex has {} classes, expected {}; increase the depth",
                self.classes.count(),
                self.spec.width()
            )));
        }
        Ok(check)
    }

    pub fn sample_config(&self) -> SampleConfig {
        SampleConfig { seed: self.config.seed, fiber_range: self.config.fiber_range }
    }

    pub fn options(&self) -> SolverOptions {
        SolverOptions { tol: self.config.tol, ..SolverOptions::default() }
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::new(self.spec.n, self.complex.tree.delta(), self.config.tol)
    }

    pub fn parse_point(&self, text: &str) -> Result<CoverPoint, UsageError> {
        self.complex.parse_point(text).map_err(|e| UsageError(format!("bad point {text:?}: {e}")))
    }

    pub fn format_point(&self, p: &CoverPoint) -> String {
        self.complex.format_point(p)
    }
}
