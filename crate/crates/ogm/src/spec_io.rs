use std::fmt;
use std::fs;
use std::path::Path;

use ogm_core::manifold::{validate, GraphManifoldSpec, RawSpec, Violation};
use sha2::{Digest, Sha256};

use crate::config::UsageError;

pub fn read_raw(path: &Path) -> Result<RawSpec, UsageError> {
    let text = fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("{} is not a spec file: {e}", path.display())))
}

/// SHA-256 of the spec's canonical JSON form, so formatting does not matter.
pub fn digest(raw: &RawSpec) -> String {
    let bytes = serde_json::to_vec(raw).expect("spec serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// A spec that parsed but failed validation; the CLI exits with status 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InvalidSpec(pub Vec<Violation>);

impl fmt::Display for InvalidSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid spec:")?;
        for v in &self.0 {
            write!(f, " [{v}]")?;
        }
        Ok(())
    }
}

impl std::error::Error for InvalidSpec {}

pub struct LoadedSpec {
    pub raw: RawSpec,
    pub spec: GraphManifoldSpec,
    pub digest: String,
}

pub fn load(path: &Path) -> anyhow::Result<LoadedSpec> {
    let raw = read_raw(path)?;
    let violations = validate(&raw);
    if !violations.is_empty() {
        return Err(InvalidSpec(violations).into());
    }
    let spec = GraphManifoldSpec::from_raw(&raw).map_err(InvalidSpec)?;
    Ok(LoadedSpec { digest: digest(&raw), raw, spec })
}
