use std::fmt;

use serde::{Deserialize, Serialize};

/// Everything needed to replay a run, embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub spec: String,
    pub t0_depth: usize,
    pub hex_depth: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub fiber_range: f64,
    pub out: Option<String>,
    pub csv: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            spec: String::new(),
            t0_depth: 2,
            hex_depth: 4,
            samples: 500,
            seed: 0,
            tol: 1e-6,
            fiber_range: ogm_core::cover::DEFAULT_FIBER_RANGE,
            out: None,
            csv: None,
        }
    }
}

impl RunConfig {
    pub fn check(&self) -> Result<(), UsageError> {
        if self.t0_depth < 1 || self.hex_depth < 1 {
            return Err(UsageError("depths must be at least 1".into()));
        }
        if self.samples < 1 {
            return Err(UsageError("samples must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(UsageError("tol must be positive".into()));
        }
        if !(self.fiber_range >= 0.0 && self.fiber_range.is_finite()) {
            return Err(UsageError("fiber range must be a finite non-negative number".into()));
        }
        Ok(())
    }
}

/// Bad arguments or unreadable inputs; the CLI exits with status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
