use std::fs;
use std::io::Write;

use anyhow::Context;
use ogm_core::hyperbolic::Constants;
use serde::Serialize;
use serde_json::value::RawValue;

/// Plain decimal with 15 significant digits.
pub fn sig15(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Serialize)]
struct ConstantsOut {
    s: Box<RawValue>,
    kappa: Box<RawValue>,
    rho: Box<RawValue>,
    delta: Box<RawValue>,
}

pub fn constants_json(c: &Constants) -> String {
    let raw = |x: f64| RawValue::from_string(sig15(x)).expect("decimal is valid JSON");
    let out = ConstantsOut { s: raw(c.s), kappa: raw(c.kappa), rho: raw(c.rho), delta: raw(c.delta) };
    serde_json::to_string_pretty(&out).expect("constants serialize")
}

/// Pretty JSON to `out`, or to standard output when no path is given.
pub fn emit<T: Serialize>(value: &T, out: Option<&str>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {path}")),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

pub fn write_csv(path: &str, rows: &[(f64, f64)]) -> anyhow::Result<()> {
    let mut text = String::from("d,e\n");
    for (d, e) in rows {
        text.push_str(&format!("{d:?},{e:?}\n"));
    }
    fs::write(path, text).with_context(|| format!("writing {path}"))
}
