use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CoverComplex;
use crate::error::{Error, Result};
use crate::hyperbolic::{H0Point, HexAddress, Vec3};

pub const DEFAULT_FIBER_RANGE: f64 = 8.0;

/// A point of the cover: block, base point in that block's `H₀`, fibers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverPoint {
    pub block: usize,
    pub base: H0Point,
    pub fiber: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub fiber_range: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig { seed: 0, fiber_range: DEFAULT_FIBER_RANGE }
    }
}

impl CoverComplex {
    /// Text form `block=<path>;hex=<letters>;pos=<x1>,<x2>;fiber=<f1,…>`.
    pub fn format_point(&self, p: &CoverPoint) -> String {
        let fibers: Vec<String> = p.fiber.iter().map(|f| format!("{f:?}")).collect();
        format!(
            "block={};hex={};pos={:?},{:?};fiber={}",
            self.block_name(p.block),
            p.base.hex,
            p.base.local.0[1],
            p.base.local.0[2],
            fibers.join(",")
        )
    }

    pub fn parse_point(&self, text: &str) -> Result<CoverPoint> {
        let mut block = None;
        let mut hex = None;
        let mut pos = None;
        let mut fiber = None;
        for field in text.trim().split(';') {
            let (key, value) =
                field.split_once('=').ok_or_else(|| Error::Parse(format!("field {field:?} has no '='")))?;
            match key.trim() {
                "block" => block = Some(self.block_by_name(value.trim())?),
                "hex" => hex = Some(value.trim().parse::<HexAddress>()?),
                "pos" => pos = Some(parse_numbers(value)?),
                "fiber" => fiber = Some(parse_numbers(value)?),
                other => return Err(Error::Parse(format!("unknown field {other:?}"))),
            }
        }
        let missing = |name: &str| Error::Parse(format!("missing field {name:?}"));
        let block = block.ok_or_else(|| missing("block"))?;
        let hex = hex.ok_or_else(|| missing("hex"))?;
        let pos = pos.ok_or_else(|| missing("pos"))?;
        let fiber = fiber.ok_or_else(|| missing("fiber"))?;
        if pos.len() != 2 {
            return Err(Error::Parse("pos needs two coordinates".into()));
        }
        if fiber.len() != self.spec.n - 2 {
            return Err(Error::Parse(format!("expected {} fibers, got {}", self.spec.n - 2, fiber.len())));
        }
        let local = Vec3::on_hyperboloid(pos[0], pos[1]);
        if !self.tree.in_hexagon(local) {
            return Err(Error::Parse("pos lies outside the hexagon".into()));
        }
        let base = self.tree.point(hex, local)?;
        Ok(CoverPoint { block, base, fiber })
    }

    /// Random point for stream `index`: uniform block, uniform hexagon of depth
    /// ≤ `hex_depth`, uniform chart position in the hexagon, uniform fibers.
    pub fn sample_point(&self, config: &SampleConfig, index: u64) -> CoverPoint {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(index);
        let block = rng.gen_range(0..self.blocks.len());
        let hex = HexAddress::from_shortlex_index(rng.gen_range(0..HexAddress::count_within(self.depths.hex_depth)));
        let local = self.tree.sample_local(&mut rng);
        let fiber = (0..self.spec.n - 2).map(|_| rng.gen_range(-config.fiber_range..=config.fiber_range)).collect();
        CoverPoint { block, base: H0Point { hex, local }, fiber }
    }
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::tests::flip;
    use super::super::Depths;
    use super::*;
    use alloc::vec;

    #[test]
    fn addresses_round_trip_exactly() {
        let c = CoverComplex::explore(&flip(), Depths::new(2, 2)).unwrap();
        let cfg = SampleConfig { seed: 11, fiber_range: 8.0 };
        for i in 0..200 {
            let p = c.sample_point(&cfg, i);
            let text = c.format_point(&p);
            let q = c.parse_point(&text).unwrap();
            assert_eq!(q.block, p.block);
            assert_eq!(q.base.hex, p.base.hex);
            assert_eq!(q.fiber, p.fiber);
            assert_eq!(&q.base.local.0[1..], &p.base.local.0[1..]);
            assert!(c.tree.distance(&q.base, &p.base) < 1e-15);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let c = CoverComplex::explore(&flip(), Depths::new(1, 2)).unwrap();
        let cfg = SampleConfig { seed: 3, fiber_range: 8.0 };
        assert_eq!(c.sample_point(&cfg, 5), c.sample_point(&cfg, 5));
        assert_ne!(c.sample_point(&cfg, 5), c.sample_point(&cfg, 6));
        let mut hit = vec![false; c.block_count()];
        for i in 0..10_000 {
            let p = c.sample_point(&cfg, i);
            assert!(c.tree.in_hexagon(p.base.local));
            assert!(p.base.hex.depth() <= 2);
            assert!(p.fiber[0].abs() <= 8.0);
            hit[p.block] = true;
        }
        assert!(hit.iter().all(|&h| h));
    }

    #[test]
    fn malformed_addresses_are_rejected() {
        let c = CoverComplex::explore(&flip(), Depths::new(1, 2)).unwrap();
        assert!(c.parse_point("block=;hex=;pos=0,0").is_err());
        assert!(c.parse_point("block=;hex=3;pos=0,0;fiber=1").is_err());
        assert!(c.parse_point("block=;hex=;pos=0,0;fiber=1,2").is_err());
        assert!(c.parse_point("block=nope@1;hex=;pos=0,0;fiber=1").is_err());
        assert!(c.parse_point("block=;hex=01;pos=0.1,0.2;fiber=1").is_ok());
    }
}
