use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::address::HexAddress;

/// Point of the binary tree dual to the hexagon tiling, edges of length `2ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TbinPoint {
    Vertex(HexAddress),
    /// Interior point of the edge from `parent` to `parent.cross(letter)`,
    /// `offset ∈ (0, 2ρ)` measured from `parent`.
    Edge { parent: HexAddress, letter: u8, offset: f64 },
}

impl TbinPoint {
    /// Point at `offset` from hexagon `from` along the edge crossing marked side `m`.
    /// Offsets at either end collapse to the incident vertex.
    pub fn along(from: &HexAddress, m: u8, offset: f64, rho: f64) -> Self {
        let two_rho = 2.0 * rho;
        let to = from.cross(m);
        if offset <= 0.0 {
            return TbinPoint::Vertex(from.clone());
        }
        if offset >= two_rho {
            return TbinPoint::Vertex(to);
        }
        if to.depth() > from.depth() {
            TbinPoint::Edge { parent: from.clone(), letter: m, offset }
        } else {
            TbinPoint::Edge { parent: to, letter: m, offset: two_rho - offset }
        }
    }

    /// Endpoints with the distance to each.
    fn ends(&self, rho: f64) -> Vec<(HexAddress, f64)> {
        match self {
            TbinPoint::Vertex(a) => vec![(a.clone(), 0.0)],
            TbinPoint::Edge { parent, letter, offset } => {
                vec![(parent.clone(), *offset), (parent.cross(*letter), 2.0 * rho - offset)]
            }
        }
    }

    /// Hexagon whose tripod (three half-edges) contains the point.
    pub fn home_hexagon(&self, rho: f64) -> HexAddress {
        match self {
            TbinPoint::Vertex(a) => a.clone(),
            TbinPoint::Edge { parent, letter, offset } => {
                if *offset <= rho {
                    parent.clone()
                } else {
                    parent.cross(*letter)
                }
            }
        }
    }

    pub fn approx_eq(&self, other: &TbinPoint, rho: f64, tol: f64) -> bool {
        tbin_distance(self, other, rho) <= tol
    }
}

/// Tree distance with edges of length `2ρ`.
pub fn tbin_distance(a: &TbinPoint, b: &TbinPoint, rho: f64) -> f64 {
    if let (
        TbinPoint::Edge { parent: pa, letter: la, offset: oa },
        TbinPoint::Edge { parent: pb, letter: lb, offset: ob },
    ) = (a, b)
    {
        if pa == pb && la == lb {
            return (oa - ob).abs();
        }
    }
    let mut best = f64::INFINITY;
    for (ea, da) in a.ends(rho) {
        for (eb, db) in b.ends(rho) {
            let d = da + db + 2.0 * rho * ea.steps_to(&eb) as f64;
            best = best.min(d);
        }
    }
    best
}

/// Breakpoints of the tree geodesic from `a` to `b`: the endpoints plus every
/// vertex and edge midpoint strictly between them, in order.
pub fn tbin_path(a: &TbinPoint, b: &TbinPoint, rho: f64) -> Vec<TbinPoint> {
    let mut out = vec![a.clone()];
    if tbin_distance(a, b, rho) == 0.0 {
        return out;
    }
    // Same edge: possibly through its midpoint.
    if let (
        TbinPoint::Edge { parent: pa, letter: la, offset: oa },
        TbinPoint::Edge { parent: pb, letter: lb, offset: ob },
    ) = (a, b)
    {
        if pa == pb && la == lb {
            if (oa - rho) * (ob - rho) < 0.0 {
                out.push(TbinPoint::Edge { parent: pa.clone(), letter: *la, offset: rho });
            }
            out.push(b.clone());
            return out;
        }
    }
    // Pick the exit vertex of a and entry vertex of b on the geodesic.
    let total = tbin_distance(a, b, rho);
    let mut choice = None;
    for (ea, da) in a.ends(rho) {
        for (eb, db) in b.ends(rho) {
            let d = da + db + 2.0 * rho * ea.steps_to(&eb) as f64;
            if (d - total).abs() <= 1e-12 * (1.0 + total) && choice.is_none() {
                choice = Some((ea.clone(), eb.clone()));
            }
        }
    }
    let (ea, eb) = choice.expect("tree distance realised by some pair of ends");
    push_toward_vertex(&mut out, a, &ea, rho);
    // Vertex path ea → lca → eb.
    let p = ea.common_prefix_len(&eb);
    let mut cur = ea.clone();
    while cur.depth() > p {
        let l = cur.last().unwrap();
        let next = cur.parent().unwrap();
        out.push(TbinPoint::Edge { parent: next.clone(), letter: l, offset: rho });
        out.push(TbinPoint::Vertex(next.clone()));
        cur = next;
    }
    for &l in &eb.letters()[p..] {
        out.push(TbinPoint::Edge { parent: cur.clone(), letter: l, offset: rho });
        cur = cur.cross(l);
        out.push(TbinPoint::Vertex(cur.clone()));
    }
    // From the entry vertex to b.
    if let TbinPoint::Edge { parent, letter, offset } = b {
        let from_parent = *parent == eb;
        let passes_mid = if from_parent { *offset > rho } else { *offset < rho };
        if passes_mid {
            out.push(TbinPoint::Edge { parent: parent.clone(), letter: *letter, offset: rho });
        }
        out.push(b.clone());
    }
    dedup(out, rho)
}

fn push_toward_vertex(out: &mut Vec<TbinPoint>, a: &TbinPoint, ea: &HexAddress, rho: f64) {
    if let TbinPoint::Edge { parent, letter, offset } = a {
        let to_parent = parent == ea;
        let passes_mid = if to_parent { *offset > rho } else { *offset < rho };
        if passes_mid {
            out.push(TbinPoint::Edge { parent: parent.clone(), letter: *letter, offset: rho });
        }
        out.push(TbinPoint::Vertex(ea.clone()));
    }
}

fn dedup(points: Vec<TbinPoint>, rho: f64) -> Vec<TbinPoint> {
    let mut out: Vec<TbinPoint> = Vec::with_capacity(points.len());
    for p in points {
        if out.last().map(|q| tbin_distance(q, &p, rho) == 0.0).unwrap_or(false) {
            continue;
        }
        out.push(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const RHO: f64 = 1.25;

    fn v(s: &str) -> TbinPoint {
        TbinPoint::Vertex(s.parse().unwrap())
    }

    #[test]
    fn edge_length_is_two_rho() {
        assert_eq!(tbin_distance(&v(""), &v("0"), RHO), 2.0 * RHO);
        assert_eq!(tbin_distance(&v("01"), &v("01"), RHO), 0.0);
    }

    #[test]
    fn vertex_to_edge_midpoint_across_one_vertex() {
        // root → "0" → midpoint of edge ("0", "01").
        let mid = TbinPoint::along(&"0".parse().unwrap(), 1, RHO, RHO);
        assert!((tbin_distance(&v(""), &mid, RHO) - 3.0 * RHO).abs() < 1e-15);
    }

    #[test]
    fn along_normalizes_orientation_and_ends() {
        let child: HexAddress = "02".parse().unwrap();
        let p = TbinPoint::along(&child, 2, 0.5, RHO);
        assert_eq!(p, TbinPoint::Edge { parent: "0".parse().unwrap(), letter: 2, offset: 2.0 * RHO - 0.5 });
        assert_eq!(TbinPoint::along(&child, 2, 2.0 * RHO, RHO), v("0"));
        assert_eq!(TbinPoint::along(&child, 1, 0.0, RHO), v("02"));
    }

    #[test]
    fn path_breakpoints_add_up() {
        let a = TbinPoint::along(&"01".parse().unwrap(), 0, 0.3, RHO);
        let b = TbinPoint::along(&"2".parse().unwrap(), 1, 1.9, RHO);
        let path = tbin_path(&a, &b, RHO);
        let sum: f64 = path.windows(2).map(|w| tbin_distance(&w[0], &w[1], RHO)).sum();
        assert!((sum - tbin_distance(&a, &b, RHO)).abs() < 1e-12);
        for w in path.windows(2) {
            assert!(tbin_distance(&w[0], &w[1], RHO) <= RHO + 1e-12);
        }
    }
}
