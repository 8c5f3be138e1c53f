#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::address::HexAddress;
use super::hexagon::HexagonGeometry;
use super::tbin::TbinPoint;

/// A boundary geodesic of the θ-tree.
///
/// Identified by the hexagon of its chain closest to the root hexagon (which
/// is also shortlex-least) and the unmarked side index of that hexagon lying on
/// the line. Arclength 0 is vertex `side` of that hexagon; it increases toward
/// vertex `side + 1`. The hexagon covering `[j, j + 1]` has chain index `j`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoundaryComponent {
    pub root: HexAddress,
    pub side: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCoordinate {
    pub component: BoundaryComponent,
    pub arclength: f64,
}

impl BoundaryComponent {
    /// Component through unmarked side `side` of hexagon `hex`.
    pub fn through(hex: &HexAddress, side: u8) -> Self {
        let (lo, hi) = HexagonGeometry::adjacent_marked(side as usize);
        let mut letters = hex.letters();
        while let Some(&l) = letters.last() {
            if l == lo || l == hi {
                letters = &letters[..letters.len() - 1];
            } else {
                break;
            }
        }
        BoundaryComponent { root: HexAddress::from_letters(letters).expect("prefix of reduced word"), side }
    }

    pub fn marked(&self) -> (u8, u8) {
        HexagonGeometry::adjacent_marked(self.side as usize)
    }

    /// Hexagon with chain index `j`.
    pub fn hexagon(&self, j: i64) -> HexAddress {
        let (lo, hi) = self.marked();
        let (first, second) = if j >= 0 { (hi, lo) } else { (lo, hi) };
        let mut a = self.root.clone();
        for k in 0..j.unsigned_abs() {
            a = a.cross(if k % 2 == 0 { first } else { second });
        }
        a
    }

    /// Chain index of `hex`, if it lies on this component's chain.
    pub fn chain_index(&self, hex: &HexAddress) -> Option<i64> {
        if !hex.starts_with(&self.root) {
            return None;
        }
        let rest = &hex.letters()[self.root.depth()..];
        let (lo, hi) = self.marked();
        if rest.iter().any(|&l| l != lo && l != hi) {
            return None;
        }
        match rest.first() {
            None => Some(0),
            Some(&l) if l == hi => Some(rest.len() as i64),
            Some(_) => Some(-(rest.len() as i64)),
        }
    }

    /// Arclength range `[lo, hi]` covered by hexagons of depth at most `depth`.
    pub fn arclength_range(&self, depth: usize) -> Option<(f64, f64)> {
        let room = depth.checked_sub(self.root.depth())? as f64;
        Some((-room, room + 1.0))
    }

    /// Canonical components meeting hexagons of depth at most `depth`, in
    /// canonical order (root sides first, then one per non-root hexagon).
    pub fn enumerate(depth: usize) -> Vec<BoundaryComponent> {
        (0..Self::count_within(depth)).map(Self::from_index).collect()
    }

    pub fn count_within(depth: usize) -> usize {
        HexAddress::count_within(depth) + 2
    }

    /// Position in the canonical order.
    pub fn index(&self) -> usize {
        if self.root.is_root() {
            (self.side as usize - 1) / 2
        } else {
            2 + self.root.shortlex_index()
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i < 3 {
            return BoundaryComponent { root: HexAddress::root(), side: (2 * i + 1) as u8 };
        }
        let root = HexAddress::from_shortlex_index(i - 2);
        let l = root.last().unwrap();
        // The unmarked side whose two marked neighbours avoid the last letter.
        let side = match l {
            0 => 3,
            1 => 5,
            _ => 1,
        };
        BoundaryComponent { root, side }
    }

    /// Hexagon chain index and local parameter (`0` at vertex `side`, `1` at
    /// vertex `side + 1`) of arclength `t`.
    pub fn local_parameter(t: f64) -> (i64, f64) {
        let j = t.floor() as i64;
        let frac = t - j as f64;
        if j.rem_euclid(2) == 0 {
            (j, frac)
        } else {
            (j, 1.0 - frac)
        }
    }

    /// Parameter along the image line in the binary tree, in tree length.
    /// The retraction maps arclength `t` to line parameter `2ρ·t`.
    pub fn line_point(&self, sigma: f64, rho: f64) -> TbinPoint {
        let two_rho = 2.0 * rho;
        let x = sigma / two_rho - 0.5;
        let k = x.floor() as i64;
        let offset = (x - k as f64) * two_rho;
        let from = self.hexagon(k);
        let (lo, hi) = self.marked();
        // Step from chain index k to k + 1 crosses hi on even k, lo on odd k.
        let m = if k.rem_euclid(2) == 0 { hi } else { lo };
        TbinPoint::along(&from, m, offset, rho)
    }

    /// Nearest point of the line to a tree point: `(line parameter, distance)`.
    pub fn gate(&self, p: &TbinPoint, rho: f64) -> (f64, f64) {
        match p {
            TbinPoint::Vertex(a) => self.vertex_gate(a, rho),
            TbinPoint::Edge { parent, letter, offset } => {
                let (sp, dp) = self.vertex_gate(parent, rho);
                let (sc, dc) = self.vertex_gate(&parent.cross(*letter), rho);
                if sp == sc {
                    // Both ends project to the same vertex: the edge hangs off it.
                    let d = if dc > dp { dp + offset } else { dc + (2.0 * rho - offset) };
                    (sp, d)
                } else {
                    let dir = if sc > sp { 1.0 } else { -1.0 };
                    (sp + dir * offset, 0.0)
                }
            }
        }
    }

    fn vertex_gate(&self, a: &HexAddress, rho: f64) -> (f64, f64) {
        let two_rho = 2.0 * rho;
        if !a.starts_with(&self.root) {
            return (rho, two_rho * a.steps_to(&self.root) as f64);
        }
        let rest = &a.letters()[self.root.depth()..];
        let (lo, hi) = self.marked();
        let run = rest.iter().take_while(|&&l| l == lo || l == hi).count();
        let j = match rest.first() {
            Some(&l) if l == hi => run as i64,
            Some(&l) if l == lo => -(run as i64),
            _ => 0,
        };
        (two_rho * (j as f64 + 0.5), two_rho * (rest.len() - run) as f64)
    }
}

impl fmt::Display for BoundaryComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.root, self.side)
    }
}
