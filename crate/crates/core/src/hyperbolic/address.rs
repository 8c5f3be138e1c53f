use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hexagon of the θ-tree, named by the marked sides crossed from the root hexagon.
///
/// Letters are marked-side indices `0..3`; the word is reduced (no letter repeats
/// immediately). Addresses are in bijection with the vertices of the binary tree.
/// Ordered shortlex: by depth, then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HexAddress(Vec<u8>);

impl HexAddress {
    pub fn root() -> Self {
        HexAddress(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Result<Self> {
        let mut a = HexAddress::root();
        for &l in letters {
            if l > 2 {
                return Err(Error::Parse(alloc::format!("hexagon letter {l} out of range")));
            }
            if a.last() == Some(l) {
                return Err(Error::Parse(String::from("hexagon address is not reduced")));
            }
            a.0.push(l);
        }
        Ok(a)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// Neighbor across marked side `m`.
    pub fn cross(&self, m: u8) -> Self {
        let mut w = self.0.clone();
        if w.last() == Some(&m) {
            w.pop();
        } else {
            w.push(m);
        }
        HexAddress(w)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(HexAddress(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn common_prefix_len(&self, other: &Self) -> usize {
        self.0.iter().zip(other.0.iter()).take_while(|(a, b)| a == b).count()
    }

    /// Number of tree edges between the two hexagons.
    pub fn steps_to(&self, other: &Self) -> usize {
        let p = self.common_prefix_len(other);
        self.depth() + other.depth() - 2 * p
    }

    pub fn starts_with(&self, prefix: &Self) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Position in the shortlex enumeration of all reduced words.
    pub fn shortlex_index(&self) -> usize {
        let d = self.depth();
        if d == 0 {
            return 0;
        }
        let before: usize = 1 + 3 * ((1usize << (d - 1)) - 1);
        let mut rank = self.0[0] as usize;
        for w in self.0.windows(2) {
            let (prev, l) = (w[0], w[1]);
            let bit = if l < prev { l } else { l - 1 };
            rank = rank * 2 + bit as usize;
        }
        before + rank
    }

    pub fn from_shortlex_index(index: usize) -> Self {
        if index == 0 {
            return HexAddress::root();
        }
        let mut d = 1;
        let mut before = 1usize;
        while index >= before + 3 * (1usize << (d - 1)) {
            before += 3 * (1usize << (d - 1));
            d += 1;
        }
        let mut rank = index - before;
        let mut bits = Vec::with_capacity(d - 1);
        for _ in 0..d - 1 {
            bits.push((rank & 1) as u8);
            rank >>= 1;
        }
        let mut letters = Vec::with_capacity(d);
        letters.push(rank as u8);
        for &bit in bits.iter().rev() {
            let prev = *letters.last().unwrap();
            letters.push(if bit < prev { bit } else { bit + 1 });
        }
        HexAddress(letters)
    }

    /// Number of hexagons of depth at most `depth`.
    pub fn count_within(depth: usize) -> usize {
        1 + 3 * ((1usize << depth) - 1)
    }
}

impl Ord for HexAddress {
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth().cmp(&other.depth()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for HexAddress {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for HexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl core::str::FromStr for HexAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Result<Vec<u8>> = s
            .bytes()
            .map(|b| match b {
                b'0'..=b'2' => Ok(b - b'0'),
                _ => Err(Error::Parse(alloc::format!("bad hexagon letter {:?}", b as char))),
            })
            .collect();
        HexAddress::from_letters(&letters?)
    }
}
