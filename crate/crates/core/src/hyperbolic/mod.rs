//! Hexagon geometry, the θ-tree `H₀` and its dual binary tree.

pub mod address;
pub mod boundary;
pub mod chart;
pub mod h0;
pub mod hexagon;
pub mod tbin;

pub use address::HexAddress;
pub use boundary::{BoundaryComponent, BoundaryCoordinate};
pub use chart::{Isometry, Vec3};
pub use h0::{H0Point, ThetaTree};
pub use hexagon::{hexagon_constants, Constants, HexagonGeometry};
pub use tbin::{tbin_distance, tbin_path, TbinPoint};
