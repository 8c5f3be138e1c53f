#![no_std]

extern crate alloc;

pub mod asdim;
pub mod cover;
pub mod curves;
pub mod error;
pub mod geodesic;
pub mod hyperbolic;
pub mod manifold;
pub mod qi;
pub mod trees;

pub use error::{Error, Result};
