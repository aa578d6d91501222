pub mod bie;
pub mod error;
pub mod experiments;
pub mod farfield;
pub mod geom2;
pub mod geometry;
pub mod kernels;
pub mod lab;
pub mod linalg;
pub mod medium;
pub mod par;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
