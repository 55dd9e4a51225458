//! Numerical tools for fractal dimension on self-similar sets.
//!
//! [`geometry`] builds attractors and samples their natural measures,
//! [`functions`] evaluates rough functions on them, [`dimension`] estimates
//! set and graph dimensions, [`covering`] bounds covering numbers of graphs
//! and [`harness`] runs parameter sweeps.

pub mod covering;
pub mod dimension;
pub mod error;
pub mod functions;
pub mod geometry;
pub mod harness;
pub mod rng;
pub mod tree;

pub use error::{FracError, FracResult};
