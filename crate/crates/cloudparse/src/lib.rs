//! Boundary parsing from noisy point clouds: a PCA shape backbone with a
//! Gaussian-MRF deformation layer, optimized by dynamic programming over
//! data-driven contour hypotheses.

pub mod candidates;
pub mod dp;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod learning;
pub mod pipeline;
pub mod preprocess;
pub mod shape_model;
pub mod svg;
pub mod synth;

pub use error::{Error, Result};
