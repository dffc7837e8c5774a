//! Scatter-plot data extraction.
//!
//! The crate generates synthetic scatter plots with exact ground truth,
//! recovers their elements with classical image processing, fits robust
//! per-axis affine calibrations from tick pairs and scores the extracted
//! tables.

pub mod decode;
pub mod error;
pub mod eval;
pub mod model;
pub mod raster;
pub mod seed;
pub mod synth;

pub use error::{Error, Result, Stage};
pub use model::*;
