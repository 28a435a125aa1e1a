//! Unsupervised retinal vessel analysis: segmentation, centerlines, vessel
//! caliber, pulsation tracking and heart-rate estimation, with evaluation
//! metrics and a synthetic fundus generator for ground truth.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Numeric kernels index several arrays in step; explicit indices read better.
#![allow(clippy::needless_range_loop)]

pub mod caliper;
pub mod cli;
pub mod config;
pub mod error;
pub mod metrics;
pub mod pulse;
pub mod raster;
pub mod segment;
pub mod skeleton;
pub mod synthgen;

pub use error::{Error, Result};
