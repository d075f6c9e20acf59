//! Coverage viewpoint planning and scan-tour ordering on 2D occupancy grids.

// Parameter checks are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline_bcd;
pub mod cli;
pub mod config;
pub mod coverage;
pub mod error;
pub mod gridmap;
pub mod pathplan;
pub mod pipeline;
pub mod render;
pub mod tour;
pub mod visibility;

pub use error::{Error, Result};
