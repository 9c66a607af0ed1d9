#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod distortion;
pub mod error;
pub mod features;
pub mod flatten;
pub mod mesh;
pub mod pipeline;
pub mod signal;
mod util;

pub use error::{Error, Result};
pub use features::FeatureVector;
pub use util::fmt_g9;
