//! Poisson multi-Bernoulli multi-object tracking with pluggable occlusion
//! models.
// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod bernoulli;
pub mod density;
pub mod error;
pub mod experiment;
pub mod foursquare;
pub mod geometry;
pub mod highway;
pub mod metrics;
pub mod model;
pub mod occlusion;
pub mod par;
pub mod selftest;
pub mod trackers;

pub use error::{Error, Result};
