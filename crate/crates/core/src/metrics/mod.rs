//! Scoring and detection-file handling.

mod assignment;
mod gospa;
pub mod mot;

pub use assignment::min_cost_assignment;
pub use gospa::{cardinality_ratio, euclidean, gospa, iou_distance, GospaParams, GospaScore};
