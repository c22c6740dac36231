//! The filter recursion: prediction, measurement update, and the
//! bookkeeping that keeps the state bounded.

mod cap;
pub mod kdtree;
pub mod pedestrian;
mod predict;
pub mod seplik;
mod update;

pub use cap::{cap_and_recycle, CapConfig};
pub use predict::{pmb_predict, BirthModel, MotionModel, ParticleMotion, Transition};
pub use seplik::{seplik_update, zhat_gate, GateClass, RangeMeasurement};
pub use update::{pmb_update, UpdateConfig, UpdateReport};
