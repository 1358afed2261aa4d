//! Corruption-robustness benchmark harness for desktop agents.

pub mod agent;
pub mod corruption;
pub mod dagrpo;
pub mod eval;
pub mod geom;
pub mod scalar;
pub mod seed;
pub mod sim;

pub use geom::Rect;
pub use scalar::Scalar;

pub type TokenPolicy = dagrpo::LinearSoftmaxPolicy<f64>;
pub type TokenPolicyF32 = dagrpo::LinearSoftmaxPolicy<f32>;
pub type PolicyCheckpoint = dagrpo::Checkpoint<f64>;
