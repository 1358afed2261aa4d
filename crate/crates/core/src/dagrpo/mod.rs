//! Corruption-aware GRPO for a small token policy.

pub mod math;
pub mod policy;
pub mod replay;
pub mod rollout;
pub mod token;
pub mod train;

pub use math::{compute_reward, dagrpo_objective, normalize_advantages, objective_gradient, Advantages, ClipConfig, ObjectiveValue, Reward};
pub use policy::{Context, LinearSoftmaxPolicy, TokenSample};
pub use replay::{inject_replay, ReplayBuffer};
pub use rollout::{rollout_group, Member, RolloutGroup};
pub use token::{prior_policy, Decoding, Hint, PriorConfig, TokenAgent};
pub use train::{
    curve_csv, held_out_conditions, held_out_seeds, resolve_condition, resolve_pool, success_rate, AdamConfig, Checkpoint,
    CurvePoint, Iteration, TrainConfig, TrainError, TrainOutcome, Trainer,
};
