use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::math::{compute_reward, Reward};
use super::policy::{LinearSoftmaxPolicy, TokenSample};
use super::token::{Decoding, TokenAgent};
use crate::agent::episode::{run_episode, EpisodeConfig, TrajectoryRecord};
use crate::corruption::Condition;
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::sim::tasks::Task;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub record: TrajectoryRecord,
    /// All tokens of the episode's responses, in order, with contexts.
    pub tokens: Vec<TokenSample>,
    pub replayed: bool,
}

impl Member {
    pub fn reward(&self) -> Reward {
        compute_reward(&self.record)
    }

    pub fn is_success(&self) -> bool {
        self.reward().success == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RolloutGroup {
    pub task_id: String,
    pub members: Vec<Member>,
}

impl RolloutGroup {
    pub fn rewards(&self) -> Vec<f64> {
        self.members.iter().map(|m| f64::from(m.reward().total())).collect()
    }

    pub fn has_success(&self) -> bool {
        self.members.iter().any(Member::is_success)
    }

    pub fn token_slices(&self) -> Vec<&[TokenSample]> {
        self.members.iter().map(|m| m.tokens.as_slice()).collect()
    }
}

/// Runs `group_size` sampled episodes of `task`, each in a condition drawn
/// uniformly and independently from `pool`.
pub fn rollout_group<T: Scalar>(
    policy: &LinearSoftmaxPolicy<T>,
    task: &Task,
    pool: &[Condition],
    group_size: usize,
    seed: u64,
    episode: &EpisodeConfig,
) -> RolloutGroup {
    assert!(!pool.is_empty(), "corruption pool must not be empty");
    let mut draw = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["pool"]));
    let members = (0..group_size)
        .map(|i| {
            let condition = &pool[draw.random_range(0..pool.len())];
            let label = i.to_string();
            let env_seed = derive_seed(seed, &["env", &label]);
            let mut agent = TokenAgent::new(policy, Decoding::Sample, derive_seed(seed, &["decode", &label]));
            let record = run_episode(&mut agent, task, condition, env_seed, episode);
            Member {
                record,
                tokens: agent.take_trace(),
                replayed: false,
            }
        })
        .collect();
    RolloutGroup {
        task_id: task.id.clone(),
        members,
    }
}
