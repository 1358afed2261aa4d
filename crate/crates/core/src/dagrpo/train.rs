use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::math::{normalize_advantages, objective_gradient, ClipConfig};
use super::policy::LinearSoftmaxPolicy;
use super::replay::{inject_replay, ReplayBuffer};
use super::rollout::{rollout_group, RolloutGroup};
use super::token::{prior_policy, Decoding, PriorConfig, TokenAgent};
use crate::agent::episode::{run_episode, EpisodeConfig};
use crate::agent::memory::DEFAULT_HISTORY;
use crate::corruption::{Condition, CorruptionKind, CorruptionSpec};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, sha256_hex};
use crate::sim::tasks::Task;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("unknown condition `{0}` in the corruption pool")]
    UnknownCondition(String),
    #[error("non-finite objective at iteration {iteration}")]
    NonFinite { iteration: u64 },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: u32,
    /// Tasks visited per epoch, cycling through shuffled copies of the suite.
    pub tasks_per_epoch: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub grad_accumulation: usize,
    pub inner_updates: usize,
    pub temperature: f64,
    pub group_size: usize,
    pub clip: ClipConfig,
    pub adam: AdamConfig,
    /// Condition ids drawn uniformly per rollout: `clean` or a corruption kind
    /// at default parameters.
    pub pool: Vec<String>,
    pub max_steps: u32,
    pub replay_capacity: usize,
    pub prior: PriorConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 15,
            tasks_per_epoch: 128,
            batch_size: 1,
            learning_rate: 1e-6,
            grad_accumulation: 4,
            inner_updates: 1,
            temperature: 1.0,
            group_size: 4,
            clip: ClipConfig::default(),
            adam: AdamConfig::default(),
            pool: Self::full_pool(),
            max_steps: 10,
            replay_capacity: 8,
            prior: PriorConfig::default(),
        }
    }
}

impl TrainConfig {
    /// Clean plus every corruption kind.
    pub fn full_pool() -> Vec<String> {
        std::iter::once("clean".to_string())
            .chain(CorruptionKind::ALL.iter().map(|k| k.id().to_string()))
            .collect()
    }

    /// Small, fast configuration sized for the linear token policy.
    pub fn toy() -> Self {
        Self {
            tasks_per_epoch: 40,
            learning_rate: 0.05,
            grad_accumulation: 2,
            adam: AdamConfig {
                eps: 1e-3,
                ..AdamConfig::default()
            },
            ..Self::default()
        }
    }

    /// The same run restricted to clean rollouts: plain GRPO with replay.
    pub fn clean_only(mut self) -> Self {
        self.pool = vec!["clean".into()];
        self
    }

    pub fn from_toml(text: &str) -> Result<Self, TrainError> {
        let cfg: Self = toml::from_str(text).map_err(|e| TrainError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        let positive = [
            ("tasks_per_epoch", self.tasks_per_epoch),
            ("batch_size", self.batch_size),
            ("grad_accumulation", self.grad_accumulation),
            ("inner_updates", self.inner_updates),
            ("group_size", self.group_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(TrainError::Config(format!("{name} must be positive")));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(TrainError::Config("learning_rate must be positive".into()));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(TrainError::Config("temperature must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.clip.eps_low) || !(self.clip.eps_high >= 0.0) {
            return Err(TrainError::Config("clip bounds must satisfy 0 <= eps_low < 1 and eps_high >= 0".into()));
        }
        if self.clip.kl_coefficient != 0.0 {
            return Err(TrainError::Config("a KL penalty is not supported; kl_coefficient must be 0".into()));
        }
        if self.max_steps == 0 {
            return Err(TrainError::Config("max_steps must be positive".into()));
        }
        if self.pool.is_empty() {
            return Err(TrainError::Config("pool must not be empty".into()));
        }
        resolve_pool(&self.pool)?;
        Ok(())
    }

    pub fn hash(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("config serializes"))
    }

    pub fn episode(&self) -> EpisodeConfig {
        EpisodeConfig {
            max_steps: Some(self.max_steps),
            history: DEFAULT_HISTORY,
        }
    }
}

pub fn resolve_condition(id: &str) -> Result<Condition, TrainError> {
    if id == "clean" {
        return Ok(Condition::clean());
    }
    CorruptionKind::parse(id)
        .map(|k| Condition::single(CorruptionSpec::default_for(k)))
        .ok_or_else(|| TrainError::UnknownCondition(id.to_string()))
}

pub fn resolve_pool(ids: &[String]) -> Result<Vec<Condition>, TrainError> {
    ids.iter().map(|id| resolve_condition(id)).collect()
}

/// One row of the training curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: u64,
    pub epoch: u32,
    /// Mean total reward of the fresh rollouts, before replay.
    pub mean_reward: f64,
    pub objective: f64,
    pub clipped_fraction: f64,
    pub replayed: usize,
    pub buffer_size: usize,
    pub wall_ms: u64,
}

pub const CURVE_HEADER: &str = "iteration,epoch,mean_reward,objective,clipped_fraction,replayed,buffer_size,wall_ms";

impl CurvePoint {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{},{},{}",
            self.iteration,
            self.epoch,
            self.mean_reward,
            self.objective,
            self.clipped_fraction,
            self.replayed,
            self.buffer_size,
            self.wall_ms
        )
    }
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from(CURVE_HEADER);
    s.push('\n');
    for p in points {
        s.push_str(&p.csv_row());
        s.push('\n');
    }
    s
}

/// What one training iteration saw and did.
#[derive(Debug, Clone)]
pub struct Iteration {
    pub point: CurvePoint,
    /// Groups after replay injection, as used by the update.
    pub groups: Vec<RolloutGroup>,
    pub replaced: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
struct Adam<T> {
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
}

impl<T: Scalar> Adam<T> {
    fn new(n: usize) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
        }
    }

    /// Gradient ascent step.
    fn step(&mut self, w: &mut [T], g: &[T], lr: f64, cfg: &AdamConfig) {
        self.t += 1;
        let (b1, b2) = (T::of(cfg.beta1), T::of(cfg.beta2));
        let c1 = T::one() - b1.powi(self.t);
        let c2 = T::one() - b2.powi(self.t);
        let (lr, eps, wd) = (T::of(lr), T::of(cfg.eps), T::of(cfg.weight_decay));
        for i in 0..w.len() {
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * g[i];
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * g[i] * g[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            w[i] = w[i] + lr * mh / (vh.sqrt() + eps) - lr * wd * w[i];
        }
    }
}

/// DA-GRPO trainer over a task list and a corruption pool.
pub struct Trainer<'s, T: Scalar> {
    pub config: TrainConfig,
    tasks: &'s [Task],
    pool: Vec<Condition>,
    seed: u64,
    policy: LinearSoftmaxPolicy<T>,
    buffer: ReplayBuffer,
    adam: Adam<T>,
    accum: Vec<T>,
    accum_count: usize,
    schedule: Vec<usize>,
    cursor: usize,
    epoch: u32,
    iteration: u64,
    replay_rng: ChaCha8Rng,
    started: Instant,
}

impl<'s, T: Scalar> Trainer<'s, T> {
    pub fn new(config: TrainConfig, tasks: &'s [Task], seed: u64) -> Result<Self, TrainError> {
        let mut policy = prior_policy::<T>(&config.prior);
        policy.temperature = T::of(config.temperature);
        Self::with_policy(config, tasks, seed, policy)
    }

    pub fn with_policy(
        config: TrainConfig,
        tasks: &'s [Task],
        seed: u64,
        policy: LinearSoftmaxPolicy<T>,
    ) -> Result<Self, TrainError> {
        config.validate()?;
        if tasks.is_empty() {
            return Err(TrainError::Config("no tasks to train on".into()));
        }
        let pool = resolve_pool(&config.pool)?;
        let n = policy.weights.len();
        Ok(Self {
            buffer: ReplayBuffer::new(config.replay_capacity),
            config,
            tasks,
            pool,
            seed,
            policy,
            adam: Adam::new(n),
            accum: vec![T::zero(); n],
            accum_count: 0,
            schedule: Vec::new(),
            cursor: 0,
            epoch: 0,
            iteration: 0,
            replay_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, &["replay"])),
            started: Instant::now(),
        })
    }

    pub fn policy(&self) -> &LinearSoftmaxPolicy<T> {
        &self.policy
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    /// For warm-starting the buffer with known successes.
    pub fn buffer_mut(&mut self) -> &mut ReplayBuffer {
        &mut self.buffer
    }

    fn iterations_per_epoch(&self) -> usize {
        self.config.tasks_per_epoch.div_ceil(self.config.batch_size)
    }

    fn start_epoch(&mut self) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &["schedule", &self.epoch.to_string()]));
        let mut s = Vec::with_capacity(self.config.tasks_per_epoch);
        while s.len() < self.config.tasks_per_epoch {
            let mut perm: Vec<usize> = (0..self.tasks.len()).collect();
            perm.shuffle(&mut rng);
            s.extend(perm);
        }
        s.truncate(self.config.tasks_per_epoch);
        self.schedule = s;
        self.cursor = 0;
    }

    /// Runs one iteration, or returns `None` once all epochs are done.
    pub fn step(&mut self) -> Result<Option<Iteration>, TrainError> {
        if self.epoch >= self.config.epochs {
            return Ok(None);
        }
        if self.cursor == 0 && self.schedule.is_empty() {
            self.start_epoch();
        }
        let batch: Vec<usize> = self.schedule[self.cursor..(self.cursor + self.config.batch_size).min(self.schedule.len())].to_vec();
        let it_label = self.iteration.to_string();
        let episode = self.config.episode();

        let old = self.policy.clone();
        let mut groups: Vec<RolloutGroup> = batch
            .iter()
            .enumerate()
            .map(|(b, &ti)| {
                let s = derive_seed(self.seed, &["rollout", &it_label, &b.to_string()]);
                rollout_group(&old, &self.tasks[ti], &self.pool, self.config.group_size, s, &episode)
            })
            .collect();
        let fresh: Vec<f64> = groups.iter().flat_map(RolloutGroup::rewards).collect();
        let mean_reward = fresh.iter().sum::<f64>() / fresh.len().max(1) as f64;
        let replaced = inject_replay(&mut groups, &mut self.buffer, &mut self.replay_rng);

        let advantages: Vec<Vec<T>> = groups
            .iter()
            .map(|g| normalize_advantages(&g.rewards().into_iter().map(T::of).collect::<Vec<_>>()).values)
            .collect();
        let nb = T::of(groups.len() as f64);
        let mut objective = 0.0;
        let mut clipped = 0.0;
        for inner in 0..self.config.inner_updates {
            let mut value = T::zero();
            let mut clipped_tokens = 0.0;
            let mut tokens = 0usize;
            for (g, adv) in groups.iter().zip(&advantages) {
                let (v, grad) = objective_gradient(&self.policy, &old, &g.token_slices(), adv, &self.config.clip);
                value = value + v.value / nb;
                clipped_tokens += v.clipped_fraction * v.tokens as f64;
                tokens += v.tokens;
                for (a, d) in self.accum.iter_mut().zip(grad) {
                    *a = *a + d / nb;
                }
            }
            if !value.is_finite() {
                return Err(TrainError::NonFinite { iteration: self.iteration });
            }
            if inner == 0 {
                objective = value.to_f64_lossy();
                clipped = if tokens == 0 { 0.0 } else { clipped_tokens / tokens as f64 };
            }
            self.accum_count += 1;
            if self.accum_count == self.config.grad_accumulation {
                self.apply_update();
            }
        }

        let point = CurvePoint {
            iteration: self.iteration,
            epoch: self.epoch,
            mean_reward,
            objective,
            clipped_fraction: clipped,
            replayed: replaced.len(),
            buffer_size: self.buffer.len(),
            wall_ms: self.started.elapsed().as_millis() as u64,
        };
        log::debug!("{}", point.csv_row());
        self.iteration += 1;
        self.cursor += batch.len();
        if self.cursor >= self.schedule.len() {
            self.epoch += 1;
            self.schedule.clear();
            self.cursor = 0;
        }
        Ok(Some(Iteration { point, groups, replaced }))
    }

    fn apply_update(&mut self) {
        let k = T::of(self.accum_count as f64);
        for a in &mut self.accum {
            *a = *a / k;
        }
        self.adam.step(&mut self.policy.weights, &self.accum, self.config.learning_rate, &self.config.adam);
        self.accum.iter_mut().for_each(|a| *a = T::zero());
        self.accum_count = 0;
    }

    /// Runs every remaining iteration. A partially accumulated gradient is
    /// applied at the end.
    pub fn run(mut self) -> Result<TrainOutcome<T>, TrainError> {
        let mut curve = Vec::with_capacity(self.iterations_per_epoch() * self.config.epochs as usize);
        while let Some(it) = self.step()? {
            curve.push(it.point);
        }
        if self.accum_count > 0 {
            self.apply_update();
        }
        if !self.policy.is_finite() {
            return Err(TrainError::NonFinite { iteration: self.iteration });
        }
        Ok(TrainOutcome {
            checkpoint: Checkpoint::new(&self.config, self.seed, self.policy),
            curve,
        })
    }
}

pub struct TrainOutcome<T: Scalar> {
    pub checkpoint: Checkpoint<T>,
    pub curve: Vec<CurvePoint>,
}

pub const CHECKPOINT_FORMAT: &str = "deskbench-token-policy";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Checkpoint<T: Scalar> {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub config: TrainConfig,
    pub seed: u64,
    pub policy: LinearSoftmaxPolicy<T>,
}

impl<T: Scalar> Checkpoint<T> {
    pub fn new(config: &TrainConfig, seed: u64, policy: LinearSoftmaxPolicy<T>) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            config_hash: config.hash(),
            config: config.clone(),
            seed,
            policy,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TrainError> {
        let c: Self = serde_json::from_str(text).map_err(|e| TrainError::Checkpoint(e.to_string()))?;
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(TrainError::Checkpoint(format!("unsupported format {} v{}", c.format, c.version)));
        }
        if c.config.hash() != c.config_hash {
            return Err(TrainError::Checkpoint("config hash mismatch".into()));
        }
        if c.policy.weights.len() != c.policy.parameter_count() || !c.policy.is_finite() {
            return Err(TrainError::Checkpoint("malformed policy weights".into()));
        }
        Ok(c)
    }
}

/// Greedy-decoding success rate over every task × condition × seed.
pub fn success_rate<T: Scalar>(
    policy: &LinearSoftmaxPolicy<T>,
    tasks: &[Task],
    conditions: &[Condition],
    seeds: &[u64],
    episode: &EpisodeConfig,
) -> f64 {
    let mut wins = 0usize;
    let mut total = 0usize;
    for task in tasks {
        for c in conditions {
            for &s in seeds {
                let mut agent = TokenAgent::new(policy, Decoding::Greedy, s);
                let r = run_episode(&mut agent, task, c, s, episode);
                wins += usize::from(r.success == 1);
                total += 1;
            }
        }
    }
    if total == 0 {
        0.0
    } else {
        wins as f64 / total as f64
    }
}

/// Corrupted conditions used for held-out evaluation.
pub fn held_out_conditions() -> Vec<Condition> {
    CorruptionKind::ALL
        .iter()
        .map(|&k| Condition::single(CorruptionSpec::default_for(k)))
        .collect()
}

/// Episode seeds for held-out evaluation, disjoint from training streams.
pub fn held_out_seeds(base: u64, n: usize) -> Vec<u64> {
    (0..n).map(|i| derive_seed(base, &["held-out", &i.to_string()])).collect()
}
