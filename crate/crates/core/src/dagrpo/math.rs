//! Rewards, group-normalized advantages, the asymmetric clipped objective
//! and its analytic gradient.

use serde::{Deserialize, Serialize};

use super::policy::{LinearSoftmaxPolicy, TokenSample};
use crate::agent::episode::TrajectoryRecord;
use crate::scalar::Scalar;

/// Guard added to the group standard deviation.
pub const STD_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClipConfig {
    pub eps_low: f64,
    pub eps_high: f64,
    pub kl_coefficient: f64,
}

impl Default for ClipConfig {
    fn default() -> Self {
        Self {
            eps_low: 0.2,
            eps_high: 0.3,
            kl_coefficient: 0.0,
        }
    }
}

impl ClipConfig {
    pub fn lower<T: Scalar>(&self) -> T {
        T::one() - T::of(self.eps_low)
    }

    pub fn upper<T: Scalar>(&self) -> T {
        T::one() + T::of(self.eps_high)
    }

    pub fn clip<T: Scalar>(&self, ratio: T) -> T {
        ratio.max(self.lower()).min(self.upper())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reward {
    pub success: i32,
    pub format: i32,
}

impl Reward {
    pub fn total(&self) -> i32 {
        self.success + self.format
    }
}

/// Success counts only for an evaluator score of exactly 1.0; any malformed
/// response costs -1.
pub fn compute_reward(record: &TrajectoryRecord) -> Reward {
    let success = i32::from(record.protocol_error.is_none() && record.score == 1.0);
    let format = if record.steps.iter().any(|s| s.format_error.is_some()) {
        -1
    } else {
        0
    };
    Reward { success, format }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Advantages<T: Scalar> {
    pub mean: T,
    pub std: T,
    /// One value per member, shared by all of that member's tokens.
    pub values: Vec<T>,
}

/// `(r - μ) / (σ + 1e-8)` with the population standard deviation.
pub fn normalize_advantages<T: Scalar>(rewards: &[T]) -> Advantages<T> {
    if rewards.is_empty() {
        return Advantages {
            mean: T::zero(),
            std: T::zero(),
            values: Vec::new(),
        };
    }
    let n = T::of(rewards.len() as f64);
    let mean = rewards.iter().copied().sum::<T>() / n;
    let var = rewards.iter().map(|&r| (r - mean) * (r - mean)).sum::<T>() / n;
    let std = var.sqrt();
    let denom = std + T::of(STD_EPS);
    Advantages {
        mean,
        std,
        values: rewards.iter().map(|&r| (r - mean) / denom).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue<T> {
    pub value: T,
    /// Share of tokens whose clipped branch was the binding one.
    pub clipped_fraction: f64,
    pub tokens: usize,
}

/// Per-token factor `f` with `min(rÂ, clip(r)Â) = Â·f`.
fn factor<T: Scalar>(ratio: T, adv: T, clip: &ClipConfig) -> T {
    let c = clip.clip(ratio);
    if adv >= T::zero() {
        ratio.min(c)
    } else {
        ratio.max(c)
    }
}

fn evaluate<T: Scalar>(
    new: &LinearSoftmaxPolicy<T>,
    old: &LinearSoftmaxPolicy<T>,
    members: &[&[TokenSample]],
    advantages: &[T],
    clip: &ClipConfig,
    mut grad: Option<&mut [T]>,
) -> ObjectiveValue<T> {
    assert_eq!(members.len(), advantages.len(), "one advantage per member");
    let used: Vec<usize> = (0..members.len()).filter(|&i| !members[i].is_empty()).collect();
    if used.len() < members.len() {
        log::warn!("{} empty responses excluded from the objective", members.len() - used.len());
    }
    if used.is_empty() {
        return ObjectiveValue {
            value: T::zero(),
            clipped_fraction: 0.0,
            tokens: 0,
        };
    }
    let g = T::of(used.len() as f64);
    let mut total = T::zero();
    let mut clipped = 0usize;
    let mut tokens = 0usize;
    for &i in &used {
        let adv = advantages[i];
        let n = T::of(members[i].len() as f64);
        let mut sum_f = T::zero();
        for s in members[i] {
            let lp_new = new.log_prob(&s.context, s.token);
            let lp_old = old.log_prob(&s.context, s.token);
            let ratio = (lp_new - lp_old).exp();
            let f = factor(ratio, adv, clip);
            sum_f = sum_f + f;
            tokens += 1;
            if f != ratio {
                clipped += 1;
            } else if let Some(gr) = grad.as_deref_mut() {
                if adv != T::zero() {
                    new.accumulate_log_prob_grad(&s.context, s.token, adv * ratio / (g * n), gr);
                }
            }
        }
        total = total + adv * (sum_f / n);
    }
    ObjectiveValue {
        value: total / g,
        clipped_fraction: clipped as f64 / tokens as f64,
        tokens,
    }
}

/// `(1/G) Σ_i (1/|o_i|) Σ_j min(r_ij Â_i, clip(r_ij, 1-ε_low, 1+ε_high) Â_i)`,
/// with the member's advantage factored out of its token sum.
pub fn dagrpo_objective<T: Scalar>(
    new: &LinearSoftmaxPolicy<T>,
    old: &LinearSoftmaxPolicy<T>,
    members: &[&[TokenSample]],
    advantages: &[T],
    clip: &ClipConfig,
) -> ObjectiveValue<T> {
    evaluate(new, old, members, advantages, clip, None)
}

/// Objective value and its exact gradient with respect to `new`'s weights.
/// Tokens on the binding clipped branch contribute nothing.
pub fn objective_gradient<T: Scalar>(
    new: &LinearSoftmaxPolicy<T>,
    old: &LinearSoftmaxPolicy<T>,
    members: &[&[TokenSample]],
    advantages: &[T],
    clip: &ClipConfig,
) -> (ObjectiveValue<T>, Vec<T>) {
    let mut grad = vec![T::zero(); new.weights.len()];
    let v = evaluate(new, old, members, advantages, clip, Some(&mut grad));
    (v, grad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn advantages_of_one_success() {
        let a = normalize_advantages(&[1.0f64, 0.0, 0.0, 0.0]);
        let want = [1.7321, -0.5774, -0.5774, -0.5774];
        for (x, w) in a.values.iter().zip(want) {
            assert!((x - w).abs() < 1e-4);
        }
        assert!(normalize_advantages(&[1.0f64; 4]).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn clipped_contributions() {
        let c = ClipConfig::default();
        assert_eq!(factor(1.5, 1.0, &c) * 1.0, 1.3);
        assert_eq!(factor(0.5, -1.0, &c) * -1.0, -0.8);
        assert_eq!(factor(0.5, 1.0, &c), 0.5);
        assert_eq!(factor(1.5, -1.0, &c), 1.5);
    }
}
