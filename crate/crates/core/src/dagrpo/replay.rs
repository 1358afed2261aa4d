use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rollout::{Member, RolloutGroup};

/// Per-task FIFO cache of successful trajectories.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    tasks: BTreeMap<String, VecDeque<Member>>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            tasks: BTreeMap::new(),
        }
    }

    /// Stores `member` if it succeeded. Returns whether it was stored.
    pub fn insert(&mut self, task_id: &str, member: &Member) -> bool {
        if !member.is_success() || self.capacity == 0 {
            return false;
        }
        let q = self.tasks.entry(task_id.to_string()).or_default();
        if q.len() == self.capacity {
            q.pop_front();
        }
        let mut m = member.clone();
        m.replayed = false;
        q.push_back(m);
        true
    }

    pub fn get(&self, task_id: &str) -> Option<&VecDeque<Member>> {
        self.tasks.get(task_id)
    }

    pub fn len(&self) -> usize {
        self.tasks.values().map(VecDeque::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Caches fresh successes, then gives every group without a success one
/// stored success for its task in place of a uniformly chosen member.
/// Returns `(group, member)` positions that were replaced.
pub fn inject_replay<R: Rng>(groups: &mut [RolloutGroup], buffer: &mut ReplayBuffer, rng: &mut R) -> Vec<(usize, usize)> {
    for g in groups.iter() {
        for m in g.members.iter().filter(|m| !m.replayed) {
            buffer.insert(&g.task_id, m);
        }
    }
    let mut replaced = Vec::new();
    for (gi, g) in groups.iter_mut().enumerate() {
        if g.has_success() || g.members.is_empty() {
            continue;
        }
        let Some(stored) = buffer.get(&g.task_id).filter(|q| !q.is_empty()) else {
            continue;
        };
        let pick = stored[rng.random_range(0..stored.len())].clone();
        let slot = rng.random_range(0..g.members.len());
        g.members[slot] = Member {
            replayed: true,
            ..pick
        };
        replaced.push((gi, slot));
    }
    replaced
}
