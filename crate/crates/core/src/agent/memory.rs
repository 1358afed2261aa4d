use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::onlooker::BehaviorSummary;
use crate::sim::observe::Observation;

pub const DEFAULT_HISTORY: usize = 15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEntry {
    pub step: u32,
    pub observation: Observation,
    pub summary: BehaviorSummary,
}

/// Bounded step history; the oldest entry is evicted first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryMemory {
    capacity: usize,
    entries: VecDeque<MemoryEntry>,
}

impl Default for HistoryMemory {
    fn default() -> Self {
        Self::new(DEFAULT_HISTORY)
    }
}

impl HistoryMemory {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, step: u32, observation: Observation, summary: BehaviorSummary) {
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(MemoryEntry {
            step,
            observation,
            summary,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn entries(&self) -> impl Iterator<Item = &MemoryEntry> {
        self.entries.iter()
    }

    pub fn last(&self) -> Option<&MemoryEntry> {
        self.entries.back()
    }
}
