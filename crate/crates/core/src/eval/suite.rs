use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::agent::episode::{run_episode, EpisodeConfig};
use crate::agent::{AgentError, AgentPolicy};
use crate::corruption::{Condition, CorruptionKind, CorruptionSpec};
use crate::seed::{derive_seed, sha256_hex};
use crate::sim::state::Termination;
use crate::sim::tasks::Task;

pub const RUN_RECORD_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct BenchmarkSuite {
    pub tasks: Vec<Task>,
    pub conditions: Vec<Condition>,
    pub repeats: u32,
    pub base_seed: u64,
    pub episode: EpisodeConfig,
}

impl BenchmarkSuite {
    pub fn new(tasks: Vec<Task>, conditions: Vec<Condition>, repeats: u32, base_seed: u64) -> Result<Self, EvalError> {
        if tasks.is_empty() {
            return Err(EvalError::NoTasks);
        }
        if conditions.is_empty() {
            return Err(EvalError::NoConditions);
        }
        if repeats == 0 {
            return Err(EvalError::NoRepeats);
        }
        let mut seen = BTreeSet::new();
        for c in &conditions {
            if !seen.insert(c.id.as_str()) {
                return Err(EvalError::DuplicateCondition(c.id.clone()));
            }
        }
        Ok(Self {
            tasks,
            conditions,
            repeats,
            base_seed,
            episode: EpisodeConfig::default(),
        })
    }

    pub fn cell_count(&self) -> usize {
        self.tasks.len() * self.conditions.len() * self.repeats as usize
    }

    /// Hash of everything that determines cell outcomes except the base seed.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Identity<'a> {
            tasks: Vec<(&'a str, &'a str, u32)>,
            conditions: &'a [Condition],
            repeats: u32,
            episode: &'a EpisodeConfig,
        }
        let id = Identity {
            tasks: self
                .tasks
                .iter()
                .map(|t| (t.id.as_str(), t.instruction.as_str(), t.max_steps))
                .collect(),
            conditions: &self.conditions,
            repeats: self.repeats,
            episode: &self.episode,
        };
        sha256_hex(&serde_json::to_vec(&id).expect("suite identity serializes"))
    }
}

/// Seed of one cell. Depends only on the cell's own coordinates, so adding
/// tasks or conditions leaves existing cells unchanged.
pub fn cell_seed(base: u64, task_id: &str, condition_id: &str, repeat: u32) -> u64 {
    derive_seed(base, &["cell", task_id, condition_id, &repeat.to_string()])
}

/// Clean plus one condition per spec. Repeated kinds get `-2`, `-3`, ...
/// suffixes in document order.
pub fn conditions_from_specs(specs: &[CorruptionSpec]) -> Vec<Condition> {
    let mut out = vec![Condition::clean()];
    for (i, spec) in specs.iter().enumerate() {
        let n = specs[..i].iter().filter(|s| s.kind == spec.kind).count();
        let id = if n == 0 {
            spec.kind.id().to_string()
        } else {
            format!("{}-{}", spec.kind.id(), n + 1)
        };
        out.push(Condition::named(id, vec![spec.clone()]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub task_id: String,
    pub condition: String,
    /// Kind used for the per-kind columns; `None` for clean.
    pub kind: Option<CorruptionKind>,
    pub repeat: u32,
    pub seed: u64,
    /// 1.0 on success, else 0.0.
    pub reward: f64,
    pub score: f64,
    pub format: i32,
    pub steps: u32,
    pub terminal: Option<Termination>,
    pub protocol_errors: u32,
    /// SHA-256 of the trajectory's JSON form.
    pub trajectory: Option<String>,
    /// Harness failure; errored cells are excluded from rates.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub version: u32,
    pub suite_hash: String,
    pub agent: String,
    pub base_seed: u64,
    pub repeats: u32,
    pub conditions: Vec<String>,
    pub cells: Vec<CellRecord>,
}

impl RunRecord {
    pub fn key(&self) -> String {
        super::store::run_key(&self.suite_hash, &self.agent, self.base_seed)
    }
}

/// Runs every (task, condition, repeat) cell with a fresh agent from `make`.
/// `on_trajectory` sees each finished episode.
pub fn run_suite<A, F, G>(suite: &BenchmarkSuite, agent_id: &str, mut make: F, mut on_trajectory: G) -> RunRecord
where
    A: AgentPolicy,
    F: FnMut() -> Result<A, AgentError>,
    G: FnMut(&crate::agent::episode::TrajectoryRecord),
{
    let mut cells = Vec::with_capacity(suite.cell_count());
    for task in &suite.tasks {
        for condition in &suite.conditions {
            for repeat in 0..suite.repeats {
                let seed = cell_seed(suite.base_seed, &task.id, &condition.id, repeat);
                let mut cell = CellRecord {
                    task_id: task.id.clone(),
                    condition: condition.id.clone(),
                    kind: condition.kind(),
                    repeat,
                    seed,
                    reward: 0.0,
                    score: 0.0,
                    format: 0,
                    steps: 0,
                    terminal: None,
                    protocol_errors: 0,
                    trajectory: None,
                    error: None,
                };
                match make() {
                    Ok(mut agent) => {
                        let t = run_episode(&mut agent, task, condition, seed, &suite.episode);
                        cell.reward = f64::from(t.success);
                        cell.score = t.score;
                        cell.format = t.format;
                        cell.steps = t.steps.len() as u32;
                        cell.terminal = t.termination;
                        cell.protocol_errors = u32::from(t.protocol_error.is_some());
                        cell.trajectory =
                            Some(sha256_hex(&serde_json::to_vec(&t).expect("trajectory serializes")));
                        on_trajectory(&t);
                    }
                    Err(e) => {
                        log::warn!("cell {}/{}/{repeat}: {e}", task.id, condition.id);
                        cell.error = Some(e.to_string());
                    }
                }
                cells.push(cell);
            }
        }
    }
    RunRecord {
        version: RUN_RECORD_VERSION,
        suite_hash: suite.hash(),
        agent: agent_id.to_string(),
        base_seed: suite.base_seed,
        repeats: suite.repeats,
        conditions: suite.conditions.iter().map(|c| c.id.clone()).collect(),
        cells,
    }
}
