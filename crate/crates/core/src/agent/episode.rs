//! The per-episode loop: check, remediate, then act/step/summarize.

use serde::{Deserialize, Serialize};

use super::memory::{HistoryMemory, DEFAULT_HISTORY};
use super::onlooker::{check_environment, summarize_behavior, BehaviorSummary, ErrorRepository, Reminder, Remediator};
use super::vocab::{parse_response, FormatError, ParsedAction, Response};
use super::{AgentPolicy, StepContext};
use crate::corruption::{Condition, CorruptedEnv, CorruptionSpec};
use crate::sim::state::{Action, ExternalEvent, Termination};
use crate::sim::tasks::{evaluate, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// Overrides the task's step budget.
    pub max_steps: Option<u32>,
    pub history: usize,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            max_steps: None,
            history: DEFAULT_HISTORY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    pub response: Response,
    pub parsed: Option<ParsedAction>,
    pub format_error: Option<FormatError>,
    /// The action executed; `wait` when the response failed to parse.
    pub action: Action,
    pub events: Vec<ExternalEvent>,
    pub summary: String,
    pub observation_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub task_id: String,
    pub condition: String,
    pub corruption: Vec<CorruptionSpec>,
    pub seed: u64,
    pub agent: String,
    pub reminder: Option<Reminder>,
    pub remediated: bool,
    pub steps: Vec<StepRecord>,
    pub termination: Option<Termination>,
    /// Raw evaluator score in [0, 1].
    pub score: f64,
    /// 1 when the evaluator returned exactly 1.0.
    pub success: i32,
    /// -1 when any response failed to parse.
    pub format: i32,
    pub protocol_error: Option<String>,
}

impl TrajectoryRecord {
    pub fn reward(&self) -> i32 {
        self.success + self.format
    }

    pub fn responses(&self) -> impl Iterator<Item = &Response> {
        self.steps.iter().map(|s| &s.response)
    }
}

/// Runs one episode of `agent` on `task` under `condition`.
pub fn run_episode<A: AgentPolicy + ?Sized>(
    agent: &mut A,
    task: &Task,
    condition: &Condition,
    seed: u64,
    config: &EpisodeConfig,
) -> TrajectoryRecord {
    let mut env = CorruptedEnv::new(task, condition, seed);
    if let Some(m) = config.max_steps {
        env.state.max_steps = m;
    }
    let mut record = TrajectoryRecord {
        task_id: task.id.clone(),
        condition: condition.id.clone(),
        corruption: condition.specs.clone(),
        seed,
        agent: agent.id(),
        reminder: None,
        remediated: false,
        steps: Vec::new(),
        termination: None,
        score: 0.0,
        success: 0,
        format: 0,
        protocol_error: None,
    };
    let mut memory = HistoryMemory::new(config.history);
    let mut obs = env.observe();
    if agent.uses_onlooker() {
        if let Some(rem) = check_environment(&obs, &ErrorRepository::builtin()) {
            let mut fixer = Remediator::new();
            record.remediated = fixer.remediate(&mut env.state, &rem).is_ok();
            let before = obs;
            obs = env.observe();
            memory.push(
                0,
                before,
                BehaviorSummary {
                    text: format!("Reminder: {}", rem.text),
                },
            );
            record.reminder = Some(rem);
        }
    }
    if let Err(e) = agent.begin(task) {
        record.protocol_error = Some(e.to_string());
        return record;
    }
    while !env.state.is_terminal() {
        let step = env.state.step;
        let ctx = StepContext {
            task,
            step,
            observation: &obs,
            memory: &memory,
            reminder: record.reminder.as_ref(),
        };
        let response = match agent.act(&ctx) {
            Ok(r) => r,
            Err(e) => {
                record.protocol_error = Some(e.to_string());
                break;
            }
        };
        let (parsed, format_error) = match parse_response(&response) {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e)),
        };
        let action = parsed.as_ref().map_or(Action::Wait, |p| p.action.clone());
        if format_error.is_some() {
            record.format = -1;
        }
        let outcome = env.step(&action).expect("episode loop stops at terminal states");
        let summary = summarize_behavior(&obs, &action, &outcome.observation, &outcome.events);
        record.steps.push(StepRecord {
            step: step + 1,
            response,
            parsed,
            format_error,
            action,
            events: outcome.events.clone(),
            summary: summary.text.clone(),
            observation_digest: outcome.observation.meta_digest(),
        });
        memory.push(step + 1, obs, summary);
        obs = outcome.observation;
    }
    record.termination = env.state.terminal;
    if record.protocol_error.is_none() && env.state.is_terminal() {
        record.score = evaluate(task, &env.state).unwrap_or(0.0);
        record.success = i32::from(record.score == 1.0);
    }
    record
}
