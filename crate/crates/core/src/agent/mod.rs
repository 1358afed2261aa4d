//! Agent-side framework: response grammar, onlooker, memory, scripted
//! baselines, the episode loop and the external-agent wire protocol.

pub mod episode;
pub mod memory;
pub mod onlooker;
pub mod planner;
pub mod protocol;
pub mod scripted;
pub mod vocab;

use thiserror::Error;

use crate::sim::observe::Observation;
use crate::sim::tasks::Task;

pub use episode::{run_episode, EpisodeConfig, StepRecord, TrajectoryRecord};
pub use memory::HistoryMemory;
pub use onlooker::{check_environment, summarize_behavior, BehaviorSummary, ErrorRepository, Reminder, Remediator};
pub use scripted::ScriptedAgent;
pub use vocab::{encode, encode_action, parse_response, FormatError, ParsedAction, Response};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("agent i/o failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Everything an agent sees when choosing its next response.
pub struct StepContext<'a> {
    pub task: &'a Task,
    pub step: u32,
    pub observation: &'a Observation,
    pub memory: &'a HistoryMemory,
    pub reminder: Option<&'a Reminder>,
}

pub trait AgentPolicy {
    fn id(&self) -> String;

    /// Whether the episode loop runs the onlooker's environment check and
    /// remediation for this agent.
    fn uses_onlooker(&self) -> bool {
        true
    }

    fn begin(&mut self, task: &Task) -> Result<(), AgentError>;

    fn act(&mut self, ctx: &StepContext<'_>) -> Result<Response, AgentError>;
}

impl<A: AgentPolicy + ?Sized> AgentPolicy for Box<A> {
    fn id(&self) -> String {
        (**self).id()
    }
    fn uses_onlooker(&self) -> bool {
        (**self).uses_onlooker()
    }
    fn begin(&mut self, task: &Task) -> Result<(), AgentError> {
        (**self).begin(task)
    }
    fn act(&mut self, ctx: &StepContext<'_>) -> Result<Response, AgentError> {
        (**self).act(ctx)
    }
}
