//! Deterministic simulated desktop: state, rendering, actions and tasks.

pub mod apps;
pub mod element;
pub mod network;
pub mod observe;
pub mod state;
pub mod tasks;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use element::{AppId, Effect, ElementId, ElementKind, UiElement};
pub use network::{Destination, NetRule, NetworkRuleSet};
pub use observe::{render, Cell, ColorCode, ElementView, Observation, PixelGrid};
pub use state::{Action, EnvState, ExternalEvent, Termination};
pub use tasks::{evaluate, init_task, init_task_by_id, PlanStep, Task, TaskSuite};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("unknown task '{0}'")]
    NotFound(String),
    #[error("episode already terminated")]
    Terminal,
    #[error("state is not terminal")]
    NotTerminal,
    #[error("invalid task manifest: {0}")]
    Manifest(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepOutcome {
    pub observation: Observation,
    pub terminal: bool,
    pub events: Vec<ExternalEvent>,
}

/// Applies one action and renders the next clean observation.
pub fn step(state: &mut EnvState, action: &Action) -> Result<StepOutcome, SimError> {
    let events = state.advance(action)?;
    Ok(StepOutcome {
        observation: render(state),
        terminal: state.is_terminal(),
        events,
    })
}

pub fn network_reachable(state: &EnvState, destination: Destination) -> bool {
    state.network_reachable(destination)
}

pub fn interactable_targets(state: &EnvState) -> Vec<(ElementId, crate::geom::Rect)> {
    state.interactable_targets()
}
