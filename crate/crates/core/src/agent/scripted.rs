//! Scripted baselines that follow a task's known plan.

use super::planner::{
    naive_point, pick_bin_point, true_hull, true_interior, Intent, IntentOp, Planner, PlannerStyle, Purpose,
};
use super::vocab::{encode, ParsedAction, Response};
use super::{AgentError, AgentPolicy, StepContext};
use crate::sim::observe::Observation;
use crate::sim::state::Action;
use crate::sim::tasks::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordMode {
    /// Inverse-scales perceived geometry back to screen coordinates and aims
    /// at a visible part of the target.
    Compensated,
    /// Uses the perceived center as if it were a screen coordinate.
    Perceived,
}

/// Plan-following agent. `oracle()` is careful; `naive()` models the usual
/// fragile behaviors.
#[derive(Debug, Clone)]
pub struct ScriptedAgent {
    name: &'static str,
    style: PlannerStyle,
    coords: CoordMode,
    onlooker: bool,
    planner: Option<Planner>,
}

impl ScriptedAgent {
    pub fn oracle() -> Self {
        Self {
            name: "scripted_oracle",
            style: PlannerStyle::CAREFUL,
            coords: CoordMode::Compensated,
            onlooker: true,
            planner: None,
        }
    }

    pub fn naive() -> Self {
        Self {
            name: "scripted_naive",
            style: PlannerStyle::NAIVE,
            coords: CoordMode::Perceived,
            onlooker: false,
            planner: None,
        }
    }

    fn point(&self, obs: &Observation, intent: &Intent) -> Option<(i32, i32)> {
        let target = intent.target?;
        match self.coords {
            CoordMode::Perceived => Some(naive_point(&target)),
            CoordMode::Compensated => {
                let region = true_interior(&target, obs);
                let covers: Vec<_> = if intent.purpose == Purpose::DismissPopup {
                    obs.elements
                        .iter()
                        .filter(|v| v.interactable)
                        .map(|v| true_hull(&v.bounds, obs))
                        .collect()
                } else {
                    intent.covers.iter().map(|c| true_hull(c, obs)).collect()
                };
                pick_bin_point(&region, &covers).or_else(|| {
                    (intent.purpose == Purpose::DismissPopup)
                        .then(|| pick_bin_point(&region, &[]))
                        .flatten()
                })
            }
        }
    }

    fn to_action(&self, obs: &Observation, intent: &Intent) -> Option<Action> {
        Some(match &intent.op {
            IntentOp::Click { double } => {
                let (x, y) = self.point(obs, intent)?;
                if *double {
                    Action::LeftDouble { x, y }
                } else {
                    Action::Click { x, y }
                }
            }
            IntentOp::Type(t) => Action::Type { text: t.clone() },
            IntentOp::Hotkey(k) => Action::Hotkey { keys: k.clone() },
            IntentOp::Done => Action::Done,
            IntentOp::Wait => Action::Wait,
        })
    }
}

pub fn thought_for(op: &IntentOp) -> &'static str {
    match op {
        IntentOp::Click { .. } => "i should click the target",
        IntentOp::Type(_) => "i should type",
        IntentOp::Hotkey(_) => "i should press",
        IntentOp::Done => "done",
        IntentOp::Wait => "next",
    }
}

impl AgentPolicy for ScriptedAgent {
    fn id(&self) -> String {
        self.name.to_string()
    }

    fn uses_onlooker(&self) -> bool {
        self.onlooker
    }

    fn begin(&mut self, task: &Task) -> Result<(), AgentError> {
        self.planner = Some(Planner::new(self.style, task.plan()));
        Ok(())
    }

    fn act(&mut self, ctx: &StepContext<'_>) -> Result<Response, AgentError> {
        let mut planner = self
            .planner
            .take()
            .ok_or_else(|| AgentError::Protocol("act called before begin".into()))?;
        let intent = planner.next(ctx.observation);
        let action = match self.to_action(ctx.observation, &intent) {
            Some(a) => {
                planner.commit(&intent, true);
                a
            }
            None => Action::Wait,
        };
        self.planner = Some(planner);
        let parsed = ParsedAction {
            thought: thought_for(&intent.op).to_string(),
            action,
        };
        encode(&parsed).map_err(|e| AgentError::Protocol(format!("scripted action does not encode: {e}")))
    }
}
