//! Rule-based onlooker: step summaries and initial environment checks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::element::ElementKind;
use crate::sim::network::NetworkRuleSet;
use crate::sim::observe::{ElementView, Observation};
use crate::sim::state::{Action, EnvState, ExternalEvent, PASSWORD};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorSummary {
    pub text: String,
}

fn describe_action(before: &Observation, action: &Action) -> String {
    let target = |x: i32, y: i32| hit(before, x, y).map_or_else(|| "empty space".to_string(), name_of);
    match action {
        Action::Click { x, y } => format!("The user clicked {}", target(*x, *y)),
        Action::LeftDouble { x, y } => format!("The user double-clicked {}", target(*x, *y)),
        Action::RightSingle { x, y } => format!("The user right-clicked {}", target(*x, *y)),
        Action::Drag { x1, y1, x2, y2 } => {
            format!("The user dragged from {} to {}", target(*x1, *y1), target(*x2, *y2))
        }
        Action::Hotkey { keys } => format!("The user pressed {}", keys.join("+")),
        Action::Type { text } => format!("The user typed '{text}'"),
        Action::Scroll { x, y, .. } => format!("The user scrolled over {}", target(*x, *y)),
        Action::Wait => "The user waited".into(),
        Action::Done => "The user reported the task finished".into(),
        Action::Fail => "The user gave up".into(),
    }
}

/// Element under a screen point, using full-resolution geometry.
fn hit(obs: &Observation, x: i32, y: i32) -> Option<&ElementView> {
    obs.scene.iter().rev().find(|v| v.bounds.contains(x, y))
}

fn name_of(v: &ElementView) -> String {
    if v.label.is_empty() {
        v.key.clone()
    } else {
        v.label.clone()
    }
}

fn appeared(v: &ElementView) -> String {
    match v.kind {
        ElementKind::Menu => format!("the {} menu opened", menu_name(v)),
        ElementKind::Window => format!("the {} window opened", name_of(v)),
        ElementKind::LockScreen => "the lock screen appeared".into(),
        _ => format!("{} appeared", name_of(v)),
    }
}

fn vanished(v: &ElementView) -> String {
    match v.kind {
        ElementKind::Menu => format!("the {} menu closed", menu_name(v)),
        ElementKind::Window => format!("the {} window closed", name_of(v)),
        ElementKind::LockScreen => "the lock screen was dismissed".into(),
        _ => format!("{} closed", name_of(v)),
    }
}

fn menu_name(v: &ElementView) -> String {
    let n = name_of(v);
    n.strip_suffix(" menu").map(str::to_string).unwrap_or(n)
}

/// Element-level differences between two observations, as short phrases.
pub fn diff_phrases(before: &Observation, after: &Observation) -> Vec<String> {
    let mut out = Vec::new();
    let find = |obs: &'_ Observation, key: &str| obs.scene.iter().position(|v| v.key == key);
    for v in &after.scene {
        match find(before, &v.key) {
            None => out.push(appeared(v)),
            Some(i) => {
                let b = &before.scene[i];
                if b.text != v.text {
                    out.push(format!("{} changed", name_of(v)));
                } else if b.label != v.label {
                    out.push(format!("{} now reads '{}'", b.label, v.label));
                } else if !b.focused && v.focused && v.kind == ElementKind::TextField {
                    out.push(format!("{} became active", name_of(v)));
                }
            }
        }
    }
    for v in &before.scene {
        if find(after, &v.key).is_none() {
            out.push(vanished(v));
        }
    }
    out
}

fn join_phrases(p: &[String]) -> String {
    match p.len() {
        0 => String::new(),
        1 => p[0].clone(),
        _ => format!("{} and {}", p[..p.len() - 1].join(", "), p[p.len() - 1]),
    }
}

fn describe_event(before: &Observation, ev: &ExternalEvent) -> String {
    match ev {
        ExternalEvent::AccidentalTouch { target, label, .. } => {
            let what = label
                .clone()
                .or_else(|| target.and_then(|id| before.scene.iter().find(|v| v.id == id).map(name_of)))
                .unwrap_or_else(|| "empty space".into());
            format!("An external click on {what} occurred")
        }
        ExternalEvent::AppMinimization { .. } => "An external app minimization occurred".into(),
    }
}

/// Summarizes one step. Changes that coincide with an external event are
/// reported after that event instead of being credited to the user.
pub fn summarize_behavior(
    before: &Observation,
    action: &Action,
    after: &Observation,
    events: &[ExternalEvent],
) -> BehaviorSummary {
    let head = describe_action(before, action);
    let changes = diff_phrases(before, after);
    let text = if events.is_empty() {
        if changes.is_empty() {
            format!("{head}, with no observable change.")
        } else {
            format!("{head}, and {}.", join_phrases(&changes))
        }
    } else {
        let ev = events
            .iter()
            .map(|e| describe_event(before, e))
            .collect::<Vec<_>>()
            .join("; ");
        if changes.is_empty() {
            format!("{head}. {ev}, with no observable change.")
        } else {
            format!("{head}. {ev}; afterwards {}.", join_phrases(&changes))
        }
    };
    BehaviorSummary { text }
}

pub const NO_ERROR_TEXT: &str = "None";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemediationId {
    Unlock,
    RestoreNetwork,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reminder {
    pub text: String,
    pub remediation: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    LockScreen,
    Unreachable,
}

impl Detector {
    pub fn matches(self, obs: &Observation) -> bool {
        match self {
            Detector::LockScreen => obs.scene.iter().any(|v| v.kind == ElementKind::LockScreen),
            Detector::Unreachable => obs
                .scene
                .iter()
                .any(|v| v.key == "tray.net.offline" || v.label.contains("can't be reached")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ErrorPattern {
    pub detector: Detector,
    pub reminder: String,
    pub remediation: String,
}

#[derive(Debug, Clone)]
pub struct ErrorRepository {
    pub patterns: Vec<ErrorPattern>,
}

impl Default for ErrorRepository {
    fn default() -> Self {
        Self::builtin()
    }
}

impl ErrorRepository {
    pub fn builtin() -> Self {
        Self {
            patterns: vec![
                ErrorPattern {
                    detector: Detector::LockScreen,
                    reminder: "Please log in by entering the password first.".into(),
                    remediation: "unlock".into(),
                },
                ErrorPattern {
                    detector: Detector::Unreachable,
                    reminder: "The network is unavailable. Please help restore normal network access first.".into(),
                    remediation: "restore-network".into(),
                },
            ],
        }
    }
}

/// First matching repository entry, or `None` for a healthy screen.
pub fn check_environment(obs: &Observation, repo: &ErrorRepository) -> Option<Reminder> {
    repo.patterns.iter().find(|p| p.detector.matches(obs)).map(|p| Reminder {
        text: p.reminder.clone(),
        remediation: p.remediation.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RemediationError {
    #[error("unknown remediation '{0}'")]
    Unknown(String),
    #[error("remediation already attempted in this episode")]
    AlreadyAttempted,
}

/// Enforces the one-remediation-per-episode rule.
#[derive(Debug, Clone, Default)]
pub struct Remediator {
    attempted: bool,
}

impl Remediator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn remediate(&mut self, state: &mut EnvState, reminder: &Reminder) -> Result<(), RemediationError> {
        if self.attempted {
            return Err(RemediationError::AlreadyAttempted);
        }
        let id = match reminder.remediation.as_str() {
            "unlock" => RemediationId::Unlock,
            "restore-network" => RemediationId::RestoreNetwork,
            other => return Err(RemediationError::Unknown(other.to_string())),
        };
        self.attempted = true;
        match id {
            RemediationId::Unlock => {
                state.unlock_with(PASSWORD);
            }
            RemediationId::RestoreNetwork => state.network = NetworkRuleSet::default(),
        }
        state.fix_focus();
        Ok(())
    }
}
