use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ops;
use super::spec::{Condition, CorruptionParams, CorruptionSpec};
use crate::seed::derive_seed;
use crate::sim::observe::{render, MarkOverlay, Observation, Overlay, PopUpOverlay};
use crate::sim::state::{Action, EnvState, RngSeeds};
use crate::sim::tasks::{init_task, Task};
use crate::sim::{SimError, StepOutcome};

/// Per-episode corruption state. Pop-up and mark placements are drawn once,
/// at the first observation, and then stay put; the pop-up goes away once
/// its button strip is clicked.
#[derive(Debug, Clone)]
pub struct CorruptionRuntime {
    specs: Vec<CorruptionSpec>,
    rng: ChaCha8Rng,
    event_seed: u64,
    popup: Option<PopUpOverlay>,
    popup_placed: bool,
    popup_dismissed: bool,
    marks: Option<Vec<MarkOverlay>>,
}

impl CorruptionRuntime {
    pub fn new(condition: &Condition, seeds: &RngSeeds) -> Self {
        Self {
            specs: condition.specs.clone(),
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seeds.corruption, &["observation"])),
            event_seed: seeds.corruption,
            popup: None,
            popup_placed: false,
            popup_dismissed: false,
            marks: None,
        }
    }

    pub fn specs(&self) -> &[CorruptionSpec] {
        &self.specs
    }

    /// Applies state operators (before execution, then step-0 launches) and
    /// schedules transition events.
    pub fn prepare(&mut self, state: &mut EnvState) {
        for spec in &self.specs {
            match &spec.params {
                CorruptionParams::NetworkError(_) => ops::apply_network_error(state),
                CorruptionParams::Verification(_) => ops::apply_verification(state),
                _ => {}
            }
        }
        for spec in &self.specs {
            if let CorruptionParams::MultiApps(p) = &spec.params {
                ops::apply_multi_apps(state, p.another_app);
            }
        }
        for (i, spec) in self.specs.iter().enumerate() {
            let seed = derive_seed(self.event_seed, &["event", &i.to_string()]);
            match &spec.params {
                CorruptionParams::AccidentalTouch(p) => {
                    ops::apply_accidental_touch(state, p.step as u32, p.without_app, seed);
                }
                CorruptionParams::AppMinimization(p) => {
                    ops::apply_app_minimization(state, p.step as u32, seed);
                }
                _ => {}
            }
        }
        state.fix_focus();
    }

    /// Applies observation operators: pop-ups, marks, subtitle, then the
    /// resolution change last.
    pub fn corrupt(&mut self, mut obs: Observation) -> Observation {
        let interactables: Vec<_> = obs.scene.iter().filter(|v| v.interactable).map(|v| v.bounds).collect();
        for spec in &self.specs {
            if let CorruptionParams::PopUps(p) = &spec.params {
                if !self.popup_placed {
                    self.popup = Some(ops::place_pop_up(
                        &interactables,
                        obs.screen_w,
                        obs.screen_h,
                        p,
                        &mut self.rng,
                    ));
                    self.popup_placed = true;
                }
                if let (Some(p), false) = (&self.popup, self.popup_dismissed) {
                    obs.overlays.push(Overlay::PopUp(p.clone()));
                }
            }
        }
        for spec in &self.specs {
            if let CorruptionParams::Marks(p) = &spec.params {
                let marks = self.marks.get_or_insert_with(|| {
                    ops::place_marks(&interactables, obs.screen_w, obs.screen_h, p, &mut self.rng)
                });
                obs.overlays.extend(marks.iter().cloned().map(Overlay::Mark));
            }
        }
        for spec in &self.specs {
            if let CorruptionParams::Subtitle(p) = &spec.params {
                obs.overlays.push(Overlay::Subtitle(ops::layout_subtitle(obs.screen_w, obs.screen_h, p)));
            }
        }
        for spec in &self.specs {
            if let CorruptionParams::Resolution(p) = &spec.params {
                let (w, h) = ops::scaled_size(obs.screen_w, obs.screen_h, p.scale);
                obs.width = w;
                obs.height = h;
            }
        }
        obs.refresh();
        obs
    }

    /// Notes an action before the environment executes it.
    pub fn on_action(&mut self, action: &Action) {
        if let (Some(p), Some((x, y))) = (&self.popup, action.point()) {
            let pressed = matches!(action, Action::Click { .. } | Action::LeftDouble { .. });
            if pressed && p.ad_strip.contains(x, y) {
                self.popup_dismissed = true;
            }
        }
    }

    pub fn popup_visible(&self) -> bool {
        self.popup.is_some() && !self.popup_dismissed
    }
}

/// A task environment wrapped with a corruption condition.
#[derive(Debug, Clone)]
pub struct CorruptedEnv {
    pub state: EnvState,
    pub runtime: CorruptionRuntime,
}

impl CorruptedEnv {
    pub fn new(task: &Task, condition: &Condition, seed: u64) -> Self {
        let mut state = init_task(task, seed);
        let mut runtime = CorruptionRuntime::new(condition, &state.seeds);
        runtime.prepare(&mut state);
        Self { state, runtime }
    }

    pub fn observe(&mut self) -> Observation {
        let clean = render(&self.state);
        self.runtime.corrupt(clean)
    }

    pub fn step(&mut self, action: &Action) -> Result<StepOutcome, SimError> {
        if self.state.is_terminal() {
            return Err(SimError::Terminal);
        }
        self.runtime.on_action(action);
        let events = self.state.advance(action)?;
        Ok(StepOutcome {
            observation: self.observe(),
            terminal: self.state.is_terminal(),
            events,
        })
    }
}
