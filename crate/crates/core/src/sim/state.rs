use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::element::{AppId, Effect, ElementId, ElementKind, NetDependence, UiElement};
use super::network::{Destination, NetworkRuleSet};
use super::SimError;
use crate::geom::{covered_by_union, Rect};
use crate::seed::{derive_seed, sha256_hex};

pub const SCREEN_W: i32 = 1920;
pub const SCREEN_H: i32 = 1080;
pub const DEFAULT_MAX_STEPS: u32 = 15;
pub const PASSWORD: &str = "password";
pub const LOCK_SCREEN_ID: ElementId = ElementId(u32::MAX - 1);
pub const LOCK_FIELD_ID: ElementId = ElementId(u32::MAX - 2);
/// Resampling cap when an accidental touch must avoid app launchers.
pub const TOUCH_MAX_ATTEMPTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum Action {
    Click { x: i32, y: i32 },
    LeftDouble { x: i32, y: i32 },
    RightSingle { x: i32, y: i32 },
    Drag { x1: i32, y1: i32, x2: i32, y2: i32 },
    Hotkey { keys: Vec<String> },
    Type { text: String },
    Scroll { x: i32, y: i32, direction: ScrollDirection },
    Wait,
    Done,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScrollDirection {
    Up,
    Down,
}

impl Action {
    pub fn hotkey(keys: &[&str]) -> Action {
        Action::Hotkey {
            keys: keys.iter().map(|k| k.to_string()).collect(),
        }
    }

    pub fn type_text(text: &str) -> Action {
        Action::Type {
            text: text.to_string(),
        }
    }

    pub fn point(&self) -> Option<(i32, i32)> {
        match *self {
            Action::Click { x, y }
            | Action::LeftDouble { x, y }
            | Action::RightSingle { x, y }
            | Action::Scroll { x, y, .. } => Some((x, y)),
            Action::Drag { x1, y1, .. } => Some((x1, y1)),
            _ => None,
        }
    }
}

/// Normalizes key names so `Return`, `enter` and `ENTER` compare equal.
pub fn normalize_key(key: &str) -> String {
    let k = key.trim().to_ascii_lowercase();
    match k.as_str() {
        "windows" | "super" | "meta" | "cmd" => "win".into(),
        "escape" => "esc".into(),
        "return" => "enter".into(),
        "control" => "ctrl".into(),
        _ => k,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Done,
    Fail,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventTrigger {
    AccidentalTouch { without_app: bool },
    AppMinimization,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledEvent {
    pub step: u32,
    pub trigger: EventTrigger,
    /// Pre-drawn randomness so firing never touches other streams.
    pub seed: u64,
    pub fired: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExternalEvent {
    AccidentalTouch {
        step: u32,
        target: Option<ElementId>,
        label: Option<String>,
    },
    AppMinimization {
        step: u32,
    },
}

impl ExternalEvent {
    pub fn step(&self) -> u32 {
        match self {
            ExternalEvent::AccidentalTouch { step, .. } | ExternalEvent::AppMinimization { step } => *step,
        }
    }
}

/// Seeds of the three independent random streams of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeeds {
    pub env: u64,
    pub corruption: u64,
    pub policy: u64,
}

impl RngSeeds {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            env: derive_seed(seed, &["env"]),
            corruption: derive_seed(seed, &["corruption"]),
            policy: derive_seed(seed, &["policy"]),
        }
    }

    pub fn env_rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.env)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvState {
    pub task_id: String,
    pub elements: Vec<UiElement>,
    pub next_id: u32,
    pub focused_window: Option<ElementId>,
    pub active_field: Option<ElementId>,
    pub network: NetworkRuleSet,
    pub locked: bool,
    pub lock_input: String,
    pub files: BTreeMap<String, String>,
    pub step: u32,
    pub max_steps: u32,
    pub seeds: RngSeeds,
    pub scheduled: Vec<ScheduledEvent>,
    pub terminal: Option<Termination>,
    pub screen_w: i32,
    pub screen_h: i32,
    pub warnings: Vec<String>,
}

impl EnvState {
    pub fn empty(seed: u64) -> Self {
        Self {
            task_id: String::new(),
            elements: Vec::new(),
            next_id: 1,
            focused_window: None,
            active_field: None,
            network: NetworkRuleSet::default(),
            locked: false,
            lock_input: String::new(),
            files: BTreeMap::new(),
            step: 0,
            max_steps: DEFAULT_MAX_STEPS,
            seeds: RngSeeds::from_seed(seed),
            scheduled: Vec::new(),
            terminal: None,
            screen_w: SCREEN_W,
            screen_h: SCREEN_H,
            warnings: Vec::new(),
        }
    }

    /// SHA-256 over the canonical JSON encoding.
    pub fn digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("state serializes"))
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    // ---- element bookkeeping ----------------------------------------

    pub fn add(&mut self, mut el: UiElement) -> ElementId {
        el.id = ElementId(self.next_id);
        self.next_id += 1;
        let id = el.id;
        let pos = self.elements.iter().take_while(|e| e.layer <= el.layer).count();
        self.elements.insert(pos, el);
        id
    }

    /// Adds `el` as the last child of `parent`, inheriting its layer and app.
    pub fn add_child(&mut self, parent: ElementId, mut el: UiElement) -> ElementId {
        let pidx = self.index_of(parent).expect("parent exists");
        el.id = ElementId(self.next_id);
        self.next_id += 1;
        el.parent = Some(parent);
        el.layer = self.elements[pidx].layer;
        if el.app.is_none() {
            el.app = self.elements[pidx].app;
        }
        let id = el.id;
        let end = self.subtree_end(pidx);
        self.elements.insert(end, el);
        id
    }

    pub fn index_of(&self, id: ElementId) -> Option<usize> {
        self.elements.iter().position(|e| e.id == id)
    }

    pub fn index_of_key(&self, key: &str) -> Option<usize> {
        self.elements.iter().position(|e| e.key == key)
    }

    pub fn get(&self, id: ElementId) -> Option<&UiElement> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn by_key(&self, key: &str) -> Option<&UiElement> {
        self.elements.iter().find(|e| e.key == key)
    }

    pub fn by_key_mut(&mut self, key: &str) -> Option<&mut UiElement> {
        self.elements.iter_mut().find(|e| e.key == key)
    }

    fn is_descendant(&self, idx: usize, ancestor: ElementId) -> bool {
        let mut cur = self.elements[idx].parent;
        while let Some(p) = cur {
            if p == ancestor {
                return true;
            }
            cur = self.get(p).and_then(|e| e.parent);
        }
        false
    }

    /// One past the last index of the subtree rooted at `idx`. Subtrees are
    /// contiguous because children are always inserted after their parent.
    fn subtree_end(&self, idx: usize) -> usize {
        let root = self.elements[idx].id;
        let mut end = idx + 1;
        while end < self.elements.len() && self.is_descendant(end, root) {
            end += 1;
        }
        end
    }

    pub fn window_of(&self, idx: usize) -> Option<usize> {
        let mut cur = Some(idx);
        while let Some(i) = cur {
            if self.elements[i].kind == ElementKind::Window && self.elements[i].parent.is_none() {
                return Some(i);
            }
            cur = self.elements[i].parent.and_then(|p| self.index_of(p));
        }
        None
    }

    pub fn window_for_app(&self, app: AppId) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.kind == ElementKind::Window && e.app == Some(app) && e.parent.is_none())
    }

    pub fn open_apps(&self) -> Vec<AppId> {
        let mut apps: Vec<AppId> = self
            .elements
            .iter()
            .filter(|e| e.kind == ElementKind::Window && e.parent.is_none() && !e.hidden)
            .filter_map(|e| e.app)
            .collect();
        apps.sort();
        apps.dedup();
        apps
    }

    pub fn network_reachable(&self, destination: Destination) -> bool {
        self.network.reachable(destination)
    }

    /// Visibility flag per element index, honoring ancestors, minimization
    /// and network-dependent elements.
    pub fn visibility(&self) -> Vec<bool> {
        let online = self.network_reachable(Destination::External);
        let mut vis_by_id: BTreeMap<ElementId, bool> = BTreeMap::new();
        let mut out = Vec::with_capacity(self.elements.len());
        for e in &self.elements {
            let net_ok = match e.net {
                NetDependence::Always => true,
                NetDependence::Online => online,
                NetDependence::Offline => !online,
            };
            let parent_ok = e.parent.is_none_or(|p| vis_by_id.get(&p).copied().unwrap_or(false));
            let v = !e.hidden && !e.minimized && net_ok && parent_ok;
            vis_by_id.insert(e.id, v);
            out.push(v);
        }
        out
    }

    /// Top-most visible element whose bounds contain the point.
    pub fn hit_test(&self, x: i32, y: i32) -> Option<usize> {
        let vis = self.visibility();
        (0..self.elements.len())
            .rev()
            .find(|&i| vis[i] && self.elements[i].bounds.contains(x, y))
    }

    /// Interactable elements that are visible and not fully covered by
    /// anything painted above them. While locked only the password field is.
    pub fn interactable_targets(&self) -> Vec<(ElementId, Rect)> {
        if self.locked {
            return vec![(LOCK_FIELD_ID, lock_field_rect(self.screen_w, self.screen_h))];
        }
        let vis = self.visibility();
        let screen = Rect::new(0, 0, self.screen_w, self.screen_h);
        let mut out = Vec::new();
        for (i, e) in self.elements.iter().enumerate() {
            if !vis[i] || !e.interactable {
                continue;
            }
            let b = e.bounds.intersection(&screen);
            if b.is_empty() {
                continue;
            }
            let covers: Vec<Rect> = (i + 1..self.elements.len())
                .filter(|&j| vis[j])
                .map(|j| self.elements[j].bounds)
                .filter(|r| r.intersects(&b))
                .collect();
            if !covered_by_union(&b, &covers) {
                out.push((e.id, e.bounds));
            }
        }
        out
    }

    // ---- focus ---------------------------------------------------------

    fn raise(&mut self, idx: usize) -> usize {
        let end = self.subtree_end(idx);
        let block: Vec<UiElement> = self.elements.drain(idx..end).collect();
        let layer = block[0].layer;
        let pos = self.elements.iter().take_while(|e| e.layer <= layer).count();
        let n = block.len();
        self.elements.splice(pos..pos, block);
        debug_assert!(n > 0);
        pos
    }

    fn focus_window(&mut self, idx: usize) {
        let id = self.elements[idx].id;
        self.raise(idx);
        self.focused_window = Some(id);
    }

    /// Re-establishes the focus invariant after any change.
    pub fn fix_focus(&mut self) {
        let vis = self.visibility();
        let visible_window = |id: ElementId| {
            self.index_of(id)
                .is_some_and(|i| vis[i] && self.is_top_window(i))
        };
        if !self.focused_window.is_some_and(visible_window) {
            self.focused_window = (0..self.elements.len())
                .rev()
                .find(|&i| vis[i] && self.is_top_window(i))
                .map(|i| self.elements[i].id);
        }
        if let Some(f) = self.active_field {
            if !self.index_of(f).is_some_and(|i| vis[i]) {
                self.active_field = None;
            }
        }
    }

    pub fn is_top_window(&self, idx: usize) -> bool {
        let e = &self.elements[idx];
        e.kind == ElementKind::Window && e.parent.is_none()
    }

    /// True when keyboard input reaches the active field.
    pub fn field_has_keyboard(&self, id: ElementId) -> bool {
        if self.active_field != Some(id) || self.locked {
            return false;
        }
        let Some(idx) = self.index_of(id) else {
            return false;
        };
        match self.window_of(idx) {
            Some(w) => self.focused_window == Some(self.elements[w].id),
            None => true,
        }
    }

    pub fn minimize_all(&mut self) {
        for e in &mut self.elements {
            if e.kind == ElementKind::Window && e.parent.is_none() {
                e.minimized = true;
            }
        }
        self.close_menus(None);
        self.fix_focus();
    }

    pub fn lock(&mut self) {
        self.locked = true;
        self.lock_input.clear();
    }

    /// The single unlock path, shared by keyboard input and remediation.
    pub fn unlock_with(&mut self, password: &str) -> bool {
        if self.locked && password == PASSWORD {
            self.locked = false;
            self.lock_input.clear();
            self.fix_focus();
            true
        } else {
            self.lock_input.clear();
            false
        }
    }

    /// Launches `app`, or restores and raises its window when already open.
    pub fn launch(&mut self, app: AppId) {
        let idx = match self.window_for_app(app) {
            Some(i) => i,
            None => {
                super::apps::open_generic_window(self, app);
                self.window_for_app(app).expect("window just opened")
            }
        };
        self.elements[idx].minimized = false;
        self.elements[idx].hidden = false;
        self.focus_window(idx);
    }

    // ---- actions ---------------------------------------------------------

    fn close_menus(&mut self, keep: Option<usize>) {
        self.close_menus_around(keep, true);
    }

    /// Hides visible transient elements. `keep` is the pressed element: menus
    /// it toggles always survive, and with `keep_inside` so do menus containing it.
    fn close_menus_around(&mut self, keep: Option<usize>, keep_inside: bool) {
        let vis = self.visibility();
        let keep_targets: Vec<String> = keep
            .map(|k| match &self.elements[k].on_click {
                Effect::Toggle(key) | Effect::Show(key) => vec![key.clone()],
                _ => Vec::new(),
            })
            .unwrap_or_default();
        for i in 0..self.elements.len() {
            let e = &self.elements[i];
            if !(e.transient && vis[i]) {
                continue;
            }
            let inside = keep_inside && keep.is_some_and(|k| k == i || self.is_descendant(k, e.id));
            if inside || keep_targets.contains(&e.key) {
                continue;
            }
            self.elements[i].hidden = true;
        }
    }

    /// Presses the element at `idx` as if clicked by a pointer.
    pub fn press(&mut self, idx: usize, double: bool) {
        self.close_menus(Some(idx));
        let id = self.elements[idx].id;
        if let Some(w) = self.window_of(idx) {
            self.focus_window(w);
        }
        let idx = self.index_of(id).expect("still present");
        let in_menu = self.has_transient_ancestor(idx);
        self.activate(idx, double);
        if in_menu {
            if let Some(idx) = self.index_of(id) {
                self.close_menus_around(Some(idx), false);
            }
        }
    }

    fn has_transient_ancestor(&self, idx: usize) -> bool {
        let mut cur = self.elements[idx].parent;
        while let Some(p) = cur {
            match self.get(p) {
                Some(e) if e.transient => return true,
                Some(e) => cur = e.parent,
                None => return false,
            }
        }
        false
    }

    fn activate(&mut self, idx: usize, double: bool) {
        let el = &self.elements[idx];
        if el.kind == ElementKind::TextField {
            self.active_field = Some(el.id);
        } else {
            self.active_field = None;
        }
        if !el.interactable {
            return;
        }
        let effect = if double {
            el.on_double.clone().unwrap_or_else(|| el.on_click.clone())
        } else {
            el.on_click.clone()
        };
        let id = el.id;
        self.run(&effect, id);
    }

    fn click_at(&mut self, x: i32, y: i32, double: bool) {
        match self.hit_test(x, y) {
            Some(idx) => self.press(idx, double),
            None => {
                self.close_menus(None);
                self.active_field = None;
            }
        }
    }

    fn run(&mut self, effect: &Effect, origin: ElementId) {
        match effect {
            Effect::None => {}
            Effect::Show(key) => {
                if let Some(e) = self.by_key_mut(key) {
                    e.hidden = false;
                }
            }
            Effect::Hide(key) => {
                if let Some(e) = self.by_key_mut(key) {
                    e.hidden = true;
                }
            }
            Effect::Toggle(key) => {
                if let Some(e) = self.by_key_mut(key) {
                    e.hidden = !e.hidden;
                }
            }
            Effect::SetFile { path, value } => {
                self.files.insert(path.clone(), value.clone());
            }
            Effect::FieldToFile { field, path } => {
                let text = self.by_key(field).map(|e| e.text.clone()).unwrap_or_default();
                self.files.insert(path.clone(), text);
            }
            Effect::CreateFromField { field, dir } => {
                let name = self.by_key(field).map(|e| e.text.trim().to_string()).unwrap_or_default();
                if !name.is_empty() {
                    self.files.insert(format!("{dir}/{name}"), String::new());
                }
            }
            Effect::CopyFile { from, to } => {
                if let Some(v) = self.files.get(from).cloned() {
                    self.files.insert(to.clone(), v);
                }
            }
            Effect::RemovePrefix(prefix) => {
                self.files.retain(|k, _| !k.starts_with(prefix.as_str()));
            }
            Effect::ActivateField(key) => {
                if let Some(i) = self.index_of_key(key) {
                    if let Some(w) = self.window_of(i) {
                        self.focus_window(w);
                    }
                    let id = self.elements[self.index_of_key(key).expect("present")].id;
                    self.active_field = Some(id);
                }
            }
            Effect::SetText { key, text } => {
                if let Some(e) = self.by_key_mut(key) {
                    e.text = text.clone();
                }
            }
            Effect::Launch(app) => self.launch(*app),
            Effect::Close => {
                if let Some(w) = self.index_of(origin).and_then(|i| self.window_of(i)) {
                    self.elements[w].hidden = true;
                }
            }
            Effect::Minimize => {
                if let Some(w) = self.index_of(origin).and_then(|i| self.window_of(i)) {
                    self.elements[w].minimized = true;
                }
            }
            Effect::Online(inner) => {
                if self.network_reachable(Destination::External) {
                    self.run(inner, origin);
                }
            }
            Effect::Seq(list) => {
                for e in list {
                    self.run(e, origin);
                }
            }
        }
    }

    fn hotkey(&mut self, keys: &[String]) {
        let keys: Vec<String> = keys.iter().map(|k| normalize_key(k)).collect();
        let combo: Vec<&str> = keys.iter().map(String::as_str).collect();
        if self.locked {
            match combo.as_slice() {
                ["enter"] => {
                    let input = std::mem::take(&mut self.lock_input);
                    self.unlock_with(&input);
                }
                ["backspace"] => {
                    self.lock_input.pop();
                }
                _ => {}
            }
            return;
        }
        match combo.as_slice() {
            ["win", "d"] => self.minimize_all(),
            ["win", "l"] => self.lock(),
            ["esc"] => self.close_menus(None),
            ["ctrl", "s"] => {
                if let Some(w) = self.focused_window.and_then(|id| self.index_of(id)) {
                    let effect = self.elements[w].on_save.clone();
                    let id = self.elements[w].id;
                    self.run(&effect, id);
                }
            }
            ["enter"] => {
                if let Some(f) = self.active_field.filter(|&f| self.field_has_keyboard(f)) {
                    let idx = self.index_of(f).expect("active field exists");
                    let effect = self.elements[idx].on_enter.clone();
                    self.run(&effect, f);
                }
            }
            ["backspace"] => {
                if let Some(f) = self.active_field.filter(|&f| self.field_has_keyboard(f)) {
                    let idx = self.index_of(f).expect("active field exists");
                    self.elements[idx].text.pop();
                }
            }
            _ => {}
        }
    }

    fn type_text(&mut self, text: &str) {
        if self.locked {
            self.lock_input.push_str(text);
            return;
        }
        if let Some(f) = self.active_field.filter(|&f| self.field_has_keyboard(f)) {
            let idx = self.index_of(f).expect("active field exists");
            self.elements[idx].text.push_str(text);
        }
    }

    fn apply(&mut self, action: &Action) {
        if self.locked {
            match action {
                Action::Type { text } => self.type_text(text),
                Action::Hotkey { keys } => self.hotkey(keys),
                _ => {}
            }
            return;
        }
        match action {
            Action::Click { x, y } => self.click_at(*x, *y, false),
            Action::LeftDouble { x, y } => self.click_at(*x, *y, true),
            Action::RightSingle { x, y } => {
                if let Some(w) = self.hit_test(*x, *y).and_then(|i| self.window_of(i)) {
                    self.focus_window(w);
                }
            }
            Action::Hotkey { keys } => self.hotkey(keys),
            Action::Type { text } => self.type_text(text),
            Action::Drag { .. } | Action::Scroll { .. } | Action::Wait | Action::Done | Action::Fail => {}
        }
    }

    fn fire(&mut self, ev: &ScheduledEvent, step: u32) -> ExternalEvent {
        match ev.trigger {
            EventTrigger::AppMinimization => {
                self.minimize_all();
                ExternalEvent::AppMinimization { step }
            }
            EventTrigger::AccidentalTouch { without_app } => {
                let targets = self.interactable_targets();
                let mut rng = ChaCha8Rng::seed_from_u64(ev.seed);
                let mut chosen = None;
                if !targets.is_empty() {
                    let attempts = if without_app { TOUCH_MAX_ATTEMPTS } else { 1 };
                    for _ in 0..attempts {
                        let (id, _) = targets[rng.random_range(0..targets.len())];
                        let is_app = self
                            .get(id)
                            .is_some_and(|e| e.kind == ElementKind::AppLauncher);
                        if !(without_app && is_app) {
                            chosen = Some(id);
                            break;
                        }
                    }
                }
                let label = chosen.map(|id| match self.get(id) {
                    Some(e) => e.label.clone(),
                    None => "password field".to_string(),
                });
                if let Some(idx) = chosen.and_then(|id| self.index_of(id)) {
                    self.press(idx, false);
                    self.fix_focus();
                }
                ExternalEvent::AccidentalTouch {
                    step,
                    target: chosen,
                    label,
                }
            }
        }
    }

    /// Applies one agent action, fires events scheduled for this step and
    /// advances the step counter.
    pub fn advance(&mut self, action: &Action) -> Result<Vec<ExternalEvent>, SimError> {
        if self.is_terminal() {
            return Err(SimError::Terminal);
        }
        let k = self.step + 1;
        self.apply(action);
        self.fix_focus();
        let mut fired = Vec::new();
        let ends = matches!(action, Action::Done | Action::Fail);
        if !ends {
            for i in 0..self.scheduled.len() {
                if self.scheduled[i].step == k && !self.scheduled[i].fired {
                    self.scheduled[i].fired = true;
                    let ev = self.scheduled[i].clone();
                    fired.push(self.fire(&ev, k));
                }
            }
        }
        self.step = k;
        self.terminal = match action {
            Action::Done => Some(Termination::Done),
            Action::Fail => Some(Termination::Fail),
            _ if self.step >= self.max_steps => Some(Termination::MaxSteps),
            _ => None,
        };
        Ok(fired)
    }
}

/// Full-screen password field geometry of the lock layer.
pub fn lock_field_rect(w: i32, h: i32) -> Rect {
    Rect::new(w / 2 - 200, h / 2 - 24, 400, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(state: &mut EnvState, key: &str, bounds: Rect) -> ElementId {
        state.add(UiElement::new(key, ElementKind::Window, bounds).label(key))
    }

    #[test]
    fn click_on_empty_space_only_advances_step() {
        let mut s = EnvState::empty(0);
        let before = s.clone();
        s.advance(&Action::Click { x: 5, y: 5 }).unwrap();
        assert_eq!(s.step, 1);
        s.step = 0;
        assert_eq!(s, before);
    }

    #[test]
    fn top_most_interactable_wins() {
        let mut s = EnvState::empty(0);
        let w1 = window(&mut s, "w1", Rect::new(0, 0, 400, 400));
        s.add_child(
            w1,
            UiElement::new("b1", ElementKind::Button, Rect::new(10, 10, 100, 50))
                .on_click(Effect::set_file("hit", "b1")),
        );
        let w2 = window(&mut s, "w2", Rect::new(50, 0, 400, 400));
        s.add_child(
            w2,
            UiElement::new("b2", ElementKind::Button, Rect::new(60, 10, 100, 50))
                .on_click(Effect::set_file("hit", "b2")),
        );
        s.fix_focus();
        s.advance(&Action::Click { x: 70, y: 20 }).unwrap();
        assert_eq!(s.files["hit"], "b2");
        // b1 is partially covered by w2 but its left edge is still exposed
        let targets: Vec<ElementId> = s.interactable_targets().into_iter().map(|t| t.0).collect();
        assert_eq!(targets.len(), 2);
        s.advance(&Action::Click { x: 20, y: 20 }).unwrap();
        assert_eq!(s.files["hit"], "b1");
        assert_eq!(s.focused_window, Some(w1));
    }

    #[test]
    fn fully_occluded_button_is_not_a_target() {
        let mut s = EnvState::empty(0);
        let w1 = window(&mut s, "w1", Rect::new(0, 0, 400, 400));
        s.add_child(w1, UiElement::new("b1", ElementKind::Button, Rect::new(10, 10, 100, 50)));
        window(&mut s, "w2", Rect::new(0, 0, 400, 400));
        assert!(s.interactable_targets().is_empty());
    }

    #[test]
    fn lock_gates_everything_but_password() {
        let mut s = EnvState::empty(0);
        let w = window(&mut s, "w", Rect::new(0, 0, 400, 400));
        s.add_child(
            w,
            UiElement::new("b", ElementKind::Button, Rect::new(10, 10, 100, 50))
                .on_click(Effect::set_file("x", "1")),
        );
        s.fix_focus();
        s.lock();
        s.advance(&Action::Click { x: 20, y: 20 }).unwrap();
        assert!(s.files.is_empty());
        s.advance(&Action::type_text("wrong")).unwrap();
        s.advance(&Action::hotkey(&["enter"])).unwrap();
        assert!(s.locked);
        s.advance(&Action::type_text(PASSWORD)).unwrap();
        s.advance(&Action::hotkey(&["Return"])).unwrap();
        assert!(!s.locked);
    }

    #[test]
    fn win_d_minimizes_everything() {
        let mut s = EnvState::empty(0);
        window(&mut s, "a", Rect::new(0, 0, 100, 100));
        window(&mut s, "b", Rect::new(0, 0, 100, 100));
        s.fix_focus();
        assert!(s.focused_window.is_some());
        s.advance(&Action::hotkey(&["win", "d"])).unwrap();
        assert!(s.elements.iter().all(|e| e.minimized));
        assert_eq!(s.focused_window, None);
    }

    #[test]
    fn terminal_after_max_steps_and_rejects_more() {
        let mut s = EnvState::empty(0);
        s.max_steps = 2;
        s.advance(&Action::Wait).unwrap();
        assert!(!s.is_terminal());
        s.advance(&Action::Wait).unwrap();
        assert_eq!(s.terminal, Some(Termination::MaxSteps));
        assert!(matches!(s.advance(&Action::Wait), Err(SimError::Terminal)));
    }

    #[test]
    fn menus_close_on_outside_click_but_toggle_from_opener() {
        let mut s = EnvState::empty(0);
        let w = window(&mut s, "w", Rect::new(0, 0, 800, 600));
        s.add_child(
            w,
            UiElement::new("file", ElementKind::Button, Rect::new(0, 0, 60, 30))
                .on_click(Effect::Toggle("menu".into())),
        );
        let m = s.add_child(w, UiElement::new("menu", ElementKind::Menu, Rect::new(0, 30, 200, 100)).hidden(true));
        s.add_child(
            m,
            UiElement::new("save", ElementKind::Button, Rect::new(0, 30, 200, 30))
                .on_click(Effect::set_file("saved", "yes")),
        );
        s.fix_focus();
        s.advance(&Action::Click { x: 10, y: 10 }).unwrap();
        assert!(!s.by_key("menu").unwrap().hidden);
        s.advance(&Action::Click { x: 10, y: 10 }).unwrap();
        assert!(s.by_key("menu").unwrap().hidden);
        s.advance(&Action::Click { x: 10, y: 10 }).unwrap();
        s.advance(&Action::Click { x: 10, y: 40 }).unwrap();
        assert_eq!(s.files["saved"], "yes");
        s.advance(&Action::Click { x: 500, y: 500 }).unwrap();
        assert!(s.by_key("menu").unwrap().hidden);
    }
}
