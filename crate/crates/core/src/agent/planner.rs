//! Plan-following decision logic shared by the scripted agents and the
//! token policy's hint channel.

use serde::{Deserialize, Serialize};

use super::vocab::{x_bin, x_center, y_bin, y_center, X_BINS, Y_BINS};
use crate::geom::Rect;
use crate::sim::apps::launcher_key;
use crate::sim::element::{AppId, ElementKind};
use crate::sim::observe::{ElementView, Observation};
use crate::sim::state::PASSWORD;
use crate::sim::tasks::{app_of_key, PlanStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Purpose {
    /// Executes the current plan step.
    Plan,
    /// Opens the menu that holds the target.
    Opener,
    /// Brings the target's application to the front.
    Launcher,
    /// Gives a text field the keyboard.
    Focus,
    DismissPopup,
    Unlock,
    Idle,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum IntentOp {
    Click { double: bool },
    Type(String),
    Hotkey(Vec<String>),
    Done,
    Wait,
}

/// What the planner wants to do next, with the target as perceived in
/// observation coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Intent {
    pub op: IntentOp,
    pub purpose: Purpose,
    pub target: Option<Rect>,
    pub target_key: Option<String>,
    /// Perceived rectangles painted above the target.
    pub covers: Vec<Rect>,
}

impl Intent {
    fn simple(op: IntentOp, purpose: Purpose) -> Self {
        Self {
            op,
            purpose,
            target: None,
            target_key: None,
            covers: Vec::new(),
        }
    }

    fn click(obs: &Observation, v: &ElementView, purpose: Purpose, double: bool) -> Self {
        Self {
            op: IntentOp::Click { double },
            purpose,
            target: Some(v.bounds),
            target_key: Some(v.key.clone()),
            covers: covers_of(obs, v),
        }
    }

    fn rect_click(rect: Rect, purpose: Purpose) -> Self {
        Self {
            op: IntentOp::Click { double: false },
            purpose,
            target: Some(rect),
            target_key: None,
            covers: Vec::new(),
        }
    }
}

/// Perceived bounds of everything drawn above `v`.
pub fn covers_of(obs: &Observation, v: &ElementView) -> Vec<Rect> {
    obs.elements
        .iter()
        .filter(|o| o.z > v.z && o.bounds.intersects(&v.bounds))
        .map(|o| o.bounds)
        .collect()
}

/// True when some bin center lands on a visible part of `v` once mapped
/// back to screen coordinates.
pub fn clickable(obs: &Observation, v: &ElementView) -> bool {
    let covers: Vec<Rect> = covers_of(obs, v).iter().map(|c| true_hull(c, obs)).collect();
    pick_bin_point(&true_interior(&v.bounds, obs), &covers).is_some()
}

/// Scale factors from screen to observation space.
pub fn scale_of(obs: &Observation) -> (f64, f64) {
    (
        f64::from(obs.width) / f64::from(obs.screen_w),
        f64::from(obs.height) / f64::from(obs.screen_h),
    )
}

/// Screen-space rectangle guaranteed to lie inside whatever was perceived as
/// `r`: perceived edges are rounded outwards, so the interior shrinks by one
/// perceived pixel on each side.
pub fn true_interior(r: &Rect, obs: &Observation) -> Rect {
    if !obs.is_scaled() {
        return *r;
    }
    let (sx, sy) = scale_of(obs);
    let x0 = (f64::from(r.x + 1) / sx).ceil() as i32;
    let y0 = (f64::from(r.y + 1) / sy).ceil() as i32;
    let x1 = (f64::from(r.right() - 1) / sx).floor() as i32;
    let y1 = (f64::from(r.bottom() - 1) / sy).floor() as i32;
    Rect::new(x0, y0, (x1 - x0).max(0), (y1 - y0).max(0))
}

/// Screen-space rectangle covering everything perceived as `r`.
pub fn true_hull(r: &Rect, obs: &Observation) -> Rect {
    if !obs.is_scaled() {
        return *r;
    }
    let (sx, sy) = scale_of(obs);
    let x0 = (f64::from(r.x) / sx).floor() as i32;
    let y0 = (f64::from(r.y) / sy).floor() as i32;
    let x1 = (f64::from(r.right()) / sx).ceil() as i32;
    let y1 = (f64::from(r.bottom()) / sy).ceil() as i32;
    Rect::new(x0, y0, x1 - x0, y1 - y0)
}

/// Bin center inside `region` outside every cover, closest to the region
/// center.
pub fn pick_bin_point(region: &Rect, covers: &[Rect]) -> Option<(i32, i32)> {
    let (cx, cy) = region.center();
    let mut best: Option<(i64, i32, i32)> = None;
    for by in 0..Y_BINS as u8 {
        let y = y_center(by);
        if y < region.y || y >= region.bottom() {
            continue;
        }
        for bx in 0..X_BINS as u8 {
            let x = x_center(bx);
            if x < region.x || x >= region.right() || covers.iter().any(|c| c.contains(x, y)) {
                continue;
            }
            let d = i64::from(x - cx).pow(2) + i64::from(y - cy).pow(2);
            if best.is_none_or(|b| (d, y, x) < b) {
                best = Some((d, y, x));
            }
        }
    }
    best.map(|(_, y, x)| (x, y))
}

/// Bin center nearest to the perceived center of `r`, read as if it were a
/// screen coordinate.
pub fn naive_point(r: &Rect) -> (i32, i32) {
    let (cx, cy) = r.center();
    (x_center(x_bin(cx)), y_center(y_bin(cy)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannerStyle {
    /// Checks keyboard focus and window focus before typing or pressing keys.
    pub check_focus: bool,
    /// Re-opens menus, raises windows and backtracks when a target is gone.
    pub recover: bool,
    /// Clicks any pop-up's button the first time it shows up.
    pub click_popups: bool,
    /// Answers a lock screen by typing the password.
    pub unlock: bool,
}

impl PlannerStyle {
    pub const CAREFUL: PlannerStyle = PlannerStyle {
        check_focus: true,
        recover: true,
        click_popups: false,
        unlock: true,
    };
    pub const NAIVE: PlannerStyle = PlannerStyle {
        check_focus: false,
        recover: false,
        click_popups: true,
        unlock: false,
    };
}

const MAX_BACKTRACKS: u32 = 3;

/// Cursor over a task plan.
#[derive(Debug, Clone)]
pub struct Planner {
    pub style: PlannerStyle,
    plan: Vec<PlanStep>,
    cursor: usize,
    last_field: Option<String>,
    popup_clicked: bool,
    backtracks: u32,
}

impl Planner {
    pub fn new(style: PlannerStyle, plan: Vec<PlanStep>) -> Self {
        Self {
            style,
            plan,
            cursor: 0,
            last_field: None,
            popup_clicked: false,
            backtracks: 0,
        }
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn plan(&self) -> &[PlanStep] {
        &self.plan
    }

    /// Records that `intent` was carried out. Plan steps advance the cursor
    /// only when `landed` is true.
    pub fn commit(&mut self, intent: &Intent, landed: bool) {
        match intent.purpose {
            Purpose::DismissPopup => self.popup_clicked = true,
            Purpose::Plan if landed => {
                if let Some(PlanStep::Type { field, .. }) = self.plan.get(self.cursor) {
                    self.last_field = Some(field.clone());
                }
                self.cursor = (self.cursor + 1).min(self.plan.len());
            }
            _ => {}
        }
    }

    pub fn next(&mut self, obs: &Observation) -> Intent {
        if self.style.unlock {
            if let Some(f) = obs.element("lock.password") {
                return if f.text.chars().count() == PASSWORD.len() {
                    Intent::simple(IntentOp::Hotkey(vec!["enter".into()]), Purpose::Unlock)
                } else if f.text.is_empty() {
                    Intent::simple(IntentOp::Type(PASSWORD.into()), Purpose::Unlock)
                } else {
                    Intent::simple(IntentOp::Hotkey(vec!["backspace".into()]), Purpose::Unlock)
                };
            }
        }
        if self.style.click_popups && !self.popup_clicked {
            if let Some(p) = &obs.popup {
                return Intent::rect_click(p.ad_strip, Purpose::DismissPopup);
            }
        }
        let intent = self.plan_intent(obs);
        if !self.style.click_popups {
            if let (Some(p), Some(t), IntentOp::Click { .. }) = (&obs.popup, intent.target, &intent.op) {
                let mut with_popup = intent.covers.clone();
                with_popup.push(p.rect);
                if crate::geom::covered_by_union(&t, &with_popup) && !crate::geom::covered_by_union(&t, &intent.covers) {
                    return Intent::rect_click(p.ad_strip, Purpose::DismissPopup);
                }
            }
        }
        intent
    }

    fn plan_intent(&mut self, obs: &Observation) -> Intent {
        loop {
            let Some(step) = self.plan.get(self.cursor).cloned() else {
                return Intent::simple(IntentOp::Done, Purpose::Plan);
            };
            let found = match &step {
                PlanStep::Done => return Intent::simple(IntentOp::Done, Purpose::Plan),
                PlanStep::Click { key, opener } => self.click_step(obs, key, opener.as_deref(), false),
                PlanStep::DoubleClick { key } => self.click_step(obs, key, None, true),
                PlanStep::Type { field, text } => self.type_step(obs, field, text),
                PlanStep::Hotkey { keys, app } => self.hotkey_step(obs, keys, *app),
            };
            match found {
                Some(i) => return i,
                None if self.style.recover && self.backtrack() => continue,
                None => return Intent::simple(IntentOp::Wait, Purpose::Idle),
            }
        }
    }

    /// Moves the cursor back to the previous click step.
    fn backtrack(&mut self) -> bool {
        if self.backtracks >= MAX_BACKTRACKS {
            return false;
        }
        let prev = (0..self.cursor)
            .rev()
            .find(|&i| matches!(self.plan[i], PlanStep::Click { .. } | PlanStep::DoubleClick { .. }));
        match prev {
            Some(i) => {
                self.backtracks += 1;
                self.cursor = i;
                true
            }
            None => false,
        }
    }

    fn visible_target<'a>(&self, obs: &'a Observation, key: &str) -> Option<&'a ElementView> {
        let v = obs.element(key)?;
        if self.style.recover && !clickable(obs, v) {
            return None;
        }
        Some(v)
    }

    fn bring_up(&self, obs: &Observation, key: &str, opener: Option<&str>) -> Option<Intent> {
        if !self.style.recover {
            return None;
        }
        if let Some(o) = opener.and_then(|o| self.visible_target(obs, o)) {
            return Some(Intent::click(obs, o, Purpose::Opener, false));
        }
        let app = app_of_key(key);
        if let Some(i) = app.and_then(|a| self.raise_window(obs, a)) {
            return Some(i);
        }
        if let Some(i) = self.uncover(obs, key) {
            return Some(i);
        }
        app.and_then(|a| self.launcher(obs, a))
    }

    fn raise_window(&self, obs: &Observation, app: AppId) -> Option<Intent> {
        let win = format!("{}.window", app.name());
        let w = self.visible_target(obs, &win)?;
        Some(Intent::click(obs, w, Purpose::Launcher, false))
    }

    /// Minimizes the top-most window painted over `key`.
    fn uncover(&self, obs: &Observation, key: &str) -> Option<Intent> {
        let v = obs.element(key)?;
        let top = obs
            .elements
            .iter()
            .filter(|o| {
                o.z > v.z && o.kind == ElementKind::Window && o.parent.is_none() && o.bounds.intersects(&v.bounds)
            })
            .max_by_key(|o| o.z)?;
        let min = self.visible_target(obs, &format!("{}.minimize", top.app?.name()))?;
        Some(Intent::click(obs, min, Purpose::Launcher, false))
    }

    /// Raises `app`: clicks a visible part of its window, or its launcher.
    fn launcher(&self, obs: &Observation, app: AppId) -> Option<Intent> {
        if let Some(i) = self.raise_window(obs, app) {
            return Some(i);
        }
        let l = self.visible_target(obs, &launcher_key(app))?;
        Some(Intent::click(obs, l, Purpose::Launcher, false))
    }

    fn click_step(&self, obs: &Observation, key: &str, opener: Option<&str>, double: bool) -> Option<Intent> {
        match self.visible_target(obs, key) {
            Some(v) => Some(Intent::click(obs, v, Purpose::Plan, double)),
            None => self.bring_up(obs, key, opener),
        }
    }

    fn type_step(&self, obs: &Observation, field: &str, text: &str) -> Option<Intent> {
        let typed = Intent::simple(IntentOp::Type(text.to_string()), Purpose::Plan);
        if !self.style.check_focus {
            return Some(typed);
        }
        match self.visible_target(obs, field) {
            Some(v) if v.focused => Some(typed),
            Some(v) => Some(Intent::click(obs, v, Purpose::Focus, false)),
            None => self.bring_up(obs, field, None),
        }
    }

    fn hotkey_step(&self, obs: &Observation, keys: &[String], app: Option<AppId>) -> Option<Intent> {
        let pressed = Intent::simple(IntentOp::Hotkey(keys.to_vec()), Purpose::Plan);
        if !self.style.check_focus {
            return Some(pressed);
        }
        if let Some(app) = app {
            let win = format!("{}.window", app.name());
            let focused = obs
                .element(&win)
                .is_some_and(|w| w.focused && w.kind == ElementKind::Window);
            if !focused {
                return self.launcher(obs, app);
            }
        }
        let needs_field = keys.len() == 1 && keys[0] == "enter";
        if let (true, Some(f)) = (needs_field, self.last_field.as_deref()) {
            match self.visible_target(obs, f) {
                Some(v) if v.focused => {}
                Some(v) => return Some(Intent::click(obs, v, Purpose::Focus, false)),
                None => return self.bring_up(obs, f, None),
            }
        }
        Some(pressed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bin_point_avoids_covers() {
        let r = Rect::new(100, 100, 80, 30);
        let p = pick_bin_point(&r, &[]).unwrap();
        assert!(r.contains(p.0, p.1));
        let cover = Rect::new(100, 100, 60, 30);
        let q = pick_bin_point(&r, &[cover]).unwrap();
        assert!(r.contains(q.0, q.1) && !cover.contains(q.0, q.1));
        assert!(pick_bin_point(&r, &[r]).is_none());
    }

    #[test]
    fn naive_point_is_near_the_center() {
        assert_eq!(naive_point(&Rect::new(100, 100, 80, 30)), (150, 110));
    }
}
