use super::element::{AppId, Effect, ElementId, ElementKind, Layer, NetDependence, UiElement};
use super::state::EnvState;
use crate::geom::Rect;

pub const TOP_BAR_H: i32 = 32;
pub const LAUNCHER_W: i32 = 72;
pub const TITLE_H: i32 = 32;
pub const ICON_SIZE: i32 = 56;

pub fn launcher_icon_rect(slot: usize) -> Rect {
    Rect::new(8, TOP_BAR_H + 12 + slot as i32 * 72, ICON_SIZE, ICON_SIZE)
}

pub fn launcher_key(app: AppId) -> String {
    format!("launcher.{}", app.name())
}

/// Adds only the launcher bar with its eight application icons.
pub fn add_launcher(state: &mut EnvState) {
    state.add(
        UiElement::new("launcher", ElementKind::Banner, Rect::new(0, TOP_BAR_H, LAUNCHER_W, state.screen_h - TOP_BAR_H))
            .layer(Layer::Shell),
    );
    for (slot, app) in AppId::LAUNCHER.into_iter().enumerate() {
        state.add(
            UiElement::new(launcher_key(app), ElementKind::AppLauncher, launcher_icon_rect(slot))
                .label(app.title())
                .app(app)
                .layer(Layer::Shell)
                .font_size(8)
                .on_click(Effect::Launch(app)),
        );
    }
}

/// Adds the standard shell: top bar with tray, launcher and desktop icons.
pub fn add_shell(state: &mut EnvState) {
    let w = state.screen_w;
    state.add(
        UiElement::new("topbar", ElementKind::Banner, Rect::new(0, 0, w, TOP_BAR_H))
            .label("Activities")
            .layer(Layer::Shell),
    );
    state.add(
        UiElement::new("tray.net.online", ElementKind::Icon, Rect::new(w - 340, 4, 120, 24))
            .label("net: online")
            .interactable(false)
            .net(NetDependence::Online)
            .layer(Layer::Shell),
    );
    state.add(
        UiElement::new("tray.net.offline", ElementKind::Icon, Rect::new(w - 340, 4, 120, 24))
            .label("net: offline")
            .interactable(false)
            .net(NetDependence::Offline)
            .layer(Layer::Shell),
    );
    state.add(
        UiElement::new("tray.volume", ElementKind::Button, Rect::new(w - 200, 4, 80, 24))
            .label("vol")
            .layer(Layer::Shell)
            .on_click(Effect::Toggle("tray.volume.menu".into())),
    );
    let menu = state.add(
        UiElement::new("tray.volume.menu", ElementKind::Menu, Rect::new(w - 320, TOP_BAR_H, 240, 88))
            .label("Sound")
            .layer(Layer::Shell)
            .hidden(true),
    );
    state.add_child(
        menu,
        UiElement::new("tray.volume.mute", ElementKind::Button, Rect::new(w - 312, TOP_BAR_H + 8, 224, 32))
            .label("Mute")
            .on_click(Effect::set_file("settings/volume", "muted")),
    );
    state.add_child(
        menu,
        UiElement::new("tray.volume.max", ElementKind::Button, Rect::new(w - 312, TOP_BAR_H + 48, 224, 32))
            .label("Max volume")
            .on_click(Effect::set_file("settings/volume", "100")),
    );
    state.add(
        UiElement::new("tray.power", ElementKind::Button, Rect::new(w - 104, 4, 96, 24))
            .label("power")
            .layer(Layer::Shell)
            .on_click(Effect::None),
    );
    add_launcher(state);
    state.add(
        UiElement::new("desktop.home", ElementKind::Icon, Rect::new(w - 120, 60, 72, 72))
            .label("Home")
            .layer(Layer::Desktop)
            .on_double(Effect::Launch(AppId::Files)),
    );
    state.add(
        UiElement::new("desktop.trash", ElementKind::Icon, Rect::new(w - 120, 170, 72, 72))
            .label("Trash")
            .layer(Layer::Desktop)
            .on_double(Effect::Launch(AppId::Files)),
    );
}

/// Handle for populating a window with relative coordinates.
#[derive(Debug, Clone)]
pub struct Win {
    pub id: ElementId,
    pub app: AppId,
    pub bounds: Rect,
}

impl Win {
    pub fn key(&self, suffix: &str) -> String {
        format!("{}.{}", self.app.name(), suffix)
    }

    fn abs(&self, r: Rect) -> Rect {
        r.translate(self.bounds.x, self.bounds.y + TITLE_H)
    }

    pub fn button(&self, state: &mut EnvState, suffix: &str, label: &str, rel: Rect, effect: Effect) -> ElementId {
        state.add_child(
            self.id,
            UiElement::new(self.key(suffix), ElementKind::Button, self.abs(rel))
                .label(label)
                .on_click(effect),
        )
    }

    pub fn field(&self, state: &mut EnvState, suffix: &str, label: &str, rel: Rect, on_enter: Effect) -> ElementId {
        state.add_child(
            self.id,
            UiElement::new(self.key(suffix), ElementKind::TextField, self.abs(rel))
                .label(label)
                .on_enter(on_enter),
        )
    }

    pub fn label(&self, state: &mut EnvState, suffix: &str, text: &str, rel: Rect) -> ElementId {
        state.add_child(
            self.id,
            UiElement::new(self.key(suffix), ElementKind::Label, self.abs(rel)).label(text),
        )
    }

    pub fn banner(&self, state: &mut EnvState, suffix: &str, text: &str, rel: Rect, net: NetDependence) -> ElementId {
        state.add_child(
            self.id,
            UiElement::new(self.key(suffix), ElementKind::Banner, self.abs(rel))
                .label(text)
                .net(net),
        )
    }

    /// A hidden transient menu; returns a handle whose children use the same
    /// window-relative coordinates.
    pub fn menu(&self, state: &mut EnvState, suffix: &str, label: &str, rel: Rect) -> Menu {
        let id = state.add_child(
            self.id,
            UiElement::new(self.key(suffix), ElementKind::Menu, self.abs(rel))
                .label(label)
                .hidden(true),
        );
        Menu { id, win: self.clone() }
    }

    /// A hidden non-transient panel (dialog) inside the window.
    pub fn panel(&self, state: &mut EnvState, suffix: &str, label: &str, rel: Rect) -> Menu {
        let id = state.add_child(
            self.id,
            UiElement::new(self.key(suffix), ElementKind::Window, self.abs(rel))
                .label(label)
                .hidden(true),
        );
        Menu { id, win: self.clone() }
    }
}

#[derive(Debug, Clone)]
pub struct Menu {
    pub id: ElementId,
    pub win: Win,
}

impl Menu {
    pub fn button(&self, state: &mut EnvState, suffix: &str, label: &str, rel: Rect, effect: Effect) -> ElementId {
        state.add_child(
            self.id,
            UiElement::new(self.win.key(suffix), ElementKind::Button, self.win.abs(rel))
                .label(label)
                .on_click(effect),
        )
    }

    pub fn field(&self, state: &mut EnvState, suffix: &str, label: &str, rel: Rect, on_enter: Effect) -> ElementId {
        state.add_child(
            self.id,
            UiElement::new(self.win.key(suffix), ElementKind::TextField, self.win.abs(rel))
                .label(label)
                .on_enter(on_enter),
        )
    }
}

/// Opens a window with title bar, minimize and close buttons.
pub fn open_window(state: &mut EnvState, app: AppId, bounds: Rect, title: &str) -> Win {
    let id = state.add(
        UiElement::new(format!("{}.window", app.name()), ElementKind::Window, bounds)
            .label(title)
            .app(app),
    );
    let win = Win { id, app, bounds };
    let r = bounds.right();
    state.add_child(
        id,
        UiElement::new(win.key("minimize"), ElementKind::Button, Rect::new(r - 72, bounds.y + 4, 28, 24))
            .label("_")
            .on_click(Effect::Minimize),
    );
    state.add_child(
        id,
        UiElement::new(win.key("close"), ElementKind::Button, Rect::new(r - 36, bounds.y + 4, 28, 24))
            .label("x")
            .on_click(Effect::Close),
    );
    state.fix_focus();
    win
}

/// Default placement of a freshly launched window.
pub fn default_window_rect(app: AppId) -> Rect {
    let i = AppId::LAUNCHER.iter().position(|a| *a == app).unwrap_or(8) as i32;
    Rect::new(180 + 36 * i, 80 + 28 * i, 1200, 760)
}

/// Opens an application window with a minimal, task-neutral body.
pub fn open_generic_window(state: &mut EnvState, app: AppId) {
    let win = open_window(state, app, default_window_rect(app), app.title());
    win.button(state, "menu.file", "File", Rect::new(8, 4, 64, 28), Effect::None);
    win.button(state, "menu.help", "Help", Rect::new(80, 4, 64, 28), Effect::None);
    win.label(state, "welcome", &format!("Welcome to {}", app.title()), Rect::new(40, 80, 600, 32));
}
