use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::apps::{self, open_window, Win};
use super::element::{AppId, Effect, NetDependence};
use super::state::EnvState;
use super::SimError;
use crate::geom::Rect;

/// The manifest shipped with the crate.
pub const BUILTIN_MANIFEST: &str = include_str!("../../assets/tasks.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Os,
    Office,
    Daily,
    Professional,
    Workflow,
}

/// One step of a task's known-optimal solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum PlanStep {
    Click { key: String, opener: Option<String> },
    DoubleClick { key: String },
    Type { field: String, text: String },
    Hotkey { keys: Vec<String>, app: Option<AppId> },
    Done,
}

fn click(key: &str) -> PlanStep {
    PlanStep::Click {
        key: key.into(),
        opener: None,
    }
}

fn item(key: &str, opener: &str) -> PlanStep {
    PlanStep::Click {
        key: key.into(),
        opener: Some(opener.into()),
    }
}

fn type_in(field: &str, text: &str) -> PlanStep {
    PlanStep::Type {
        field: field.into(),
        text: text.into(),
    }
}

fn hotkey(keys: &[&str], app: AppId) -> PlanStep {
    PlanStep::Hotkey {
        keys: keys.iter().map(|k| k.to_string()).collect(),
        app: Some(app),
    }
}

/// The application owning an element key (`"chrome.menu"` → chrome).
pub fn app_of_key(key: &str) -> Option<AppId> {
    key.split('.').next().and_then(AppId::parse)
}

pub type BuildFn = fn(&mut EnvState, &mut ChaCha8Rng);
pub type PlanFn = fn() -> Vec<PlanStep>;
pub type EvalFn = fn(&EnvState) -> f64;

#[derive(Debug, Clone)]
pub struct Task {
    pub id: String,
    pub instruction: String,
    pub category: Category,
    pub builder: String,
    pub evaluator: String,
    pub max_steps: u32,
    build: BuildFn,
    plan: PlanFn,
    eval: EvalFn,
}

impl Task {
    /// The known-optimal action plan, ending with `Done`.
    pub fn plan(&self) -> Vec<PlanStep> {
        (self.plan)()
    }

    /// True when some step of the plan needs external network access.
    pub fn needs_network(&self) -> bool {
        matches!(
            self.id.as_str(),
            "browser-open-bookmark" | "mail-send-draft" | "vscode-install-extension"
        )
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRecord {
    id: String,
    category: Category,
    instruction: String,
    builder: String,
    evaluator: String,
    max_steps: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    version: u32,
    #[serde(default)]
    task: Vec<ManifestRecord>,
}

#[derive(Debug, Clone)]
pub struct TaskSuite {
    pub version: u32,
    pub tasks: Vec<Task>,
}

impl TaskSuite {
    pub fn builtin() -> Self {
        Self::from_manifest(BUILTIN_MANIFEST).expect("built-in manifest is valid")
    }

    pub fn from_manifest(text: &str) -> Result<Self, SimError> {
        let manifest: Manifest = toml::from_str(text).map_err(|e| SimError::Manifest(e.to_string()))?;
        if manifest.version != 1 {
            return Err(SimError::Manifest(format!(
                "unsupported manifest version {}",
                manifest.version
            )));
        }
        let mut tasks: Vec<Task> = Vec::new();
        for rec in manifest.task {
            if tasks.iter().any(|t| t.id == rec.id) {
                return Err(SimError::Manifest(format!("duplicate task id '{}'", rec.id)));
            }
            let (build, plan) = builder(&rec.builder)
                .ok_or_else(|| SimError::Manifest(format!("unknown builder '{}'", rec.builder)))?;
            let eval = evaluator(&rec.evaluator)
                .ok_or_else(|| SimError::Manifest(format!("unknown evaluator '{}'", rec.evaluator)))?;
            let max_steps = rec.max_steps.unwrap_or(super::state::DEFAULT_MAX_STEPS);
            if max_steps == 0 {
                return Err(SimError::Manifest(format!("task '{}': max_steps must be positive", rec.id)));
            }
            tasks.push(Task {
                id: rec.id,
                instruction: rec.instruction,
                category: rec.category,
                builder: rec.builder,
                evaluator: rec.evaluator,
                max_steps,
                build,
                plan,
                eval,
            });
        }
        Ok(Self {
            version: manifest.version,
            tasks,
        })
    }

    pub fn get(&self, id: &str) -> Result<&Task, SimError> {
        self.tasks
            .iter()
            .find(|t| t.id == id)
            .ok_or_else(|| SimError::NotFound(id.to_string()))
    }

    pub fn ids(&self) -> Vec<&str> {
        self.tasks.iter().map(|t| t.id.as_str()).collect()
    }
}

/// Builds the initial state: desktop shell, the task's applications and
/// files, then focus normalization.
pub fn init_task(task: &Task, seed: u64) -> EnvState {
    let mut state = EnvState::empty(seed);
    state.task_id = task.id.clone();
    state.max_steps = task.max_steps;
    let mut rng = state.seeds.env_rng();
    apps::add_shell(&mut state);
    (task.build)(&mut state, &mut rng);
    state.fix_focus();
    state
}

pub fn init_task_by_id(suite: &TaskSuite, id: &str, seed: u64) -> Result<EnvState, SimError> {
    Ok(init_task(suite.get(id)?, seed))
}

pub fn evaluate(task: &Task, state: &EnvState) -> Result<f64, SimError> {
    if !state.is_terminal() {
        return Err(SimError::NotTerminal);
    }
    Ok((task.eval)(state).clamp(0.0, 1.0))
}

// ---- builders ---------------------------------------------------------------

fn jitter(rng: &mut ChaCha8Rng, base: Rect) -> Rect {
    base.translate(rng.random_range(-40..=40), rng.random_range(-30..=30))
}

fn window(state: &mut EnvState, rng: &mut ChaCha8Rng, app: AppId, base: Rect) -> Win {
    let rect = jitter(rng, base);
    open_window(state, app, rect, app.title())
}

fn menubar(win: &Win, state: &mut EnvState, entries: &[(&str, &str, Effect)]) {
    for (i, (suffix, label, effect)) in entries.iter().enumerate() {
        win.button(state, suffix, label, Rect::new(8 + 88 * i as i32, 4, 80, 28), effect.clone());
    }
}

fn activate(state: &mut EnvState, key: &str) {
    let idx = state.index_of_key(key).expect("field exists");
    let id = state.elements[idx].id;
    state.focused_window = state.window_of(idx).map(|w| state.elements[w].id);
    state.fix_focus();
    state.active_field = Some(id);
}

const MAIN: Rect = Rect::new(220, 110, 1100, 720);
const SIDE: Rect = Rect::new(760, 200, 1000, 700);

fn files_window(state: &mut EnvState, rng: &mut ChaCha8Rng) -> Win {
    state.files.insert("home/keep.txt".into(), "keep me".into());
    state.files.insert("home/todo.txt".into(), "- call".into());
    let win = window(state, rng, AppId::Files, MAIN);
    menubar(&win, state, &[("menu.view", "View", Effect::None), ("menu.go", "Go", Effect::None)]);
    win.button(state, "sidebar.home", "Home", Rect::new(8, 60, 180, 36), Effect::None);
    win.button(state, "trash", "Trash", Rect::new(8, 104, 180, 36), Effect::Show("files.trash_panel".into()));
    win.label(state, "item.keep", "keep.txt", Rect::new(220, 70, 200, 24));
    win.label(state, "item.todo", "todo.txt", Rect::new(220, 100, 200, 24));
    win
}

fn build_files_new_folder(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let win = files_window(state, rng);
    win.button(
        state,
        "new_folder",
        "New Folder",
        Rect::new(220, 560, 160, 36),
        Effect::seq([
            Effect::Show("files.dialog".into()),
            Effect::ActivateField("files.dialog.name".into()),
        ]),
    );
    let dialog = win.panel(state, "dialog", "New Folder", Rect::new(420, 200, 440, 220));
    dialog.field(state, "dialog.name", "Folder name", Rect::new(440, 260, 400, 40), Effect::None);
    dialog.button(
        state,
        "dialog.create",
        "Create",
        Rect::new(700, 340, 140, 40),
        Effect::seq([
            Effect::CreateFromField {
                field: "files.dialog.name".into(),
                dir: "home".into(),
            },
            Effect::Hide("files.dialog".into()),
        ]),
    );
}

fn plan_files_new_folder() -> Vec<PlanStep> {
    vec![
        click("files.new_folder"),
        type_in("files.dialog.name", "reports"),
        click("files.dialog.create"),
        PlanStep::Done,
    ]
}

fn build_files_trash(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("trash/old.txt".into(), "old".into());
    state.files.insert("trash/photo.png".into(), "png".into());
    let win = files_window(state, rng);
    let panel = win.panel(state, "trash_panel", "Trash", Rect::new(200, 50, 880, 600));
    panel.button(
        state,
        "empty_trash",
        "Empty Trash",
        Rect::new(880, 60, 180, 36),
        Effect::Show("files.confirm".into()),
    );
    let confirm = win.panel(state, "confirm", "Empty all items?", Rect::new(380, 240, 420, 180));
    confirm.button(state, "confirm.cancel", "Cancel", Rect::new(400, 360, 160, 40), Effect::Hide("files.confirm".into()));
    confirm.button(
        state,
        "confirm.empty",
        "Empty",
        Rect::new(620, 360, 160, 40),
        Effect::seq([Effect::RemovePrefix("trash/".into()), Effect::Hide("files.confirm".into())]),
    );
}

fn plan_files_trash() -> Vec<PlanStep> {
    vec![
        click("files.trash"),
        click("files.empty_trash"),
        click("files.confirm.empty"),
        PlanStep::Done,
    ]
}

fn build_settings(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("settings/theme".into(), "light".into());
    let win = window(state, rng, AppId::Settings, MAIN);
    for (i, (suffix, label)) in [("network", "Network"), ("appearance", "Appearance"), ("sound", "Sound")]
        .into_iter()
        .enumerate()
    {
        let effect = if suffix == "appearance" {
            Effect::Show("settings.appearance_panel".into())
        } else {
            Effect::None
        };
        win.button(state, suffix, label, Rect::new(8, 20 + 48 * i as i32, 200, 40), effect);
    }
    let panel = win.panel(state, "appearance_panel", "Appearance", Rect::new(230, 10, 840, 600));
    panel.button(state, "light", "Light", Rect::new(260, 80, 180, 120), Effect::set_file("settings/theme", "light"));
    panel.button(state, "dark", "Dark", Rect::new(470, 80, 180, 120), Effect::set_file("settings/theme", "dark"));
}

fn plan_settings() -> Vec<PlanStep> {
    vec![click("settings.appearance"), click("settings.dark"), PlanStep::Done]
}

fn build_desktop_only(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("settings/volume".into(), "50".into());
    let win = window(state, rng, AppId::Files, Rect::new(400, 300, 900, 560));
    win.label(state, "item.keep", "keep.txt", Rect::new(220, 70, 200, 24));
}

fn plan_desktop_only() -> Vec<PlanStep> {
    vec![click("tray.volume"), item("tray.volume.mute", "tray.volume"), PlanStep::Done]
}

fn writer_window(state: &mut EnvState, rng: &mut ChaCha8Rng, base: Rect, on_save: Effect) -> Win {
    let win = window(state, rng, AppId::LibreofficeWriter, base);
    if let Some(e) = state.by_key_mut("libreoffice_writer.window") {
        e.on_save = on_save;
    }
    menubar(
        &win,
        state,
        &[
            ("menu.file", "File", Effect::None),
            ("menu.format", "Format", Effect::Toggle("libreoffice_writer.format_menu".into())),
        ],
    );
    win.field(state, "doc", "", Rect::new(40, 60, base.w - 80, base.h - 140), Effect::None);
    let menu = win.menu(state, "format_menu", "Format", Rect::new(96, 32, 220, 96));
    menu.button(state, "bold", "Bold", Rect::new(104, 40, 204, 36), Effect::set_file("docs/notes.style", "bold"));
    menu.button(state, "italic", "Italic", Rect::new(104, 80, 204, 36), Effect::set_file("docs/notes.style", "italic"));
    win
}

fn build_writer_document(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let save = Effect::FieldToFile {
        field: "libreoffice_writer.doc".into(),
        path: "docs/report.odt".into(),
    };
    writer_window(state, rng, MAIN, save);
    activate(state, "libreoffice_writer.doc");
}

fn plan_writer_document() -> Vec<PlanStep> {
    vec![
        type_in("libreoffice_writer.doc", "Quarterly Report"),
        hotkey(&["ctrl", "s"], AppId::LibreofficeWriter),
        PlanStep::Done,
    ]
}

fn build_writer_notes(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("docs/notes.txt".into(), "notes".into());
    writer_window(state, rng, MAIN, Effect::set_file("docs/notes.saved", "yes"));
}

fn plan_writer_notes() -> Vec<PlanStep> {
    vec![
        click("libreoffice_writer.menu.format"),
        item("libreoffice_writer.bold", "libreoffice_writer.menu.format"),
        hotkey(&["ctrl", "s"], AppId::LibreofficeWriter),
        PlanStep::Done,
    ]
}

fn calc_window(state: &mut EnvState, rng: &mut ChaCha8Rng, base: Rect, cell: &str, path: &str) -> Win {
    let win = window(state, rng, AppId::LibreofficeCalc, base);
    menubar(
        &win,
        state,
        &[
            ("menu.file", "File", Effect::None),
            ("save", "Save", Effect::set_file("sheet/saved", "yes")),
        ],
    );
    for r in 0..4 {
        win.label(state, &format!("row{r}"), &format!("B{} {}", r + 1, 10 * (r + 1)), Rect::new(40, 70 + 40 * r, 160, 32));
    }
    win.field(
        state,
        cell,
        "",
        Rect::new(220, 230, 320, 36),
        Effect::FieldToFile {
            field: format!("libreoffice_calc.{cell}"),
            path: path.into(),
        },
    );
    win
}

fn build_calc_sheet(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    calc_window(state, rng, MAIN, "cell_b5", "sheet/B5");
    activate(state, "libreoffice_calc.cell_b5");
}

fn plan_calc_sheet() -> Vec<PlanStep> {
    vec![
        type_in("libreoffice_calc.cell_b5", "=SUM(B1:B4)"),
        hotkey(&["enter"], AppId::LibreofficeCalc),
        click("libreoffice_calc.save"),
        PlanStep::Done,
    ]
}

fn build_impress_deck(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("slides/count".into(), "1".into());
    let win = window(state, rng, AppId::LibreofficeImpress, MAIN);
    menubar(
        &win,
        state,
        &[
            ("menu.file", "File", Effect::None),
            ("menu.slide", "Slide", Effect::Toggle("libreoffice_impress.slide_menu".into())),
        ],
    );
    win.label(state, "thumb1", "Slide 1", Rect::new(20, 60, 160, 90));
    let menu = win.menu(state, "slide_menu", "Slide", Rect::new(96, 32, 240, 96));
    menu.button(
        state,
        "new_slide",
        "New Slide",
        Rect::new(104, 40, 224, 36),
        Effect::set_file("slides/count", "2"),
    );
    menu.button(state, "delete_slide", "Delete Slide", Rect::new(104, 80, 224, 36), Effect::None);
}

fn plan_impress_deck() -> Vec<PlanStep> {
    vec![
        click("libreoffice_impress.menu.slide"),
        item("libreoffice_impress.new_slide", "libreoffice_impress.menu.slide"),
        PlanStep::Done,
    ]
}

fn chrome_window(state: &mut EnvState, rng: &mut ChaCha8Rng, base: Rect) -> Win {
    state.files.insert("chrome/search_engine".into(), "Google".into());
    let win = window(state, rng, AppId::Chrome, base);
    win.field(state, "address", "Search or type URL", Rect::new(8, 4, base.w - 120, 32), Effect::None);
    win.button(state, "menu", "...", Rect::new(base.w - 100, 4, 80, 32), Effect::Toggle("chrome.main_menu".into()));
    let menu = win.menu(state, "main_menu", "Chrome", Rect::new(base.w - 300, 40, 280, 96));
    menu.button(
        state,
        "settings",
        "Settings",
        Rect::new(base.w - 292, 48, 264, 36),
        Effect::Show("chrome.settings_panel".into()),
    );
    menu.button(state, "history", "History", Rect::new(base.w - 292, 88, 264, 36), Effect::None);
    win.banner(
        state,
        "offline",
        "This site can't be reached",
        Rect::new(40, 300, 600, 60),
        NetDependence::Offline,
    );
    win
}

fn build_chrome_settings(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let win = chrome_window(state, rng, MAIN);
    let panel = win.panel(state, "settings_panel", "Settings", Rect::new(20, 50, 760, 560));
    for (i, name) in ["Google", "Bing", "DuckDuckGo"].into_iter().enumerate() {
        let suffix = format!("engine_{}", name.to_ascii_lowercase());
        panel.button(
            state,
            &suffix,
            name,
            Rect::new(60, 120 + 56 * i as i32, 240, 44),
            Effect::set_file("chrome/search_engine", name),
        );
    }
}

fn plan_chrome_settings() -> Vec<PlanStep> {
    vec![
        click("chrome.menu"),
        item("chrome.settings", "chrome.menu"),
        click("chrome.engine_duckduckgo"),
        PlanStep::Done,
    ]
}

fn bookmark_bar(win: &Win, state: &mut EnvState, x0: i32, pages: &[(&str, &str, &str, bool)]) {
    for (i, (suffix, label, url, online)) in pages.iter().enumerate() {
        let set = Effect::set_file("chrome/current_url", url);
        let effect = if *online { Effect::Online(Box::new(set)) } else { set };
        win.button(state, suffix, label, Rect::new(x0 + 128 * i as i32, 44, 120, 32), effect);
    }
}

fn build_chrome_bookmarks(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let win = chrome_window(state, rng, MAIN);
    bookmark_bar(
        &win,
        state,
        8,
        &[
            ("bookmark.mail", "Mail", "https://mail.example.org", true),
            ("bookmark.news", "News", "https://news.example.org", true),
            ("bookmark.maps", "Maps", "https://maps.example.org", true),
        ],
    );
}

fn plan_chrome_bookmarks() -> Vec<PlanStep> {
    vec![click("chrome.bookmark.news"), PlanStep::Done]
}

fn vlc_window(state: &mut EnvState, rng: &mut ChaCha8Rng, base: Rect) -> Win {
    let win = window(state, rng, AppId::Vlc, base);
    menubar(
        &win,
        state,
        &[
            ("menu.media", "Media", Effect::Toggle("vlc.media_menu".into())),
            ("menu.video", "Video", Effect::Toggle("vlc.video_menu".into())),
        ],
    );
    let media = win.menu(state, "media_menu", "Media", Rect::new(8, 32, 240, 96));
    media.button(state, "open_file", "Open File", Rect::new(16, 40, 224, 36), Effect::None);
    media.button(state, "open_recent", "Open Recent", Rect::new(16, 80, 224, 36), Effect::Show("vlc.recent_menu".into()));
    let recent = win.menu(state, "recent_menu", "Recent", Rect::new(250, 80, 260, 96));
    recent.button(state, "recent.song", "song.mp3", Rect::new(258, 88, 244, 36), Effect::set_file("vlc/playing", "song.mp3"));
    recent.button(state, "recent.talk", "talk.ogg", Rect::new(258, 128, 244, 36), Effect::set_file("vlc/playing", "talk.ogg"));
    win
}

fn build_vlc_player(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    vlc_window(state, rng, MAIN);
}

fn plan_vlc_player() -> Vec<PlanStep> {
    vec![
        click("vlc.menu.media"),
        item("vlc.open_recent", "vlc.menu.media"),
        item("vlc.recent.song", "vlc.menu.media"),
        PlanStep::Done,
    ]
}

fn mail_window(state: &mut EnvState, rng: &mut ChaCha8Rng, send: Effect) -> Win {
    let win = window(state, rng, AppId::Thunderbird, MAIN);
    win.label(state, "compose", "Write: (no subject)", Rect::new(20, 10, 400, 28));
    win.field(state, "to", "To", Rect::new(20, 50, 600, 36), Effect::None);
    win.field(state, "subject", "Subject", Rect::new(20, 100, 600, 36), Effect::None);
    win.field(state, "body", "", Rect::new(20, 150, 1000, 400), Effect::None);
    win.button(state, "send", "Send", Rect::new(940, 50, 120, 40), send);
    win.banner(
        state,
        "offline",
        "Server can't be reached",
        Rect::new(640, 100, 420, 40),
        NetDependence::Offline,
    );
    win
}

fn build_mail_compose(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let send = Effect::Online(Box::new(Effect::seq([
        Effect::FieldToFile {
            field: "thunderbird.to".into(),
            path: "mail/sent/to".into(),
        },
        Effect::FieldToFile {
            field: "thunderbird.subject".into(),
            path: "mail/sent/subject".into(),
        },
    ])));
    mail_window(state, rng, send);
    activate(state, "thunderbird.to");
}

fn plan_mail_compose() -> Vec<PlanStep> {
    vec![
        type_in("thunderbird.to", "alice@example.com"),
        click("thunderbird.subject"),
        type_in("thunderbird.subject", "Minutes"),
        click("thunderbird.send"),
        PlanStep::Done,
    ]
}

fn build_mail_attachment(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("docs/report.pdf".into(), "%PDF".into());
    let send = Effect::seq([
        Effect::FieldToFile {
            field: "thunderbird.to".into(),
            path: "mail/sent/to".into(),
        },
        Effect::CopyFile {
            from: "mail/draft/attachment".into(),
            to: "mail/sent/attachment".into(),
        },
    ]);
    let win = mail_window(state, rng, send);
    win.button(state, "attach", "Attach", Rect::new(940, 100, 120, 40), Effect::Show("thunderbird.attach_panel".into()));
    let panel = win.panel(state, "attach_panel", "Attach file", Rect::new(640, 160, 420, 200));
    panel.button(
        state,
        "attach.report",
        "report.pdf",
        Rect::new(660, 220, 380, 40),
        Effect::seq([
            Effect::set_file("mail/draft/attachment", "report.pdf"),
            Effect::Hide("thunderbird.attach_panel".into()),
        ]),
    );
    activate(state, "thunderbird.to");
}

fn plan_mail_attachment() -> Vec<PlanStep> {
    vec![
        type_in("thunderbird.to", "bob@example.com"),
        click("thunderbird.attach"),
        click("thunderbird.attach.report"),
        click("thunderbird.send"),
        PlanStep::Done,
    ]
}

fn vscode_window(state: &mut EnvState, rng: &mut ChaCha8Rng) -> Win {
    let win = window(state, rng, AppId::Vscode, MAIN);
    menubar(
        &win,
        state,
        &[
            ("menu.file", "File", Effect::Toggle("vscode.file_menu".into())),
            ("menu.edit", "Edit", Effect::None),
        ],
    );
    win.button(state, "explorer", "Files", Rect::new(8, 60, 48, 48), Effect::Show("vscode.explorer_panel".into()));
    win.button(state, "extensions", "Ext", Rect::new(8, 116, 48, 48), Effect::seq([
        Effect::Show("vscode.extensions_panel".into()),
        Effect::ActivateField("vscode.ext_search".into()),
    ]));
    win.banner(
        state,
        "offline",
        "Marketplace can't be reached",
        Rect::new(600, 560, 460, 40),
        NetDependence::Offline,
    );
    win
}

fn build_vscode_explorer(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("project/main.py".into(), "print('hi')".into());
    let win = vscode_window(state, rng);
    let panel = win.panel(state, "explorer_panel", "Explorer", Rect::new(64, 56, 300, 500));
    panel.button(state, "file.readme", "README.md", Rect::new(72, 100, 280, 32), Effect::set_file("vscode/open", "README.md"));
    panel.button(state, "file.main_py", "main.py", Rect::new(72, 140, 280, 32), Effect::set_file("vscode/open", "main.py"));
}

fn plan_vscode_explorer() -> Vec<PlanStep> {
    vec![click("vscode.explorer"), click("vscode.file.main_py"), PlanStep::Done]
}

fn build_vscode_extensions(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let win = vscode_window(state, rng);
    let panel = win.panel(state, "extensions_panel", "Extensions", Rect::new(64, 56, 520, 500));
    panel.field(
        state,
        "ext_search",
        "Search extensions",
        Rect::new(72, 64, 500, 36),
        Effect::Show("vscode.ext_result".into()),
    );
    let result = win.panel(state, "ext_result", "Python", Rect::new(72, 120, 500, 120));
    result.button(
        state,
        "ext.install",
        "Install",
        Rect::new(440, 180, 120, 40),
        Effect::Online(Box::new(Effect::set_file("vscode/extensions/python", "installed"))),
    );
}

fn plan_vscode_extensions() -> Vec<PlanStep> {
    vec![
        click("vscode.extensions"),
        type_in("vscode.ext_search", "python"),
        hotkey(&["enter"], AppId::Vscode),
        click("vscode.ext.install"),
        PlanStep::Done,
    ]
}

fn build_vscode_project(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("project/main.py".into(), "print('hi')".into());
    let win = vscode_window(state, rng);
    let menu = win.menu(state, "file_menu", "File", Rect::new(8, 32, 240, 96));
    menu.button(
        state,
        "new_file",
        "New File",
        Rect::new(16, 40, 224, 36),
        Effect::seq([
            Effect::Show("vscode.name_panel".into()),
            Effect::ActivateField("vscode.new_name".into()),
        ]),
    );
    menu.button(state, "open_folder", "Open Folder", Rect::new(16, 80, 224, 36), Effect::None);
    let panel = win.panel(state, "name_panel", "New file name", Rect::new(300, 80, 500, 100));
    panel.field(
        state,
        "new_name",
        "File name",
        Rect::new(320, 120, 460, 36),
        Effect::seq([
            Effect::CreateFromField {
                field: "vscode.new_name".into(),
                dir: "project".into(),
            },
            Effect::Hide("vscode.name_panel".into()),
        ]),
    );
}

fn plan_vscode_project() -> Vec<PlanStep> {
    vec![
        click("vscode.menu.file"),
        item("vscode.new_file", "vscode.menu.file"),
        type_in("vscode.new_name", "app.py"),
        hotkey(&["enter"], AppId::Vscode),
        PlanStep::Done,
    ]
}

fn build_gimp_image(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    state.files.insert("images/photo.png".into(), "png".into());
    let win = window(state, rng, AppId::Gimp, MAIN);
    if let Some(e) = state.by_key_mut("gimp.window") {
        e.on_save = Effect::set_file("images/photo.saved", "yes");
    }
    menubar(
        &win,
        state,
        &[
            ("menu.file", "File", Effect::None),
            ("menu.image", "Image", Effect::Toggle("gimp.image_menu".into())),
        ],
    );
    win.label(state, "canvas", "photo.png", Rect::new(300, 200, 400, 300));
    let menu = win.menu(state, "image_menu", "Image", Rect::new(96, 32, 260, 96));
    menu.button(state, "transform", "Transform", Rect::new(104, 40, 244, 36), Effect::Show("gimp.transform_menu".into()));
    menu.button(state, "scale", "Scale Image", Rect::new(104, 80, 244, 36), Effect::None);
    let sub = win.menu(state, "transform_menu", "Transform", Rect::new(360, 40, 260, 96));
    sub.button(
        state,
        "flip_h",
        "Flip Horizontally",
        Rect::new(368, 48, 244, 36),
        Effect::set_file("images/photo.flip", "horizontal"),
    );
    sub.button(
        state,
        "flip_v",
        "Flip Vertically",
        Rect::new(368, 88, 244, 36),
        Effect::set_file("images/photo.flip", "vertical"),
    );
}

fn plan_gimp_image() -> Vec<PlanStep> {
    vec![
        click("gimp.menu.image"),
        item("gimp.transform", "gimp.menu.image"),
        item("gimp.flip_h", "gimp.menu.image"),
        hotkey(&["ctrl", "s"], AppId::Gimp),
        PlanStep::Done,
    ]
}

fn build_writer_and_chrome(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let win = chrome_window(state, rng, SIDE);
    bookmark_bar(
        &win,
        state,
        400,
        &[
            ("bookmark.team", "Team", "https://team.example.org", false),
            ("bookmark.wiki", "Wiki", "https://wiki.example.org", false),
        ],
    );
    let save = Effect::FieldToFile {
        field: "libreoffice_writer.doc".into(),
        path: "docs/notes.txt".into(),
    };
    writer_window(state, rng, Rect::new(120, 300, 760, 560), save);
    activate(state, "libreoffice_writer.doc");
}

fn plan_writer_and_chrome() -> Vec<PlanStep> {
    vec![
        type_in("libreoffice_writer.doc", "Meeting at 10"),
        hotkey(&["ctrl", "s"], AppId::LibreofficeWriter),
        click("chrome.bookmark.team"),
        PlanStep::Done,
    ]
}

fn build_calc_and_writer(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let writer = window(state, rng, AppId::LibreofficeWriter, SIDE);
    writer.label(state, "doc", "summary.odt", Rect::new(40, 60, 400, 32));
    writer.button(
        state,
        "paste",
        "Paste",
        Rect::new(400, 4, 96, 32),
        Effect::CopyFile {
            from: "sheet/A1".into(),
            to: "docs/summary.txt".into(),
        },
    );
    calc_window(state, rng, Rect::new(120, 120, 700, 560), "cell_a1", "sheet/A1");
    activate(state, "libreoffice_calc.cell_a1");
}

fn plan_calc_and_writer() -> Vec<PlanStep> {
    vec![
        type_in("libreoffice_calc.cell_a1", "42"),
        hotkey(&["enter"], AppId::LibreofficeCalc),
        click("libreoffice_writer.paste"),
        PlanStep::Done,
    ]
}

fn build_vlc_caption(state: &mut EnvState, rng: &mut ChaCha8Rng) {
    let win = vlc_window(state, rng, MAIN);
    win.field(state, "caption", "Caption", Rect::new(40, 600, 600, 40), Effect::None);
    let menu = win.menu(state, "video_menu", "Video", Rect::new(96, 32, 240, 96));
    menu.button(
        state,
        "snapshot",
        "Take Snapshot",
        Rect::new(104, 40, 224, 36),
        Effect::seq([
            Effect::FieldToFile {
                field: "vlc.caption".into(),
                path: "pictures/snap.caption".into(),
            },
            Effect::set_file("pictures/snap.png", "frame"),
        ]),
    );
    menu.button(state, "fullscreen", "Fullscreen", Rect::new(104, 80, 224, 36), Effect::None);
    activate(state, "vlc.caption");
}

fn plan_vlc_caption() -> Vec<PlanStep> {
    vec![
        type_in("vlc.caption", "frame one"),
        click("vlc.menu.video"),
        item("vlc.snapshot", "vlc.menu.video"),
        PlanStep::Done,
    ]
}

fn builder(name: &str) -> Option<(BuildFn, PlanFn)> {
    let entry: (BuildFn, PlanFn) = match name {
        "files_new_folder" => (build_files_new_folder, plan_files_new_folder),
        "settings_appearance" => (build_settings, plan_settings),
        "files_trash" => (build_files_trash, plan_files_trash),
        "desktop_only" => (build_desktop_only, plan_desktop_only),
        "writer_document" => (build_writer_document, plan_writer_document),
        "calc_sheet" => (build_calc_sheet, plan_calc_sheet),
        "impress_deck" => (build_impress_deck, plan_impress_deck),
        "writer_notes" => (build_writer_notes, plan_writer_notes),
        "chrome_settings" => (build_chrome_settings, plan_chrome_settings),
        "chrome_bookmarks" => (build_chrome_bookmarks, plan_chrome_bookmarks),
        "vlc_player" => (build_vlc_player, plan_vlc_player),
        "mail_compose" => (build_mail_compose, plan_mail_compose),
        "vscode_explorer" => (build_vscode_explorer, plan_vscode_explorer),
        "vscode_extensions" => (build_vscode_extensions, plan_vscode_extensions),
        "gimp_image" => (build_gimp_image, plan_gimp_image),
        "vscode_project" => (build_vscode_project, plan_vscode_project),
        "writer_and_chrome" => (build_writer_and_chrome, plan_writer_and_chrome),
        "mail_attachment" => (build_mail_attachment, plan_mail_attachment),
        "calc_and_writer" => (build_calc_and_writer, plan_calc_and_writer),
        "vlc_caption" => (build_vlc_caption, plan_vlc_caption),
        _ => return None,
    };
    Some(entry)
}

// ---- evaluators -------------------------------------------------------------

fn file_is(state: &EnvState, path: &str, value: &str) -> bool {
    state.files.get(path).is_some_and(|v| v == value)
}

fn score(checks: &[bool]) -> f64 {
    if checks.iter().all(|c| *c) {
        1.0
    } else {
        0.0
    }
}

fn evaluator(name: &str) -> Option<EvalFn> {
    let f: EvalFn = match name {
        "home_has_reports" => |s| score(&[s.files.contains_key("home/reports")]),
        "theme_is_dark" => |s| score(&[file_is(s, "settings/theme", "dark")]),
        "trash_empty_home_kept" => |s| {
            score(&[
                !s.files.keys().any(|k| k.starts_with("trash/")),
                s.files.contains_key("home/keep.txt"),
            ])
        },
        "volume_muted" => |s| score(&[file_is(s, "settings/volume", "muted")]),
        "report_title_saved" => |s| {
            score(&[s
                .files
                .get("docs/report.odt")
                .is_some_and(|v| v.contains("Quarterly Report"))])
        },
        "sum_formula_saved" => |s| {
            let formula = s
                .files
                .get("sheet/B5")
                .is_some_and(|v| v.replace(' ', "").eq_ignore_ascii_case("=SUM(B1:B4)"));
            match (formula, file_is(s, "sheet/saved", "yes")) {
                (true, true) => 1.0,
                (true, false) => 0.5,
                _ => 0.0,
            }
        },
        "deck_has_two_slides" => |s| score(&[file_is(s, "slides/count", "2")]),
        "notes_bold_saved" => |s| {
            score(&[
                file_is(s, "docs/notes.style", "bold"),
                file_is(s, "docs/notes.saved", "yes"),
            ])
        },
        "search_engine_ddg" => |s| score(&[file_is(s, "chrome/search_engine", "DuckDuckGo")]),
        "news_page_open" => |s| score(&[file_is(s, "chrome/current_url", "https://news.example.org")]),
        "recent_song_playing" => |s| score(&[file_is(s, "vlc/playing", "song.mp3")]),
        "minutes_sent" => |s| {
            score(&[
                file_is(s, "mail/sent/to", "alice@example.com"),
                file_is(s, "mail/sent/subject", "Minutes"),
            ])
        },
        "main_py_open" => |s| score(&[file_is(s, "vscode/open", "main.py")]),
        "python_extension_installed" => |s| score(&[file_is(s, "vscode/extensions/python", "installed")]),
        "image_flipped_saved" => |s| {
            score(&[
                file_is(s, "images/photo.flip", "horizontal"),
                file_is(s, "images/photo.saved", "yes"),
            ])
        },
        "app_py_created" => |s| score(&[s.files.contains_key("project/app.py")]),
        "notes_and_team_page" => |s| {
            score(&[
                s.files.get("docs/notes.txt").is_some_and(|v| v.contains("Meeting at 10")),
                file_is(s, "chrome/current_url", "https://team.example.org"),
            ])
        },
        "report_mailed" => |s| {
            let to = file_is(s, "mail/sent/to", "bob@example.com");
            let attached = file_is(s, "mail/sent/attachment", "report.pdf");
            match (to, attached) {
                (true, true) => 1.0,
                (true, false) | (false, true) => 0.5,
                _ => 0.0,
            }
        },
        "summary_has_value" => |s| score(&[file_is(s, "docs/summary.txt", "42")]),
        "snapshot_captioned" => |s| {
            score(&[
                file_is(s, "pictures/snap.caption", "frame one"),
                s.files.contains_key("pictures/snap.png"),
            ])
        },
        _ => return None,
    };
    Some(f)
}
