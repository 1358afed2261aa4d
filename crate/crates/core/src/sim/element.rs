use serde::{Deserialize, Serialize};

use crate::geom::Rect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementId(pub u32);

impl std::fmt::Display for ElementId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ElementKind {
    Button,
    Window,
    Menu,
    Banner,
    Icon,
    AppLauncher,
    PopUp,
    LockScreen,
    TextField,
    Label,
}

/// Applications known to the desktop. The first eight are the launcher
/// entries in launch-priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppId {
    Vscode,
    Chrome,
    Gimp,
    LibreofficeCalc,
    LibreofficeImpress,
    LibreofficeWriter,
    Vlc,
    Thunderbird,
    Files,
    Settings,
}

impl AppId {
    pub const LAUNCHER: [AppId; 8] = [
        AppId::Vscode,
        AppId::Chrome,
        AppId::Gimp,
        AppId::LibreofficeCalc,
        AppId::LibreofficeImpress,
        AppId::LibreofficeWriter,
        AppId::Vlc,
        AppId::Thunderbird,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AppId::Vscode => "vscode",
            AppId::Chrome => "chrome",
            AppId::Gimp => "gimp",
            AppId::LibreofficeCalc => "libreoffice_calc",
            AppId::LibreofficeImpress => "libreoffice_impress",
            AppId::LibreofficeWriter => "libreoffice_writer",
            AppId::Vlc => "vlc",
            AppId::Thunderbird => "thunderbird",
            AppId::Files => "files",
            AppId::Settings => "settings",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            AppId::Vscode => "Visual Studio Code",
            AppId::Chrome => "Google Chrome",
            AppId::Gimp => "GIMP",
            AppId::LibreofficeCalc => "LibreOffice Calc",
            AppId::LibreofficeImpress => "LibreOffice Impress",
            AppId::LibreofficeWriter => "LibreOffice Writer",
            AppId::Vlc => "VLC media player",
            AppId::Thunderbird => "Thunderbird Mail",
            AppId::Files => "Files",
            AppId::Settings => "Settings",
        }
    }

    pub fn parse(s: &str) -> Option<AppId> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        [
            AppId::Vscode,
            AppId::Chrome,
            AppId::Gimp,
            AppId::LibreofficeCalc,
            AppId::LibreofficeImpress,
            AppId::LibreofficeWriter,
            AppId::Vlc,
            AppId::Thunderbird,
            AppId::Files,
            AppId::Settings,
        ]
        .into_iter()
        .find(|a| a.name() == norm)
    }
}

impl std::fmt::Display for AppId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Paint layer. Elements are kept sorted by layer; within a layer the
/// vector order is the stacking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layer {
    Desktop,
    Windows,
    Shell,
}

/// Visibility condition tied to external network reachability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetDependence {
    #[default]
    Always,
    Online,
    Offline,
}

/// What happens when an element is activated. Element references are keys.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Effect {
    #[default]
    None,
    Show(String),
    Hide(String),
    Toggle(String),
    SetFile { path: String, value: String },
    /// Writes the current text of a field into a file.
    FieldToFile { field: String, path: String },
    /// Creates `dir/<field text>` with empty content when the field is non-empty.
    CreateFromField { field: String, dir: String },
    CopyFile { from: String, to: String },
    RemovePrefix(String),
    ActivateField(String),
    SetText { key: String, text: String },
    Launch(AppId),
    /// Closes the window that owns the activated element.
    Close,
    /// Minimizes the window that owns the activated element.
    Minimize,
    /// Runs the inner effect only while external hosts are reachable.
    Online(Box<Effect>),
    Seq(Vec<Effect>),
}

impl Effect {
    pub fn seq(effects: impl IntoIterator<Item = Effect>) -> Effect {
        Effect::Seq(effects.into_iter().collect())
    }

    pub fn set_file(path: &str, value: &str) -> Effect {
        Effect::SetFile {
            path: path.to_string(),
            value: value.to_string(),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, Effect::None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiElement {
    pub id: ElementId,
    pub key: String,
    pub kind: ElementKind,
    pub bounds: Rect,
    pub label: String,
    pub interactable: bool,
    pub app: Option<AppId>,
    pub parent: Option<ElementId>,
    pub layer: Layer,
    pub hidden: bool,
    pub minimized: bool,
    pub net: NetDependence,
    /// Editable content for text fields.
    pub text: String,
    pub font_size: i32,
    pub on_click: Effect,
    pub on_double: Option<Effect>,
    pub on_enter: Effect,
    pub on_save: Effect,
    /// Transient elements (menus) close on any click outside them.
    pub transient: bool,
}

impl UiElement {
    pub fn new(key: impl Into<String>, kind: ElementKind, bounds: Rect) -> Self {
        let interactable = matches!(
            kind,
            ElementKind::Button | ElementKind::Icon | ElementKind::AppLauncher | ElementKind::TextField
        );
        Self {
            id: ElementId(0),
            key: key.into(),
            kind,
            bounds,
            label: String::new(),
            interactable,
            app: None,
            parent: None,
            layer: Layer::Windows,
            hidden: false,
            minimized: false,
            net: NetDependence::Always,
            text: String::new(),
            font_size: 16,
            on_click: Effect::None,
            on_double: None,
            on_enter: Effect::None,
            on_save: Effect::None,
            transient: kind == ElementKind::Menu,
        }
    }

    pub fn label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn on_click(mut self, effect: Effect) -> Self {
        self.on_click = effect;
        self
    }

    pub fn on_double(mut self, effect: Effect) -> Self {
        self.on_double = Some(effect);
        self
    }

    pub fn on_enter(mut self, effect: Effect) -> Self {
        self.on_enter = effect;
        self
    }

    pub fn on_save(mut self, effect: Effect) -> Self {
        self.on_save = effect;
        self
    }

    pub fn layer(mut self, layer: Layer) -> Self {
        self.layer = layer;
        self
    }

    pub fn hidden(mut self, hidden: bool) -> Self {
        self.hidden = hidden;
        self
    }

    pub fn interactable(mut self, flag: bool) -> Self {
        self.interactable = flag;
        self
    }

    pub fn app(mut self, app: AppId) -> Self {
        self.app = Some(app);
        self
    }

    pub fn net(mut self, net: NetDependence) -> Self {
        self.net = net;
        self
    }

    pub fn text(mut self, text: impl Into<String>) -> Self {
        self.text = text.into();
        self
    }

    pub fn font_size(mut self, size: i32) -> Self {
        self.font_size = size;
        self
    }
}
