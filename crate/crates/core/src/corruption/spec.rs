use serde::{Deserialize, Serialize};

use super::CorruptionError;
use crate::sim::element::AppId;
use crate::sim::observe::{ColorCode, MarkShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorruptionKind {
    PopUps,
    Resolution,
    Marks,
    Subtitle,
    MultiApps,
    AccidentalTouch,
    AppMinimization,
    NetworkError,
    Verification,
}

impl CorruptionKind {
    /// All kinds in report column order.
    pub const ALL: [CorruptionKind; 9] = [
        CorruptionKind::PopUps,
        CorruptionKind::Resolution,
        CorruptionKind::Marks,
        CorruptionKind::Subtitle,
        CorruptionKind::MultiApps,
        CorruptionKind::AccidentalTouch,
        CorruptionKind::AppMinimization,
        CorruptionKind::NetworkError,
        CorruptionKind::Verification,
    ];

    pub fn id(self) -> &'static str {
        match self {
            CorruptionKind::PopUps => "pop-ups",
            CorruptionKind::Resolution => "resolution",
            CorruptionKind::Marks => "marks",
            CorruptionKind::Subtitle => "subtitle",
            CorruptionKind::MultiApps => "multi-apps",
            CorruptionKind::AccidentalTouch => "accidental-touch",
            CorruptionKind::AppMinimization => "app-minimization",
            CorruptionKind::NetworkError => "network-error",
            CorruptionKind::Verification => "verification",
        }
    }

    /// Config table name.
    pub fn table(self) -> &'static str {
        match self {
            CorruptionKind::PopUps => "pop_ups",
            CorruptionKind::Resolution => "resolution",
            CorruptionKind::Marks => "marks",
            CorruptionKind::Subtitle => "subtitle",
            CorruptionKind::MultiApps => "multi_apps",
            CorruptionKind::AccidentalTouch => "accidental_touch",
            CorruptionKind::AppMinimization => "app_minimization",
            CorruptionKind::NetworkError => "network_error",
            CorruptionKind::Verification => "verification",
        }
    }

    /// Report column header.
    pub fn title(self) -> &'static str {
        match self {
            CorruptionKind::PopUps => "Pop ups",
            CorruptionKind::Resolution => "Resolution",
            CorruptionKind::Marks => "Marks",
            CorruptionKind::Subtitle => "Subtitle",
            CorruptionKind::MultiApps => "Multi Apps",
            CorruptionKind::AccidentalTouch => "Accidental Touch",
            CorruptionKind::AppMinimization => "App Minimization",
            CorruptionKind::NetworkError => "Network Error",
            CorruptionKind::Verification => "Verification",
        }
    }

    pub fn parse(s: &str) -> Option<CorruptionKind> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL.into_iter().find(|k| k.id() == norm)
    }

    pub fn scope(self) -> Scope {
        match self {
            CorruptionKind::PopUps | CorruptionKind::Resolution | CorruptionKind::Marks | CorruptionKind::Subtitle => {
                Scope::Observation
            }
            CorruptionKind::MultiApps | CorruptionKind::NetworkError | CorruptionKind::Verification => Scope::State,
            CorruptionKind::AccidentalTouch | CorruptionKind::AppMinimization => Scope::Transition,
        }
    }

    /// Visual disruptors only change what the agent sees, except multi-apps
    /// which launches a real window at step 0.
    pub fn is_visual_disruptor(self) -> bool {
        matches!(
            self,
            CorruptionKind::PopUps
                | CorruptionKind::Resolution
                | CorruptionKind::Marks
                | CorruptionKind::Subtitle
                | CorruptionKind::MultiApps
        )
    }
}

impl std::fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    Observation,
    Transition,
    State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    Top,
    Bottom,
}

/// Maps a color name to the raster palette.
pub fn color_code(name: &str) -> ColorCode {
    match name.trim().to_ascii_lowercase().as_str() {
        "red" => ColorCode::MarkRed,
        "white" => ColorCode::SubtitleWhite,
        "black" => ColorCode::SubtitleEdgeBlack,
        _ => ColorCode::MarkOther,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PopUpParams {
    pub width: i32,
    pub height: i32,
    pub small_factor: i32,
    pub edge_thickness: i32,
    pub random_position: bool,
    pub attack_position: Placement,
    pub button_string: String,
    pub window_string: String,
    pub prefix_string: String,
    pub suffix_string: String,
    pub overlap: bool,
}

impl Default for PopUpParams {
    fn default() -> Self {
        Self {
            width: 960,
            height: 540,
            small_factor: 1,
            edge_thickness: 2,
            random_position: false,
            attack_position: Placement::Bottom,
            button_string: "OK".into(),
            window_string: "instruct click tgt".into(),
            prefix_string: "Install New Extenstion".into(),
            suffix_string: "to Continue".into(),
            overlap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolutionParams {
    pub scale: f64,
}

impl Default for ResolutionParams {
    fn default() -> Self {
        Self { scale: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkParams {
    pub number: i64,
    pub mark_size: i32,
    pub mark_type: MarkShape,
    pub color: String,
    pub overlap: bool,
}

impl Default for MarkParams {
    fn default() -> Self {
        Self {
            number: 50,
            mark_size: 20,
            mark_type: MarkShape::Star,
            color: "red".into(),
            overlap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubtitleParams {
    pub subtitle_text: String,
    pub position: Placement,
    pub font_size: i32,
    /// Kept for config compatibility; glyph metrics are fixed.
    pub font_path: String,
    pub edge_color: String,
    pub color: String,
    pub padding: i32,
}

impl Default for SubtitleParams {
    fn default() -> Self {
        Self {
            subtitle_text: "...Choose a Song to Play".into(),
            position: Placement::Bottom,
            font_size: 48,
            font_path: "DejaVuSansMono-Bold".into(),
            edge_color: "black".into(),
            color: "white".into(),
            padding: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultiAppsParams {
    #[serde(alias = "another app", with = "app_name")]
    pub another_app: AppId,
}

impl Default for MultiAppsParams {
    fn default() -> Self {
        Self {
            another_app: AppId::Vscode,
        }
    }
}

mod app_name {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::sim::element::AppId;

    pub fn serialize<S: Serializer>(app: &AppId, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(app.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<AppId, D::Error> {
        let name = String::deserialize(d)?;
        AppId::parse(&name).ok_or_else(|| serde::de::Error::custom(format!("unknown app '{name}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccidentalTouchParams {
    #[serde(rename = "w/o_app")]
    pub without_app: bool,
    pub step: i32,
}

impl Default for AccidentalTouchParams {
    fn default() -> Self {
        Self {
            without_app: true,
            step: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppMinimizationParams {
    pub step: i32,
}

impl Default for AppMinimizationParams {
    fn default() -> Self {
        Self { step: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkErrorParams {
    pub step: i32,
    /// Address of the host; the simulator models it as the abstract host match.
    pub local_ip: String,
}

impl Default for NetworkErrorParams {
    fn default() -> Self {
        Self {
            step: -1,
            local_ip: "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerificationParams {
    pub step: i32,
}

impl Default for VerificationParams {
    fn default() -> Self {
        Self { step: -1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum CorruptionParams {
    PopUps(PopUpParams),
    Resolution(ResolutionParams),
    Marks(MarkParams),
    Subtitle(SubtitleParams),
    MultiApps(MultiAppsParams),
    AccidentalTouch(AccidentalTouchParams),
    AppMinimization(AppMinimizationParams),
    NetworkError(NetworkErrorParams),
    Verification(VerificationParams),
}

impl CorruptionParams {
    pub fn kind(&self) -> CorruptionKind {
        match self {
            CorruptionParams::PopUps(_) => CorruptionKind::PopUps,
            CorruptionParams::Resolution(_) => CorruptionKind::Resolution,
            CorruptionParams::Marks(_) => CorruptionKind::Marks,
            CorruptionParams::Subtitle(_) => CorruptionKind::Subtitle,
            CorruptionParams::MultiApps(_) => CorruptionKind::MultiApps,
            CorruptionParams::AccidentalTouch(_) => CorruptionKind::AccidentalTouch,
            CorruptionParams::AppMinimization(_) => CorruptionKind::AppMinimization,
            CorruptionParams::NetworkError(_) => CorruptionKind::NetworkError,
            CorruptionParams::Verification(_) => CorruptionKind::Verification,
        }
    }

    pub fn default_for(kind: CorruptionKind) -> Self {
        match kind {
            CorruptionKind::PopUps => CorruptionParams::PopUps(Default::default()),
            CorruptionKind::Resolution => CorruptionParams::Resolution(Default::default()),
            CorruptionKind::Marks => CorruptionParams::Marks(Default::default()),
            CorruptionKind::Subtitle => CorruptionParams::Subtitle(Default::default()),
            CorruptionKind::MultiApps => CorruptionParams::MultiApps(Default::default()),
            CorruptionKind::AccidentalTouch => CorruptionParams::AccidentalTouch(Default::default()),
            CorruptionKind::AppMinimization => CorruptionParams::AppMinimization(Default::default()),
            CorruptionKind::NetworkError => CorruptionParams::NetworkError(Default::default()),
            CorruptionKind::Verification => CorruptionParams::Verification(Default::default()),
        }
    }

    fn schedule(&self) -> i32 {
        match self {
            CorruptionParams::AccidentalTouch(p) => p.step,
            CorruptionParams::AppMinimization(p) => p.step,
            CorruptionParams::NetworkError(p) => p.step,
            CorruptionParams::Verification(p) => p.step,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<(), CorruptionError> {
        let table = self.kind().table();
        let bad = |field: &str, message: &str| {
            Err(CorruptionError::Validation {
                field: format!("{table}.{field}"),
                message: message.to_string(),
            })
        };
        match self {
            CorruptionParams::PopUps(p) => {
                for (name, v) in [
                    ("width", p.width),
                    ("height", p.height),
                    ("small_factor", p.small_factor),
                    ("edge_thickness", p.edge_thickness),
                ] {
                    if v <= 0 {
                        return bad(name, "must be positive");
                    }
                }
            }
            CorruptionParams::Resolution(p) => {
                if !(p.scale > 0.0 && p.scale <= 1.0) {
                    return bad("scale", "must be in (0, 1]");
                }
            }
            CorruptionParams::Marks(p) => {
                if p.number < 0 {
                    return bad("number", "must be non-negative");
                }
                if p.mark_size < 1 {
                    return bad("mark_size", "must be at least 1");
                }
            }
            CorruptionParams::Subtitle(p) => {
                if p.font_size < 1 {
                    return bad("font_size", "must be at least 1");
                }
                if p.padding < 0 {
                    return bad("padding", "must be non-negative");
                }
                if p.subtitle_text.is_empty() {
                    return bad("subtitle_text", "must not be empty");
                }
            }
            CorruptionParams::MultiApps(_) => {}
            CorruptionParams::AccidentalTouch(AccidentalTouchParams { step, .. })
            | CorruptionParams::AppMinimization(AppMinimizationParams { step }) => {
                if *step < 1 {
                    return bad("step", "must be at least 1");
                }
            }
            CorruptionParams::NetworkError(NetworkErrorParams { step, .. })
            | CorruptionParams::Verification(VerificationParams { step }) => {
                if *step != -1 {
                    return bad("step", "environment errors apply before execution (step = -1)");
                }
            }
        }
        Ok(())
    }
}

/// One corruption operator with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub scope: Scope,
    /// Step at which the operator acts; -1 means before execution.
    pub schedule: i32,
    pub params: CorruptionParams,
}

impl CorruptionSpec {
    pub fn new(params: CorruptionParams) -> Result<Self, CorruptionError> {
        params.validate()?;
        let kind = params.kind();
        Ok(Self {
            kind,
            scope: kind.scope(),
            schedule: params.schedule(),
            params,
        })
    }

    pub fn default_for(kind: CorruptionKind) -> Self {
        Self::new(CorruptionParams::default_for(kind)).expect("defaults are valid")
    }
}

/// A named set of corruptions applied together to one episode. The clean
/// condition has no specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: String,
    pub specs: Vec<CorruptionSpec>,
}

impl Condition {
    pub fn clean() -> Self {
        Self {
            id: "clean".into(),
            specs: Vec::new(),
        }
    }

    pub fn single(spec: CorruptionSpec) -> Self {
        Self {
            id: spec.kind.id().to_string(),
            specs: vec![spec],
        }
    }

    pub fn named(id: impl Into<String>, specs: Vec<CorruptionSpec>) -> Self {
        Self { id: id.into(), specs }
    }

    pub fn is_clean(&self) -> bool {
        self.specs.is_empty()
    }

    /// The kind used for per-kind metrics: the first spec's kind.
    pub fn kind(&self) -> Option<CorruptionKind> {
        self.specs.first().map(|s| s.kind)
    }

    /// Clean plus one condition per kind at default parameters.
    pub fn default_grid() -> Vec<Condition> {
        std::iter::once(Condition::clean())
            .chain(
                CorruptionKind::ALL
                    .into_iter()
                    .map(|k| Condition::single(CorruptionSpec::default_for(k))),
            )
            .collect()
    }
}
