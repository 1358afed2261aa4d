use std::num::NonZeroU8;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::element::{AppId, ElementId, ElementKind};
use super::state::{lock_field_rect, EnvState, LOCK_FIELD_ID, LOCK_SCREEN_ID};
use crate::geom::Rect;
use crate::seed::sha256_hex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[repr(u8)]
pub enum ColorCode {
    #[default]
    Background,
    Window,
    Border,
    Text,
    Accent,
    MarkRed,
    MarkOther,
    SubtitleWhite,
    SubtitleEdgeBlack,
    Lock,
}

impl ColorCode {
    pub fn rgb(self) -> [u8; 3] {
        match self {
            ColorCode::Background => [46, 52, 64],
            ColorCode::Window => [236, 239, 244],
            ColorCode::Border => [76, 86, 106],
            ColorCode::Text => [20, 20, 20],
            ColorCode::Accent => [136, 192, 208],
            ColorCode::MarkRed => [220, 30, 30],
            ColorCode::MarkOther => [40, 200, 60],
            ColorCode::SubtitleWhite => [255, 255, 255],
            ColorCode::SubtitleEdgeBlack => [0, 0, 0],
            ColorCode::Lock => [25, 30, 40],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Cell {
    pub color: ColorCode,
    pub glyph: Option<NonZeroU8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelGrid {
    pub width: usize,
    pub height: usize,
    pub cells: Vec<Cell>,
}

impl PixelGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec![Cell::default(); width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[y * self.width + x]
    }

    pub fn set(&mut self, x: i32, y: i32, cell: Cell) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = y as usize * self.width + x as usize;
            self.cells[i] = cell;
        }
    }

    fn clip(&self, r: &Rect) -> Rect {
        r.clip_to(self.width as i32, self.height as i32)
    }

    pub fn fill(&mut self, r: &Rect, color: ColorCode) {
        let r = self.clip(r);
        for y in r.y..r.bottom() {
            let row = y as usize * self.width;
            for x in r.x..r.right() {
                self.cells[row + x as usize] = Cell { color, glyph: None };
            }
        }
    }

    /// Draws a border of `thickness` cells just inside `r`.
    pub fn border(&mut self, r: &Rect, thickness: i32, color: ColorCode) {
        let t = thickness.max(0);
        if t == 0 || r.is_empty() {
            return;
        }
        let tw = t.min(r.w);
        let th = t.min(r.h);
        self.fill(&Rect::new(r.x, r.y, r.w, th), color);
        self.fill(&Rect::new(r.x, r.bottom() - th, r.w, th), color);
        self.fill(&Rect::new(r.x, r.y, tw, r.h), color);
        self.fill(&Rect::new(r.right() - tw, r.y, tw, r.h), color);
    }

    /// Draws a monospace glyph run; each glyph occupies a box of
    /// `font_size / 2` by `font_size` cells. Drawing is clipped to `clip`.
    pub fn text(&mut self, x: i32, y: i32, text: &str, font_size: i32, color: ColorCode, clip: &Rect) {
        let gw = (font_size / 2).max(1);
        let clip = self.clip(clip);
        for (i, ch) in text.chars().enumerate() {
            let code = if ch.is_ascii() && ch != '\0' { ch as u8 } else { b'?' };
            let glyph = NonZeroU8::new(code);
            let gx = x + i as i32 * gw;
            if gx >= clip.right() {
                break;
            }
            let r = Rect::new(gx, y, gw, font_size).intersection(&clip);
            for yy in r.y..r.bottom() {
                for xx in r.x..r.right() {
                    self.set(xx, yy, Cell { color, glyph });
                }
            }
        }
    }

    pub fn count_differing(&self, other: &PixelGrid) -> usize {
        self.cells.iter().zip(&other.cells).filter(|(a, b)| a != b).count()
    }

    /// Nearest-neighbor resample: destination cell `i` reads source cell
    /// `floor(i * src / dst)`.
    pub fn resample(&self, width: usize, height: usize) -> PixelGrid {
        if width == self.width && height == self.height {
            return self.clone();
        }
        let mut out = PixelGrid::new(width, height);
        let xs: Vec<usize> = (0..width).map(|i| i * self.width / width).collect();
        for y in 0..height {
            let sy = y * self.height / height;
            let src = &self.cells[sy * self.width..(sy + 1) * self.width];
            let dst = &mut out.cells[y * width..(y + 1) * width];
            for (d, &sx) in dst.iter_mut().zip(&xs) {
                *d = src[sx];
            }
        }
        out
    }

    /// Binary PPM (P6) encoding.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.cells.len() * 3);
        for c in &self.cells {
            let rgb = if c.glyph.is_some() && c.color == ColorCode::Text {
                [10, 10, 10]
            } else {
                c.color.rgb()
            };
            out.extend_from_slice(&rgb);
        }
        out
    }

    pub fn digest(&self) -> String {
        let mut bytes = Vec::with_capacity(self.cells.len() * 2 + 16);
        bytes.extend_from_slice(&(self.width as u64).to_le_bytes());
        bytes.extend_from_slice(&(self.height as u64).to_le_bytes());
        for c in &self.cells {
            bytes.push(c.color as u8);
            bytes.push(c.glyph.map_or(0, NonZeroU8::get));
        }
        sha256_hex(&bytes)
    }
}

/// What an agent can read about one on-screen element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementView {
    pub id: ElementId,
    pub key: String,
    pub kind: ElementKind,
    pub bounds: Rect,
    pub label: String,
    pub text: String,
    pub interactable: bool,
    pub focused: bool,
    pub app: Option<AppId>,
    pub parent: Option<ElementId>,
    pub z: u32,
    pub font_size: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkShape {
    Star,
    Circle,
    Cross,
}

/// Pop-up overlay in full-resolution screen coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopUpOverlay {
    pub rect: Rect,
    pub attack_strip: Rect,
    pub ad_strip: Rect,
    pub attack_text: String,
    pub button_text: String,
    pub edge_thickness: i32,
    pub placement_box: Rect,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkOverlay {
    pub center: (i32, i32),
    pub size: i32,
    pub shape: MarkShape,
    pub color: ColorCode,
}

impl MarkOverlay {
    pub fn bounding_box(&self) -> Rect {
        let h = self.size / 2;
        Rect::new(self.center.0 - h, self.center.1 - h, self.size, self.size)
    }

    /// Coverage predicate relative to the mark center.
    pub fn covers(&self, dx: i32, dy: i32) -> bool {
        let r = self.size / 2;
        if dx.abs() > r || dy.abs() > r {
            return false;
        }
        let cross = (-1..=0).contains(&dx) || (-1..=0).contains(&dy);
        match self.shape {
            MarkShape::Circle => dx * dx + dy * dy <= r * r,
            MarkShape::Cross => cross,
            MarkShape::Star => cross || dx == dy || dx == -dy,
        }
    }

    /// Absolute cells covered by the mark.
    pub fn cells(&self) -> impl Iterator<Item = (i32, i32)> + '_ {
        let b = self.bounding_box();
        (b.y..b.bottom()).flat_map(move |y| {
            (b.x..b.right()).filter_map(move |x| {
                self.covers(x - self.center.0, y - self.center.1).then_some((x, y))
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtitleOverlay {
    pub x: i32,
    pub y: i32,
    pub text: String,
    pub font_size: i32,
    pub text_width: i32,
    pub color: ColorCode,
    pub edge_color: ColorCode,
    pub clipped: bool,
}

impl SubtitleOverlay {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.text_width, self.font_size)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "overlay", rename_all = "kebab-case")]
pub enum Overlay {
    PopUp(PopUpOverlay),
    Mark(MarkOverlay),
    Subtitle(SubtitleOverlay),
}

/// The agent-facing view of one step. Element geometry in `elements` is in
/// observation space (`width` × `height`); `scene` keeps full-resolution
/// geometry for rasterization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Observation {
    pub step: u32,
    pub screen_w: i32,
    pub screen_h: i32,
    pub width: i32,
    pub height: i32,
    pub scene: Vec<ElementView>,
    pub elements: Vec<ElementView>,
    pub overlays: Vec<Overlay>,
    /// Pop-up metadata in observation space, when a pop-up is showing.
    pub popup: Option<PopUpOverlay>,
    #[serde(skip)]
    raster: OnceLock<PixelGrid>,
}

impl PartialEq for Observation {
    fn eq(&self, other: &Self) -> bool {
        self.step == other.step
            && self.screen_w == other.screen_w
            && self.screen_h == other.screen_h
            && self.width == other.width
            && self.height == other.height
            && self.scene == other.scene
            && self.elements == other.elements
            && self.overlays == other.overlays
            && self.popup == other.popup
    }
}

/// Maps a full-resolution rectangle to observation space: left/top edges
/// round down and right/bottom edges round up.
pub fn scale_rect(r: &Rect, src_w: i32, src_h: i32, dst_w: i32, dst_h: i32) -> Rect {
    if src_w == dst_w && src_h == dst_h {
        return *r;
    }
    let fl = |v: i32, d: i32, s: i32| (i64::from(v) * i64::from(d)).div_euclid(i64::from(s)) as i32;
    let ce = |v: i32, d: i32, s: i32| {
        let n = i64::from(v) * i64::from(d);
        let s = i64::from(s);
        (n.div_euclid(s) + i64::from(n.rem_euclid(s) != 0)) as i32
    };
    let x0 = fl(r.x, dst_w, src_w);
    let y0 = fl(r.y, dst_h, src_h);
    let x1 = ce(r.right(), dst_w, src_w);
    let y1 = ce(r.bottom(), dst_h, src_h);
    Rect::new(x0, y0, x1 - x0, y1 - y0)
}

impl Observation {
    pub fn raster(&self) -> &PixelGrid {
        self.raster.get_or_init(|| self.rasterize())
    }

    pub fn is_scaled(&self) -> bool {
        self.width != self.screen_w || self.height != self.screen_h
    }

    pub fn element(&self, key: &str) -> Option<&ElementView> {
        self.elements.iter().find(|e| e.key == key)
    }

    pub fn has_kind(&self, kind: ElementKind) -> bool {
        self.elements.iter().any(|e| e.kind == kind)
    }

    /// Recomputes observation-space data after overlays or the output size
    /// changed. Must be called by anything that edits those fields.
    pub fn refresh(&mut self) {
        let (sw, sh, w, h) = (self.screen_w, self.screen_h, self.width, self.height);
        self.elements = self
            .scene
            .iter()
            .map(|v| ElementView {
                bounds: scale_rect(&v.bounds, sw, sh, w, h),
                ..v.clone()
            })
            .collect();
        self.popup = self.overlays.iter().find_map(|o| match o {
            Overlay::PopUp(p) => Some(PopUpOverlay {
                rect: scale_rect(&p.rect, sw, sh, w, h),
                attack_strip: scale_rect(&p.attack_strip, sw, sh, w, h),
                ad_strip: scale_rect(&p.ad_strip, sw, sh, w, h),
                placement_box: scale_rect(&p.placement_box, sw, sh, w, h),
                ..p.clone()
            }),
            _ => None,
        });
        self.raster = OnceLock::new();
    }

    pub fn subtitle_clipped(&self) -> bool {
        self.overlays
            .iter()
            .any(|o| matches!(o, Overlay::Subtitle(s) if s.clipped))
    }

    /// Digest over element and overlay metadata only; cheap enough to take
    /// every step.
    pub fn meta_digest(&self) -> String {
        sha256_hex(&serde_json::to_vec(self).expect("observation serializes"))
    }

    /// Digest over metadata and raster.
    pub fn digest(&self) -> String {
        let meta = serde_json::to_vec(self).expect("observation serializes");
        sha256_hex(format!("{}{}", sha256_hex(&meta), self.raster().digest()).as_bytes())
    }

    fn rasterize(&self) -> PixelGrid {
        let mut g = PixelGrid::new(self.screen_w as usize, self.screen_h as usize);
        for v in &self.scene {
            draw_element(&mut g, v);
        }
        for o in &self.overlays {
            draw_overlay(&mut g, o);
        }
        g.resample(self.width as usize, self.height as usize)
    }
}

fn draw_element(g: &mut PixelGrid, v: &ElementView) {
    let b = v.bounds;
    let pad = 4;
    let text_y = b.y + ((b.h - v.font_size) / 2).max(0);
    match v.kind {
        ElementKind::Window | ElementKind::Menu | ElementKind::Banner | ElementKind::PopUp => {
            g.fill(&b, ColorCode::Window);
            g.border(&b, 2, ColorCode::Border);
            let title_y = b.y + pad;
            g.text(b.x + pad, title_y, &v.label, v.font_size, ColorCode::Text, &b);
        }
        ElementKind::LockScreen => {
            g.fill(&b, ColorCode::Lock);
            g.text(b.x + b.w / 2 - 120, b.y + b.h / 3, &v.label, v.font_size, ColorCode::Text, &b);
        }
        ElementKind::Button | ElementKind::Icon | ElementKind::AppLauncher => {
            g.fill(&b, ColorCode::Accent);
            g.border(&b, 2, ColorCode::Border);
            g.text(b.x + pad, text_y, &v.label, v.font_size, ColorCode::Text, &b);
        }
        ElementKind::TextField => {
            g.fill(&b, ColorCode::Window);
            g.border(&b, 2, ColorCode::Border);
            let shown = if v.text.is_empty() { &v.label } else { &v.text };
            g.text(b.x + pad, text_y, shown, v.font_size, ColorCode::Text, &b);
        }
        ElementKind::Label => {
            g.text(b.x, text_y, &v.label, v.font_size, ColorCode::Text, &b);
        }
    }
}

fn draw_overlay(g: &mut PixelGrid, o: &Overlay) {
    match o {
        Overlay::PopUp(p) => {
            for (strip, text) in [(&p.attack_strip, &p.attack_text), (&p.ad_strip, &p.button_text)] {
                g.fill(strip, ColorCode::Window);
                g.border(strip, p.edge_thickness, ColorCode::Border);
                let fs = (strip.h - 2 * p.edge_thickness).clamp(1, 16);
                let inner = Rect::new(
                    strip.x + p.edge_thickness,
                    strip.y + p.edge_thickness,
                    strip.w - 2 * p.edge_thickness,
                    strip.h - 2 * p.edge_thickness,
                );
                g.text(inner.x + 2, inner.y + (inner.h - fs) / 2, text, fs, ColorCode::Text, &inner);
            }
        }
        Overlay::Mark(m) => {
            for (x, y) in m.cells() {
                g.set(x, y, Cell { color: m.color, glyph: None });
            }
        }
        Overlay::Subtitle(s) => {
            let r = s.rect();
            g.fill(
                &Rect::new(r.x - 1, r.y - 1, r.w + 2, r.h + 2),
                s.edge_color,
            );
            let full = Rect::new(0, 0, g.width as i32, g.height as i32);
            g.text(s.x, s.y, &s.text, s.font_size, s.color, &full);
        }
    }
}

/// Renders the clean observation of a state.
pub fn render(state: &EnvState) -> Observation {
    let vis = state.visibility();
    let mut scene = Vec::new();
    for (i, e) in state.elements.iter().enumerate() {
        if !vis[i] {
            continue;
        }
        let focused = match e.kind {
            ElementKind::Window => state.focused_window == Some(e.id),
            ElementKind::TextField => state.field_has_keyboard(e.id),
            _ => false,
        };
        scene.push(ElementView {
            id: e.id,
            key: e.key.clone(),
            kind: e.kind,
            bounds: e.bounds,
            label: e.label.clone(),
            text: e.text.clone(),
            interactable: e.interactable,
            focused,
            app: e.app,
            parent: e.parent,
            z: scene.len() as u32,
            font_size: e.font_size,
        });
    }
    if state.locked {
        let full = Rect::new(0, 0, state.screen_w, state.screen_h);
        scene.push(ElementView {
            id: LOCK_SCREEN_ID,
            key: "lock.screen".into(),
            kind: ElementKind::LockScreen,
            bounds: full,
            label: "Locked".into(),
            text: String::new(),
            interactable: false,
            focused: false,
            app: None,
            parent: None,
            z: scene.len() as u32,
            font_size: 32,
        });
        scene.push(ElementView {
            id: LOCK_FIELD_ID,
            key: "lock.password".into(),
            kind: ElementKind::TextField,
            bounds: lock_field_rect(state.screen_w, state.screen_h),
            label: "Password".into(),
            text: "*".repeat(state.lock_input.chars().count()),
            interactable: true,
            focused: true,
            app: None,
            parent: Some(LOCK_SCREEN_ID),
            z: scene.len() as u32,
            font_size: 24,
        });
    }
    let mut obs = Observation {
        step: state.step,
        screen_w: state.screen_w,
        screen_h: state.screen_h,
        width: state.screen_w,
        height: state.screen_h,
        scene,
        elements: Vec::new(),
        overlays: Vec::new(),
        popup: None,
        raster: OnceLock::new(),
    };
    obs.refresh();
    obs
}
