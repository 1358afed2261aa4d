use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle in pixel units. `x`/`y` is the top-left corner;
/// the right and bottom edges are exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl Rect {
    pub const fn new(x: i32, y: i32, w: i32, h: i32) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> i32 {
        self.x + self.w
    }

    pub fn bottom(&self) -> i32 {
        self.y + self.h
    }

    pub fn area(&self) -> i64 {
        i64::from(self.w.max(0)) * i64::from(self.h.max(0))
    }

    pub fn is_empty(&self) -> bool {
        self.w <= 0 || self.h <= 0
    }

    pub fn contains(&self, px: i32, py: i32) -> bool {
        px >= self.x && px < self.right() && py >= self.y && py < self.bottom()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// True when the interiors overlap (touching edges do not count).
    pub fn intersects(&self, other: &Rect) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }

    pub fn intersection(&self, other: &Rect) -> Rect {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        if x1 <= x0 || y1 <= y0 {
            Rect::default()
        } else {
            Rect::new(x0, y0, x1 - x0, y1 - y0)
        }
    }

    pub fn clip_to(&self, width: i32, height: i32) -> Rect {
        self.intersection(&Rect::new(0, 0, width, height))
    }

    /// Integer center, rounded towards the top-left.
    pub fn center(&self) -> (i32, i32) {
        (self.x + self.w / 2, self.y + self.h / 2)
    }

    pub fn translate(&self, dx: i32, dy: i32) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }
}

impl std::fmt::Display for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x, self.y, self.w, self.h)
    }
}

/// Returns true when `target` is completely covered by the union of `covers`.
pub fn covered_by_union(target: &Rect, covers: &[Rect]) -> bool {
    uncovered_point(target, covers).is_none()
}

/// Finds a point of `target` that lies outside every rectangle in `covers`,
/// preferring the target's center. Works on the compressed coordinate grid
/// spanned by all edges, so it is exact for integer rectangles.
pub fn uncovered_point(target: &Rect, covers: &[Rect]) -> Option<(i32, i32)> {
    if target.is_empty() {
        return None;
    }
    let relevant: Vec<Rect> = covers
        .iter()
        .map(|c| c.intersection(target))
        .filter(|c| !c.is_empty())
        .collect();
    let (cx, cy) = target.center();
    if !relevant.iter().any(|c| c.contains(cx, cy)) {
        return Some((cx, cy));
    }
    let mut xs = vec![target.x, target.right()];
    let mut ys = vec![target.y, target.bottom()];
    for c in &relevant {
        xs.extend([c.x, c.right()]);
        ys.extend([c.y, c.bottom()]);
    }
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut best: Option<((i64, i32, i32), (i32, i32))> = None;
    for wy in ys.windows(2) {
        for wx in xs.windows(2) {
            let px = wx[0];
            let py = wy[0];
            if relevant.iter().any(|c| c.contains(px, py)) {
                continue;
            }
            // pick the free cell point closest to the center
            let qx = cx.clamp(wx[0], wx[1] - 1);
            let qy = cy.clamp(wy[0], wy[1] - 1);
            let d = i64::from(qx - cx).pow(2) + i64::from(qy - cy).pow(2);
            let key = (d, qy, qx);
            if best.is_none_or(|(k, _)| key < k) {
                best = Some((key, (qx, qy)));
            }
        }
    }
    best.map(|(_, p)| p)
}
