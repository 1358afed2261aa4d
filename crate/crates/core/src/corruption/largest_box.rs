use crate::geom::Rect;

/// Largest axis-aligned rectangle inside `width` × `height` that intersects
/// none of `occupied`.
///
/// Coordinates are compressed to the edges of the occupied rectangles, each
/// compressed row is scanned with a monotone stack over weighted column
/// widths. Among maximum-area rectangles the one with the smallest `y`, then
/// smallest `x`, then largest `w` wins. A fully occupied screen yields the
/// zero rectangle.
pub fn find_largest_non_overlapping_box(occupied: &[Rect], width: i32, height: i32) -> Rect {
    if width <= 0 || height <= 0 {
        return Rect::default();
    }
    let clipped: Vec<Rect> = occupied
        .iter()
        .map(|r| r.clip_to(width, height))
        .filter(|r| !r.is_empty())
        .collect();
    let mut xs = vec![0, width];
    let mut ys = vec![0, height];
    for r in &clipped {
        xs.extend([r.x, r.right()]);
        ys.extend([r.y, r.bottom()]);
    }
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;
    let mut blocked = vec![false; nx * ny];
    for r in &clipped {
        let x0 = xs.binary_search(&r.x).expect("edge present");
        let x1 = xs.binary_search(&r.right()).expect("edge present");
        let y0 = ys.binary_search(&r.y).expect("edge present");
        let y1 = ys.binary_search(&r.bottom()).expect("edge present");
        for row in y0..y1 {
            blocked[row * nx + x0..row * nx + x1].fill(true);
        }
    }

    // best key: (area, -y, -x, w) maximized
    let mut best: Option<(i64, i32, i32, i32, i32)> = None;
    let mut consider = |x: i32, y: i32, w: i32, h: i32| {
        if w <= 0 || h <= 0 {
            return;
        }
        let area = i64::from(w) * i64::from(h);
        let better = match best {
            None => true,
            Some((ba, by, bx, bw, _)) => (area, -y, -x, w) > (ba, -by, -bx, bw),
        };
        if better {
            best = Some((area, y, x, w, h));
        }
    };

    // heights[j]: pixel height of the free run ending at the current row
    // top[j]: compressed row index where that run starts
    let mut heights = vec![0i32; nx];
    let mut stack: Vec<usize> = Vec::with_capacity(nx + 1);
    for row in 0..ny {
        let rh = ys[row + 1] - ys[row];
        for j in 0..nx {
            heights[j] = if blocked[row * nx + j] { 0 } else { heights[j] + rh };
        }
        let bottom = ys[row + 1];
        stack.clear();
        for j in 0..=nx {
            let h = if j < nx { heights[j] } else { 0 };
            while let Some(&top) = stack.last() {
                if heights[top] < h {
                    break;
                }
                stack.pop();
                let ht = heights[top];
                let left = stack.last().map_or(0, |&s| s + 1);
                // equal heights are merged into the widest span by the later pop
                if ht > 0 && !(j < nx && heights[j] == ht) {
                    let x = xs[left];
                    consider(x, bottom - ht, xs[j] - x, ht);
                }
            }
            stack.push(j);
        }
    }
    best.map_or(Rect::default(), |(_, y, x, w, h)| Rect::new(x, y, w, h))
}
