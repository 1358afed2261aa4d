use deskbench::agent::vocab::{encode, parse_response, x_center, y_center, ParsedAction, KEYS, X_BINS, Y_BINS};
use deskbench::corruption::find_largest_non_overlapping_box;
use deskbench::dagrpo::normalize_advantages;
use deskbench::eval::cell_seed;
use deskbench::sim::state::{Action, ScrollDirection};
use deskbench::Rect;
use proptest::prelude::*;

/// Best empty-rectangle area by checking every row band.
fn brute_area(occupied: &[Rect], w: i32, h: i32) -> i64 {
    let mut blocked = vec![vec![false; w as usize]; h as usize];
    for r in occupied {
        for y in r.y.max(0)..r.bottom().min(h) {
            for x in r.x.max(0)..r.right().min(w) {
                blocked[y as usize][x as usize] = true;
            }
        }
    }
    let mut best = 0i64;
    for top in 0..h as usize {
        let mut col_free = vec![true; w as usize];
        for bottom in top..h as usize {
            for x in 0..w as usize {
                col_free[x] &= !blocked[bottom][x];
            }
            let mut run = 0i64;
            for &f in &col_free {
                run = if f { run + 1 } else { 0 };
                best = best.max(run * (bottom - top + 1) as i64);
            }
        }
    }
    best
}

fn rects(max: i32) -> impl Strategy<Value = Vec<Rect>> {
    prop::collection::vec((0..max, 0..max, 1..max / 2 + 1, 1..max / 2 + 1), 0..8)
        .prop_map(|v| v.into_iter().map(|(x, y, w, h)| Rect::new(x, y, w, h)).collect())
}

fn action() -> impl Strategy<Value = Action> {
    let xb = 0..X_BINS as u8;
    let yb = 0..Y_BINS as u8;
    let pt = (xb.clone(), yb.clone()).prop_map(|(a, b)| (x_center(a), y_center(b)));
    prop_oneof![
        pt.clone().prop_map(|(x, y)| Action::Click { x, y }),
        pt.clone().prop_map(|(x, y)| Action::LeftDouble { x, y }),
        pt.clone().prop_map(|(x, y)| Action::RightSingle { x, y }),
        (pt.clone(), pt.clone()).prop_map(|((x1, y1), (x2, y2))| Action::Drag { x1, y1, x2, y2 }),
        prop::collection::vec(0..KEYS.len(), 1..=4)
            .prop_map(|ks| Action::Hotkey { keys: ks.into_iter().map(|k| KEYS[k].to_string()).collect() }),
        "[ -~]{1,30}".prop_map(|text| Action::Type { text }),
        (pt, any::<bool>()).prop_map(|((x, y), up)| Action::Scroll {
            x,
            y,
            direction: if up { ScrollDirection::Up } else { ScrollDirection::Down },
        }),
        Just(Action::Wait),
        Just(Action::Done),
        Just(Action::Fail),
    ]
}

proptest! {
    #[test]
    fn largest_box_matches_brute_force(occ in rects(24), w in 1..24i32, h in 1..24i32) {
        let b = find_largest_non_overlapping_box(&occ, w, h);
        prop_assert_eq!(b.area(), brute_area(&occ, w, h));
        if b.area() > 0 {
            prop_assert!(b.x >= 0 && b.y >= 0 && b.right() <= w && b.bottom() <= h);
            prop_assert!(occ.iter().all(|r| !r.intersects(&b)));
        }
    }

    #[test]
    fn encode_parse_round_trip(action in action(), words in prop::collection::vec(0..3usize, 0..3)) {
        let thought = words.iter().map(|&i| ["click", "the", "target"][i]).collect::<Vec<_>>().join(" ");
        let parsed = ParsedAction { action, thought };
        let back = parse_response(&encode(&parsed).unwrap()).unwrap();
        prop_assert_eq!(back, parsed);
    }

    #[test]
    fn advantages_are_centered_and_scaled(rewards in prop::collection::vec(-1i32..=1, 2..12)) {
        let r: Vec<f64> = rewards.iter().map(|&v| f64::from(v)).collect();
        let a = normalize_advantages(&r);
        let n = r.len() as f64;
        let mean = a.values.iter().sum::<f64>() / n;
        prop_assert!(mean.abs() < 1e-9);
        if a.std > 1e-6 {
            let sd = (a.values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
            prop_assert!((sd - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn cell_seed_ignores_grid_shape(base in any::<u64>(), t in "[a-z-]{1,12}", c in "[a-z-]{1,12}", rep in 0u32..4) {
        prop_assert_eq!(cell_seed(base, &t, &c, rep), cell_seed(base, &t, &c, rep));
        prop_assert_ne!(cell_seed(base, &t, &c, rep), cell_seed(base, &t, &c, rep + 1));
    }
}
