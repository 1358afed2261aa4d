//! End-to-end acceptance checks. Runs every criterion in sequence (timings
//! are single-threaded) and prints one `[PASS]`/`[FAIL]` line per criterion.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use deskbench::agent::ScriptedAgent;
use deskbench::corruption::ops::{layout_subtitle, place_marks, place_pop_up, scaled_size};
use deskbench::corruption::{
    find_largest_non_overlapping_box, parse_config, Condition, CorruptedEnv, CorruptionKind, CorruptionParams,
    CorruptionSpec, MarkParams, Placement, PopUpParams, ResolutionParams, SubtitleParams,
};
use deskbench::dagrpo::{
    dagrpo_objective, held_out_conditions, held_out_seeds, normalize_advantages, objective_gradient, prior_policy,
    rollout_group, success_rate, ClipConfig, Context, LinearSoftmaxPolicy, Member, PriorConfig, RolloutGroup,
    TokenSample, TrainConfig, Trainer,
};
use deskbench::eval::{corruption_robustness, run_suite, BenchmarkSuite, MetricsTable};
use deskbench::sim::observe::MarkShape;
use deskbench::sim::state::{Action, ExternalEvent, ScrollDirection};
use deskbench::sim::{render, TaskSuite};
use deskbench::{Rect, TokenPolicy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(took)
}

// 1. largest empty box vs exhaustive search

/// Every axis-aligned rectangle is tested against a 2-D prefix sum.
fn exhaustive_largest(blocked: &[Vec<bool>], w: usize, h: usize) -> i64 {
    let mut pre = vec![vec![0i32; w + 1]; h + 1];
    for y in 0..h {
        for x in 0..w {
            pre[y + 1][x + 1] = pre[y][x + 1] + pre[y + 1][x] - pre[y][x] + i32::from(blocked[y][x]);
        }
    }
    let mut best = 0i64;
    for y0 in 0..h {
        for x0 in 0..w {
            for y1 in y0 + 1..=h {
                for x1 in x0 + 1..=w {
                    let area = ((y1 - y0) * (x1 - x0)) as i64;
                    if area <= best {
                        continue;
                    }
                    let filled = pre[y1][x1] - pre[y0][x1] - pre[y1][x0] + pre[y0][x0];
                    if filled == 0 {
                        best = area;
                    }
                }
            }
        }
    }
    best
}

fn criterion_largest_box() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..500 {
        let w = rng.random_range(1..=64usize);
        let h = rng.random_range(1..=64usize);
        let mut blocked = vec![vec![false; w]; h];
        let mut occupied = Vec::new();
        if trial % 2 == 0 {
            let density = rng.random::<f64>() * 0.3;
            for (y, row) in blocked.iter_mut().enumerate() {
                for (x, b) in row.iter_mut().enumerate() {
                    if rng.random::<f64>() < density {
                        *b = true;
                        occupied.push(Rect::new(x as i32, y as i32, 1, 1));
                    }
                }
            }
        } else {
            for _ in 0..rng.random_range(0..12) {
                let r = Rect::new(
                    rng.random_range(-4..w as i32),
                    rng.random_range(-4..h as i32),
                    rng.random_range(1..=w as i32 / 2 + 4),
                    rng.random_range(1..=h as i32 / 2 + 4),
                );
                for y in r.y.max(0)..r.bottom().min(h as i32) {
                    for x in r.x.max(0)..r.right().min(w as i32) {
                        blocked[y as usize][x as usize] = true;
                    }
                }
                occupied.push(r);
            }
        }
        let got = find_largest_non_overlapping_box(&occupied, w as i32, h as i32);
        let want = exhaustive_largest(&blocked, w, h);
        ensure!(got.area() == want, "grid {trial} ({w}x{h}): area {} vs exhaustive {want}", got.area());
        ensure!(
            Rect::new(0, 0, w as i32, h as i32).contains_rect(&got) || got.is_empty(),
            "grid {trial}: {got:?} leaves the screen"
        );
        for y in got.y..got.bottom() {
            for x in got.x..got.right() {
                ensure!(!blocked[y as usize][x as usize], "grid {trial}: {got:?} covers occupied cell ({x}, {y})");
            }
        }
        ensure!((want == 0) == got.is_empty(), "grid {trial}: emptiness mismatch");
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("500 grids up to 64x64 in {took:.2?}"))
}

// 2. config defaults

fn criterion_config_defaults() -> Outcome {
    let golden: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(include_str!("../../core/tests/golden/defaults.json")).map_err(|e| e.to_string())?;
    let doc: String = CorruptionKind::ALL.iter().map(|k| format!("[{}]\n", k.table())).collect();
    let specs = parse_config(&doc).map_err(|e| e.to_string())?;
    ensure!(specs.len() == golden.len(), "{} kinds parsed, golden has {}", specs.len(), golden.len());
    let mut fields = 0;
    for spec in &specs {
        let want = golden[spec.kind.table()].as_object().ok_or("golden entry is not an object")?;
        let got = serde_json::to_value(&spec.params).map_err(|e| e.to_string())?;
        let got = got["params"].as_object().ok_or("params do not serialize to an object")?;
        ensure!(got.len() == want.len(), "{}: {} fields vs {}", spec.kind, got.len(), want.len());
        for (field, value) in want {
            ensure!(got.get(field) == Some(value), "{}.{field}: {:?} vs {value}", spec.kind, got.get(field));
            fields += 1;
        }
    }
    Ok(format!("{} kinds, {fields} fields match", specs.len()))
}

// 3. geometry

fn criterion_geometry() -> Outcome {
    let suite = TaskSuite::builtin();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let screen = Rect::new(0, 0, 1920, 1080);
    let mut popups = 0;
    let mut marks_checked = 0;
    for (t, task) in suite.tasks.iter().enumerate() {
        let obs = render(&deskbench::sim::init_task(task, t as u64));
        let occupied: Vec<Rect> = obs.scene.iter().filter(|v| v.interactable).map(|v| v.bounds).collect();
        for overlap in [true, false] {
            for attack_position in [Placement::Bottom, Placement::Top] {
                for small_factor in [1, 2, 7, 20] {
                    let params = PopUpParams {
                        overlap,
                        attack_position,
                        small_factor,
                        ..Default::default()
                    };
                    let p = place_pop_up(&occupied, 1920, 1080, &params, &mut rng);
                    let (a, b) = (p.attack_strip, p.ad_strip);
                    ensure!(a.intersection(&b).area() == 0, "strips overlap: {a:?} {b:?}");
                    ensure!(a.area() + b.area() == p.rect.area(), "strip areas do not sum to {:?}", p.rect);
                    ensure!(p.rect.contains_rect(&a) && p.rect.contains_rect(&b), "strip outside {:?}", p.rect);
                    ensure!(p.placement_box.contains_rect(&p.rect), "{:?} outside {:?}", p.rect, p.placement_box);
                    ensure!(screen.contains_rect(&p.placement_box), "placement box off screen");
                    popups += 1;
                }
            }
        }
        for mark_type in [MarkShape::Star, MarkShape::Circle, MarkShape::Cross] {
            let params = MarkParams {
                overlap: false,
                mark_type,
                ..Default::default()
            };
            for m in place_marks(&occupied, 1920, 1080, &params, &mut rng) {
                let bb = m.bounding_box();
                ensure!(screen.contains_rect(&bb), "mark {bb:?} leaves the screen");
                ensure!(!occupied.iter().any(|r| r.intersects(&bb)), "mark {bb:?} covers an interactable");
                marks_checked += 1;
            }
        }
    }
    let mut subtitles = 0;
    for len in 0..=120 {
        for font_size in [8, 15, 16, 31, 32, 48] {
            for width in [1920, 1919, 1440, 961] {
                let params = SubtitleParams {
                    subtitle_text: "s".repeat(len),
                    font_size,
                    ..Default::default()
                };
                let s = layout_subtitle(width, 1080, &params);
                if !s.clipped {
                    let offset = (f64::from(s.x) + f64::from(s.text_width) / 2.0 - f64::from(width) / 2.0).abs();
                    ensure!(offset <= 0.5, "subtitle len {len} font {font_size} width {width}: offset {offset}");
                    subtitles += 1;
                }
            }
        }
    }
    let task = &suite.tasks[0];
    for (scale, want) in [(0.75, (1440, 810)), (0.5, (960, 540)), (0.25, (480, 270))] {
        ensure!(scaled_size(1920, 1080, scale) == want, "scale {scale}: {:?}", scaled_size(1920, 1080, scale));
        let spec = CorruptionSpec::new(CorruptionParams::Resolution(ResolutionParams { scale })).map_err(|e| e.to_string())?;
        let obs = CorruptedEnv::new(task, &Condition::single(spec), 0).observe();
        let raster = obs.raster();
        ensure!((obs.width, obs.height) == want, "scale {scale}: observation is {}x{}", obs.width, obs.height);
        ensure!((raster.width as i32, raster.height as i32) == want, "scale {scale}: raster size");
    }
    Ok(format!("{popups} pop-ups, {marks_checked} marks, {subtitles} subtitles, 3 resolutions"))
}

// 4. observation-only corruptions leave the state alone

fn fixed_actions() -> Vec<Action> {
    vec![
        Action::Click { x: 200, y: 300 },
        Action::Click { x: 960, y: 540 },
        Action::type_text("hello"),
        Action::hotkey(&["enter"]),
        Action::Click { x: 1500, y: 800 },
        Action::LeftDouble { x: 100, y: 100 },
        Action::Scroll {
            x: 500,
            y: 500,
            direction: ScrollDirection::Down,
        },
        Action::hotkey(&["ctrl", "a"]),
        Action::Click { x: 40, y: 1060 },
        Action::Wait,
    ]
}

fn state_trajectory(task: &deskbench::sim::Task, condition: &Condition, seed: u64) -> Vec<(String, Vec<ExternalEvent>)> {
    let mut env = CorruptedEnv::new(task, condition, seed);
    env.state.max_steps = 20;
    env.observe();
    let mut out = vec![(env.state.digest(), Vec::new())];
    for a in fixed_actions() {
        match env.step(&a) {
            Ok(o) => out.push((env.state.digest(), o.events)),
            Err(e) => out.push((format!("error: {e}"), Vec::new())),
        }
    }
    out
}

fn criterion_scope_discipline() -> Outcome {
    let suite = TaskSuite::builtin();
    let kinds: Vec<CorruptionKind> = CorruptionKind::ALL
        .into_iter()
        .filter(|k| k.is_visual_disruptor() && *k != CorruptionKind::MultiApps)
        .collect();
    let mut compared = 0;
    for task in &suite.tasks {
        for seed in 0..3 {
            let clean = state_trajectory(task, &Condition::clean(), seed);
            for &k in &kinds {
                let corrupted = state_trajectory(task, &Condition::single(CorruptionSpec::default_for(k)), seed);
                ensure!(corrupted == clean, "{k} changes the state trajectory of {} (seed {seed})", task.id);
                compared += 1;
            }
        }
    }
    Ok(format!("{compared} trajectories over {kinds:?} identical to clean"))
}

// 5. event schedules

fn criterion_schedule() -> Outcome {
    let suite = TaskSuite::builtin();
    let mut episodes = 0;
    for kind in [CorruptionKind::AccidentalTouch, CorruptionKind::AppMinimization] {
        for step in [3, 6, 12] {
            let params = match CorruptionSpec::default_for(kind).params {
                CorruptionParams::AccidentalTouch(mut p) => {
                    p.step = step;
                    CorruptionParams::AccidentalTouch(p)
                }
                CorruptionParams::AppMinimization(mut p) => {
                    p.step = step;
                    CorruptionParams::AppMinimization(p)
                }
                other => return Err(format!("unexpected params {other:?}")),
            };
            let condition = Condition::single(CorruptionSpec::new(params).map_err(|e| e.to_string())?);
            for seed in 0..100u64 {
                let task = &suite.tasks[seed as usize % suite.tasks.len()];
                let mut env = CorruptedEnv::new(task, &condition, seed);
                env.state.max_steps = 16;
                let mut fired = Vec::new();
                for k in 1..=15u32 {
                    let o = env.step(&Action::Wait).map_err(|e| e.to_string())?;
                    fired.extend(o.events.into_iter().map(|e| (k, e)));
                }
                ensure!(fired.len() == 1, "{kind} step {step} seed {seed}: {} events", fired.len());
                let (k, ev) = &fired[0];
                ensure!(*k == step as u32 && ev.step() == step as u32, "{kind} step {step} seed {seed}: fired at {k}");
                let right_kind = matches!(
                    (kind, ev),
                    (CorruptionKind::AccidentalTouch, ExternalEvent::AccidentalTouch { .. })
                        | (CorruptionKind::AppMinimization, ExternalEvent::AppMinimization { .. })
                );
                ensure!(right_kind, "{kind}: fired {ev:?}");
                episodes += 1;
            }
        }
    }
    Ok(format!("{episodes} episodes, one event each at its step"))
}

// 6. objective math

fn random_policy(rng: &mut ChaCha8Rng, vocab: usize, rows: usize, pointers: usize) -> LinearSoftmaxPolicy<f64> {
    let mut p = LinearSoftmaxPolicy::<f64>::zeros(vocab, rows, pointers);
    for w in &mut p.weights {
        *w = rng.random_range(-1.0..1.0);
    }
    p
}

fn random_samples(rng: &mut ChaCha8Rng, vocab: usize, rows: usize, pointers: usize, n: usize) -> Vec<TokenSample> {
    (0..n)
        .map(|_| {
            let mut ctx = Context::rows(vec![rng.random_range(0..rows as u32), rng.random_range(0..rows as u32)]);
            if rng.random::<bool>() {
                ctx.pointers.push((rng.random_range(0..pointers as u32), rng.random_range(0..vocab as u16)));
            }
            TokenSample {
                context: ctx,
                token: rng.random_range(0..vocab as u16),
            }
        })
        .collect()
}

fn ratios_near_bounds(new: &TokenPolicy, old: &TokenPolicy, members: &[Vec<TokenSample>], clip: &ClipConfig) -> bool {
    members.iter().flatten().any(|s| {
        let r = (new.log_prob(&s.context, s.token) - old.log_prob(&s.context, s.token)).exp();
        (r - clip.lower::<f64>()).abs() < 1e-3 || (r - clip.upper::<f64>()).abs() < 1e-3
    })
}

fn criterion_objective_math() -> Outcome {
    let start = Instant::now();
    let clip = ClipConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);

    let mut worst_mean = 0.0f64;
    for _ in 0..1000 {
        let g = rng.random_range(2..=16);
        let rewards: Vec<f64> = if rng.random::<bool>() {
            (0..g).map(|_| f64::from(rng.random_range(-1..=1))).collect()
        } else {
            (0..g).map(|_| rng.random_range(-5.0..5.0)).collect()
        };
        let a = normalize_advantages(&rewards);
        let mean = a.values.iter().sum::<f64>() / g as f64;
        worst_mean = worst_mean.max(mean.abs());
        ensure!(mean.abs() < 1e-9, "advantage mean {mean} for {rewards:?}");
    }

    ensure!(clip.lower::<f64>() == 0.8 && clip.upper::<f64>() == 1.3, "clip bounds");
    for r in [0.0, 0.5, 0.79, 0.8, 1.0, 1.3, 1.31, 4.0] {
        let c: f64 = clip.clip(r);
        let want = if r < 0.8 { 0.8 } else if r > 1.3 { 1.3 } else { r };
        ensure!(c == want, "clip({r}) = {c}");
    }

    let (vocab, rows, pointers, tokens, group) = (12, 4, 2, 3, 4);
    let h = 1e-5;
    let mut trials = 0;
    let mut worst_rel = 0.0f64;
    while trials < 200 {
        let old = random_policy(&mut rng, vocab, rows, pointers);
        let mut new = old.clone();
        for w in &mut new.weights {
            *w += rng.random_range(-0.3..0.3);
        }
        let members: Vec<Vec<TokenSample>> =
            (0..group).map(|_| random_samples(&mut rng, vocab, rows, pointers, tokens)).collect();
        if ratios_near_bounds(&new, &old, &members, &clip) {
            continue;
        }
        let slices: Vec<&[TokenSample]> = members.iter().map(Vec::as_slice).collect();
        let rewards: Vec<f64> = (0..group).map(|_| rng.random::<f64>()).collect();
        let adv = normalize_advantages(&rewards).values;

        let identity = dagrpo_objective(&old, &old, &slices, &adv, &clip).value;
        let mean_adv = adv.iter().sum::<f64>() / adv.len() as f64;
        ensure!(identity == mean_adv, "objective at identity {identity} vs mean advantage {mean_adv}");

        let (_, grad) = objective_gradient(&new, &old, &slices, &adv, &clip);
        let mut num = vec![0.0; grad.len()];
        for (k, n) in num.iter_mut().enumerate() {
            let mut plus = new.clone();
            plus.weights[k] += h;
            let mut minus = new.clone();
            minus.weights[k] -= h;
            let fp = dagrpo_objective(&plus, &old, &slices, &adv, &clip).value;
            let fm = dagrpo_objective(&minus, &old, &slices, &adv, &clip).value;
            *n = (fp - fm) / (2.0 * h);
        }
        let diff = grad.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = grad.iter().map(|a| a * a).sum::<f64>().sqrt().max(num.iter().map(|a| a * a).sum::<f64>().sqrt());
        let rel = if scale < 1e-12 { diff } else { diff / scale };
        worst_rel = worst_rel.max(rel);
        ensure!(rel < 1e-5, "trial {trials}: gradient relative error {rel:.3e}");
        trials += 1;
    }
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "max |mean adv| {worst_mean:.1e}, clip exact, {trials} gradient trials max rel err {worst_rel:.1e}, {took:.2?}"
    ))
}

// 7. replay guarantee

fn prior_success(task: &deskbench::sim::Task) -> Result<Member, String> {
    let prior: TokenPolicy = prior_policy(&PriorConfig::default());
    let episode = TrainConfig::toy().episode();
    (0..50)
        .flat_map(|s| rollout_group(&prior, task, &[Condition::clean()], 4, s, &episode).members)
        .find(Member::is_success)
        .ok_or_else(|| format!("no clean success for {}", task.id))
}

fn criterion_replay() -> Outcome {
    let suite = TaskSuite::builtin();
    let tasks = &suite.tasks[..1];
    let config = TrainConfig {
        epochs: 1,
        tasks_per_epoch: 50,
        batch_size: 1,
        pool: vec!["resolution".into()],
        ..TrainConfig::toy()
    };
    let mut trainer = Trainer::<f64>::new(config, tasks, 7).map_err(|e| e.to_string())?;
    let seeded = prior_success(&tasks[0])?;
    ensure!(trainer.buffer_mut().insert(&tasks[0].id, &seeded), "buffer refused the success");
    let mut iterations = 0;
    let mut injected = 0;
    while let Some(it) = trainer.step().map_err(|e| e.to_string())? {
        for g in &it.groups {
            ensure!(g.has_success(), "iteration {iterations}: batch for {} has no success", g.task_id);
        }
        injected += it.replaced.len();
        iterations += 1;
    }
    ensure!(iterations == 50, "{iterations} iterations");
    Ok(format!("50 iterations all with a success, {injected} filled from replay"))
}

// 8. clean pool reduces to plain GRPO

/// Group-relative clipped objective on recorded rollouts: population-std
/// advantages, per-member token mean, mean over members, mean over groups.
fn reference_grpo(new: &TokenPolicy, old: &TokenPolicy, groups: &[RolloutGroup], eps: (f64, f64)) -> f64 {
    let nb = groups.len() as f64;
    let mut total = 0.0;
    for g in groups {
        let rewards = g.rewards();
        let n = rewards.len() as f64;
        let mean = rewards.iter().sum::<f64>() / n;
        let std = (rewards.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n).sqrt();
        let mut group_total = 0.0;
        for (m, r) in g.members.iter().zip(&rewards) {
            let a = (r - mean) / (std + 1e-8);
            let mut s = 0.0;
            for t in &m.tokens {
                let ratio = (new.log_prob(&t.context, t.token) - old.log_prob(&t.context, t.token)).exp();
                let clipped = ratio.max(1.0 - eps.0).min(1.0 + eps.1);
                // min(ratio * a, clipped * a) with a factored out
                s += if a >= 0.0 { ratio.min(clipped) } else { ratio.max(clipped) };
            }
            group_total += a * (s / m.tokens.len() as f64);
        }
        total += group_total / n / nb;
    }
    total
}

fn criterion_grpo_degeneration() -> Outcome {
    let suite = TaskSuite::builtin();
    let config = TrainConfig {
        epochs: 1,
        tasks_per_epoch: 12,
        batch_size: 2,
        ..TrainConfig::toy().clean_only()
    };
    let clip = config.clip;
    let eps = (clip.eps_low, clip.eps_high);
    let mut trainer = Trainer::<f64>::new(config, &suite.tasks, 8).map_err(|e| e.to_string())?;
    let prior = trainer.policy().clone();
    let mut batches = Vec::new();
    let mut compared = 0;
    loop {
        let before = trainer.policy().clone();
        let Some(it) = trainer.step().map_err(|e| e.to_string())? else {
            break;
        };
        for g in &it.groups {
            ensure!(g.members.iter().all(|m| !m.tokens.is_empty()), "empty rollout in {}", g.task_id);
        }
        let want = reference_grpo(&before, &before, &it.groups, eps);
        ensure!(
            it.point.objective.to_bits() == want.to_bits(),
            "iteration {}: trainer objective {} vs reference {want}",
            it.point.iteration,
            it.point.objective
        );
        compared += 1;
        batches.push(it.groups);
    }
    let trained = trainer.policy().clone();
    ensure!(trained != prior, "training did not move the policy");
    for (b, groups) in batches.iter().enumerate() {
        for (new, old) in [(&trained, &prior), (&prior, &trained)] {
            let want = reference_grpo(new, old, groups, eps);
            let nb = groups.len() as f64;
            let mut got = 0.0;
            for g in groups {
                let adv = normalize_advantages(&g.rewards()).values;
                got += dagrpo_objective(new, old, &g.token_slices(), &adv, &clip).value / nb;
            }
            ensure!(got.to_bits() == want.to_bits(), "batch {b}: objective {got} vs reference {want}");
            compared += 1;
        }
    }
    Ok(format!("{compared} objective values bit-identical"))
}

// 9. scripted agents on the full grid

fn grid_metrics(agent: fn() -> ScriptedAgent, id: &str) -> Result<(MetricsTable, Duration), String> {
    let suite = BenchmarkSuite::new(TaskSuite::builtin().tasks, Condition::default_grid(), 3, 0).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let record = run_suite(&suite, id, || Ok(agent()), |_| {});
    let took = start.elapsed();
    ensure!(record.cells.len() == 600, "{} cells", record.cells.len());
    Ok((corruption_robustness(&record, id), took))
}

fn criterion_scripted_agents() -> Outcome {
    let (naive, naive_time) = grid_metrics(ScriptedAgent::naive, "scripted_naive")?;
    let (oracle, oracle_time) = grid_metrics(ScriptedAgent::oracle, "scripted_oracle")?;
    let rate = |m: &MetricsTable, k: Option<CorruptionKind>| match k {
        None => m.clean.map(|r| r.rate),
        Some(k) => m.kind(k).map(|r| r.rate),
    };
    let clean = rate(&naive, None).ok_or("naive has no clean cells")?;
    let mut drops = Vec::new();
    for k in [CorruptionKind::Resolution, CorruptionKind::PopUps, CorruptionKind::Verification] {
        let r = rate(&naive, Some(k)).ok_or("missing column")?;
        ensure!(r < clean, "naive {k} {r} does not drop below clean {clean}");
        drops.push(format!("{k} {:.0}%", r * 100.0));
    }
    ensure!(rate(&oracle, None) == Some(1.0), "oracle clean {:?}", rate(&oracle, None));
    let v = rate(&oracle, Some(CorruptionKind::Verification));
    ensure!(v == Some(1.0), "oracle verification {v:?}");
    let limit = Duration::from_secs(60);
    ensure!(naive_time < limit && oracle_time < limit, "grid took {naive_time:.2?} / {oracle_time:.2?}");
    Ok(format!(
        "naive clean {:.0}% vs {}; oracle clean and verification 100%; grids {naive_time:.2?} / {oracle_time:.2?}",
        clean * 100.0,
        drops.join(", ")
    ))
}

// 10. corrupted-pool training vs clean-pool training

/// P(X >= wins) for X ~ Binomial(trials, 1/2).
fn sign_test_p(wins: u32, trials: u32) -> f64 {
    let mut c = 1.0f64;
    let mut tail = 0.0;
    for i in 0..=trials {
        if i >= wins {
            tail += c;
        }
        c = c * f64::from(trials - i) / f64::from(i + 1);
    }
    tail / 2f64.powi(trials as i32)
}

fn criterion_training_benefit() -> Outcome {
    let start = Instant::now();
    let suite = TaskSuite::builtin();
    let config = TrainConfig::toy();
    let episode = config.episode();
    let held_out = held_out_conditions();
    let seeds = held_out_seeds(999, 2);
    let mut da = Vec::new();
    let mut clean = Vec::new();
    for seed in 0..10u64 {
        for (cfg, out) in [(config.clone(), &mut da), (config.clone().clean_only(), &mut clean)] {
            let trained = Trainer::<f64>::new(cfg, &suite.tasks, seed)
                .and_then(Trainer::run)
                .map_err(|e| e.to_string())?;
            out.push(success_rate(&trained.checkpoint.policy, &suite.tasks, &held_out, &seeds, &episode));
        }
    }
    let wins = da.iter().zip(&clean).filter(|(d, c)| d > c).count() as u32;
    let losses = da.iter().zip(&clean).filter(|(d, c)| d < c).count() as u32;
    let p = sign_test_p(wins, wins + losses);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (md, mc) = (mean(&da), mean(&clean));
    ensure!(md >= mc, "mean held-out success {md:.3} below clean-pool {mc:.3}");
    ensure!(p < 0.1, "sign test p = {p:.3} ({wins} wins, {losses} losses)");
    let took = within(Duration::from_secs(15 * 60), start)?;
    Ok(format!("held-out corrupted success {md:.3} vs {mc:.3}, {wins}/{} wins, p = {p:.4}, {took:.1?}", wins + losses))
}

// 11. determinism of the run command

fn run_cli(out: &Path, store: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_deskbench"))
        .args(["run", "--agent", "naive", "--seed", "11", "--repeats", "2", "--out"])
        .arg(out)
        .arg("--store")
        .arg(store)
        .env_remove("DESKBENCH_STORE")
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(status.status.success(), "run failed: {}", String::from_utf8_lossy(&status.stderr));
    Ok(())
}

fn dir_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| e.to_string())? {
            let path = entry.map_err(|e| e.to_string())?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).map_err(|e| e.to_string())?.display().to_string();
                out.push((rel, std::fs::read(&path).map_err(|e| e.to_string())?));
            }
        }
    }
    out.sort();
    Ok(out)
}

fn criterion_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut snapshots = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run).join("out");
        let store = tmp.path().join(run).join("store");
        run_cli(&out, &store)?;
        snapshots.push((dir_bytes(&out)?, dir_bytes(&store)?));
    }
    let (a, b) = (&snapshots[0], &snapshots[1]);
    ensure!(a.0.len() == 3, "expected 3 report files, found {}", a.0.len());
    ensure!(a.1.len() == 1, "expected 1 store entry, found {}", a.1.len());
    for (x, y) in a.0.iter().chain(&a.1).zip(b.0.iter().chain(&b.1)) {
        ensure!(x == y, "{} differs between runs", x.0);
    }
    Ok(format!("{} report files and {} store entry byte-identical", a.0.len(), a.1.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("1 largest empty box matches exhaustive search", criterion_largest_box),
        ("2 empty config blocks reproduce the defaults", criterion_config_defaults),
        ("3 overlay and resolution geometry", criterion_geometry),
        ("4 observation corruptions leave state untouched", criterion_scope_discipline),
        ("5 scheduled events fire once at their step", criterion_schedule),
        ("6 objective, advantage and gradient math", criterion_objective_math),
        ("7 replay keeps a success in every batch", criterion_replay),
        ("8 clean pool reduces to plain GRPO", criterion_grpo_degeneration),
        ("9 scripted agents on the full grid", criterion_scripted_agents),
        ("10 corrupted-pool training beats clean-pool", criterion_training_benefit),
        ("11 repeated runs are byte-identical", criterion_determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(why) => {
                println!("[FAIL] {name}: {why}");
                failed.push(name);
            }
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
