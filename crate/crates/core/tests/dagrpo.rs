use deskbench::agent::vocab::FormatError;
use deskbench::corruption::Condition;
use deskbench::dagrpo::{
    compute_reward, dagrpo_objective, inject_replay, normalize_advantages, objective_gradient, prior_policy,
    rollout_group, ClipConfig, Context, LinearSoftmaxPolicy, Member, PriorConfig, ReplayBuffer, RolloutGroup,
    TokenSample, TrainConfig, TrainError, Trainer,
};
use deskbench::sim::TaskSuite;
use deskbench::{PolicyCheckpoint, TokenPolicy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn clean_group(seed: u64) -> RolloutGroup {
    let suite = TaskSuite::builtin();
    let prior: TokenPolicy = prior_policy(&PriorConfig::default());
    let cfg = TrainConfig::toy();
    rollout_group(&prior, &suite.tasks[0], &[Condition::clean()], 4, seed, &cfg.episode())
}

fn success_member() -> Member {
    (0..20)
        .flat_map(|s| clean_group(s).members)
        .find(Member::is_success)
        .expect("the prior succeeds on a clean task")
}

fn failed(m: &Member) -> Member {
    let mut f = m.clone();
    f.record.score = 0.0;
    f
}

#[test]
fn reward_components() {
    let ok = success_member();
    assert_eq!(compute_reward(&ok.record).total(), 1);
    let mut malformed = ok.record.clone();
    malformed.steps[0].format_error = Some(FormatError {
        index: 0,
        reason: "expected Thought".into(),
    });
    assert_eq!(compute_reward(&malformed).total(), 0);
    malformed.score = 0.0;
    assert_eq!(compute_reward(&malformed).total(), -1);
    let mut partial = ok.record.clone();
    partial.score = 0.99;
    assert_eq!(compute_reward(&partial).success, 0);
}

#[test]
fn replay_injection_cases() {
    let ok = success_member();
    let bad = failed(&ok);
    let task = ok.record.task_id.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let mut empty = ReplayBuffer::new(8);
    let mut groups = vec![RolloutGroup {
        task_id: task.clone(),
        members: vec![bad.clone(); 4],
    }];
    assert!(inject_replay(&mut groups, &mut empty, &mut rng).is_empty());
    assert!(!groups[0].has_success());

    let mut buffer = ReplayBuffer::new(8);
    assert!(buffer.insert(&task, &ok));
    assert!(!buffer.insert(&task, &bad));
    let replaced = inject_replay(&mut groups, &mut buffer, &mut rng);
    assert_eq!(replaced.len(), 1);
    assert_eq!(groups[0].members.iter().filter(|m| m.replayed).count(), 1);
    assert!(groups[0].has_success());

    let mut mixed = vec![RolloutGroup {
        task_id: task.clone(),
        members: vec![ok.clone(), bad.clone(), bad.clone(), bad],
    }];
    let before = mixed.clone();
    assert!(inject_replay(&mut mixed, &mut buffer, &mut rng).is_empty());
    assert_eq!(mixed, before);
}

#[test]
fn replay_buffer_is_fifo_per_task() {
    let ok = success_member();
    let mut buffer = ReplayBuffer::new(2);
    for seed in 0..3u64 {
        let mut m = ok.clone();
        m.record.seed = seed;
        buffer.insert("t", &m);
    }
    let seeds: Vec<u64> = buffer.get("t").unwrap().iter().map(|m| m.record.seed).collect();
    assert_eq!(seeds, [1, 2]);
    assert!(buffer.get(&ok.record.task_id).is_none());
}

fn two_token_policies(log_ratio_weight: f64) -> (LinearSoftmaxPolicy<f64>, LinearSoftmaxPolicy<f64>) {
    let old = LinearSoftmaxPolicy::<f64>::zeros(2, 1, 0);
    let mut new = old.clone();
    *new.weight_mut(0, 0) = log_ratio_weight;
    (new, old)
}

#[test]
fn clipped_objective_examples() {
    let sample = vec![TokenSample {
        context: Context::rows(vec![0]),
        token: 0,
    }];
    let members: Vec<&[TokenSample]> = vec![&sample];
    let clip = ClipConfig::default();
    // old p = 1/2; new p = 3/4 gives ratio 1.5, new p = 1/4 gives 0.5
    let (new, old) = two_token_policies(3f64.ln());
    assert_eq!(dagrpo_objective(&new, &old, &members, &[1.0], &clip).value, 1.3);
    let (new, old) = two_token_policies(-(3f64.ln()));
    assert_eq!(dagrpo_objective(&new, &old, &members, &[-1.0], &clip).value, -0.8);
    let v = dagrpo_objective(&new, &old, &members, &[1.0], &clip);
    assert!((v.value - 0.5).abs() < 1e-12);
    assert_eq!(v.clipped_fraction, 0.0);
}

#[test]
fn zero_advantages_give_zero_gradient() {
    let g = clean_group(1);
    let prior: TokenPolicy = prior_policy(&PriorConfig::default());
    let (v, grad) = objective_gradient(&prior, &prior, &g.token_slices(), &[0.0; 4], &ClipConfig::default());
    assert_eq!(v.value, 0.0);
    assert!(grad.iter().all(|&x| x == 0.0));
}

#[test]
fn identity_objective_is_mean_advantage() {
    let g = clean_group(2);
    let mut rewards = g.rewards();
    rewards[0] = 1.0;
    rewards[1] = -1.0;
    let adv = normalize_advantages(&rewards).values;
    let prior: TokenPolicy = prior_policy(&PriorConfig::default());
    let v = dagrpo_objective(&prior, &prior, &g.token_slices(), &adv, &ClipConfig::default());
    assert_eq!(v.value, adv.iter().sum::<f64>() / adv.len() as f64);
}

fn small_config() -> TrainConfig {
    TrainConfig {
        epochs: 1,
        tasks_per_epoch: 6,
        ..TrainConfig::toy()
    }
}

#[test]
fn zero_epochs_leave_the_prior_unchanged() {
    let suite = TaskSuite::builtin();
    let cfg = TrainConfig {
        epochs: 0,
        ..TrainConfig::toy()
    };
    let out = Trainer::<f64>::new(cfg.clone(), &suite.tasks, 5).unwrap().run().unwrap();
    assert!(out.curve.is_empty());
    let mut prior: TokenPolicy = prior_policy(&cfg.prior);
    prior.temperature = cfg.temperature;
    assert_eq!(out.checkpoint.policy, prior);
}

#[test]
fn pools_share_the_initial_snapshot() {
    let suite = TaskSuite::builtin();
    let da = Trainer::<f64>::new(small_config(), &suite.tasks, 5).unwrap();
    let clean = Trainer::<f64>::new(small_config().clean_only(), &suite.tasks, 5).unwrap();
    assert_eq!(da.policy(), clean.policy());
}

#[test]
fn training_is_deterministic_and_checkpoints_round_trip() {
    let suite = TaskSuite::builtin();
    let run = || Trainer::<f64>::new(small_config(), &suite.tasks, 11).unwrap().run().unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.checkpoint, b.checkpoint);
    let strip = |c: &[deskbench::dagrpo::CurvePoint]| {
        c.iter()
            .map(|p| (p.iteration, p.mean_reward.to_bits(), p.objective.to_bits(), p.buffer_size))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a.curve), strip(&b.curve));
    assert_eq!(a.curve.len(), 6);

    let text = a.checkpoint.to_json();
    assert_eq!(PolicyCheckpoint::from_json(&text).unwrap(), a.checkpoint);
    let tampered = text.replacen("\"group_size\":4", "\"group_size\":5", 1);
    assert_ne!(tampered, text);
    assert!(matches!(PolicyCheckpoint::from_json(&tampered), Err(TrainError::Checkpoint(_))));
}

#[test]
fn config_validation() {
    assert!(TrainConfig::from_toml("epochs = 3\n[clip]\neps_high = 0.25\n").is_ok());
    for bad in [
        "[clip]\nkl_coefficient = 0.1\n",
        "group_size = 0\n",
        "pool = [\"clean\", \"earthquake\"]\n",
        "learning_rate = -1.0\n",
        "epoch = 3\n",
    ] {
        assert!(TrainConfig::from_toml(bad).is_err(), "{bad}");
    }
}

#[test]
fn f32_policy_matches_f64_objective() {
    let g = clean_group(4);
    let adv = normalize_advantages(&[1.0, 0.0, 0.0, 0.0]).values;
    let p64: TokenPolicy = prior_policy(&PriorConfig::default());
    let p32 = p64.cast::<f32>();
    let v64 = dagrpo_objective(&p64, &p64, &g.token_slices(), &adv, &ClipConfig::default()).value;
    let adv32: Vec<f32> = adv.iter().map(|&a| a as f32).collect();
    let v32 = dagrpo_objective(&p32, &p32, &g.token_slices(), &adv32, &ClipConfig::default()).value;
    assert!((f64::from(v32) - v64).abs() < 1e-6);
}
