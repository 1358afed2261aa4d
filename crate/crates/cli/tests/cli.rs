use std::path::Path;
use std::process::{Command, Output};

fn deskbench(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deskbench"))
        .args(args)
        .current_dir(dir)
        .env_remove("DESKBENCH_STORE")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn run_writes_reports_and_guards_the_store() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = ["run", "--agent", "oracle", "--store", "store", "--out", "out", "--format", "csv"];
    let first = deskbench(&args, d);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    assert!(stdout(&first).starts_with("agent,label,row,clean,"));
    for f in ["report.json", "report.csv", "report.md"] {
        assert!(d.join("out").join(f).is_file(), "{f}");
    }

    assert_eq!(code(&deskbench(&args, d)), 2);
    let mut again = args.to_vec();
    again.push("--overwrite");
    assert_eq!(code(&deskbench(&again, d)), 0);

    let report = deskbench(&["report", "--store", "store", "--format", "json"], d);
    assert_eq!(code(&report), 0);
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&report)).unwrap();
    assert_eq!(parsed["tables"].as_array().unwrap().len(), 1);
    assert_eq!(code(&deskbench(&["report", "--store", "store", "--key", "missing"], d)), 2);
}

#[test]
fn invalid_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&deskbench(&["run", "--agent", "bogus"], d)), 2);
    assert_eq!(code(&deskbench(&["run", "--suite", "no-such-manifest.toml"], d)), 3);

    std::fs::write(d.join("bad.toml"), "[pop_ups]\nsmall_factor = -1\n").unwrap();
    assert_eq!(code(&deskbench(&["run", "--corruptions", "bad.toml"], d)), 2);

    std::fs::write(d.join("kl.toml"), "[clip]\nkl_coefficient = 0.1\n").unwrap();
    assert_eq!(code(&deskbench(&["train", "--config", "kl.toml", "--out", "ck.json"], d)), 2);
    assert!(!d.join("ck.json").exists());
}

#[test]
fn dead_external_agent_records_protocol_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = deskbench(
        &["run", "--agent", "external:false", "--timeout", "2", "--format", "json", "--trajectories", "t.jsonl"],
        d,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(parsed["tables"][0]["overall"]["successes"].as_f64(), Some(0.0));
    let lines = std::fs::read_to_string(d.join("t.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 200);
    for line in lines.lines() {
        let t: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(t["protocol_error"].is_string(), "{line}");
    }
}

#[test]
fn train_then_evaluate_the_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("small.toml"), "epochs = 1\ntasks_per_epoch = 4\n").unwrap();
    let train = deskbench(
        &["train", "--config", "small.toml", "--seed", "3", "--out", "ck.json", "--curve", "curve.csv"],
        d,
    );
    assert_eq!(code(&train), 0, "{}", String::from_utf8_lossy(&train.stderr));
    let curve = std::fs::read_to_string(d.join("curve.csv")).unwrap();
    assert_eq!(curve.lines().count(), 5);
    assert!(curve.starts_with("iteration,epoch,mean_reward,objective,"));

    let run = deskbench(&["run", "--agent", "policy:ck.json", "--format", "json"], d);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&run)).unwrap();
    assert_eq!(parsed["tables"][0]["agent"], "token_policy");

    std::fs::write(d.join("ck.json"), "{}").unwrap();
    assert_eq!(code(&deskbench(&["run", "--agent", "policy:ck.json"], d)), 2);
}

#[test]
fn sweep_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let sweep = deskbench(&["sweep", "--kind", "intensity", "--agent", "naive", "--format", "csv"], d);
    assert_eq!(code(&sweep), 0, "{}", String::from_utf8_lossy(&sweep.stderr));
    let labels: Vec<String> = stdout(&sweep)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    assert_eq!(labels, ["intensity-1", "intensity-2", "intensity-3"]);

    std::fs::write(d.join("popup.toml"), "[pop_ups]\n").unwrap();
    let task = "browser-default-search";
    let render = deskbench(
        &["render", "--task", task, "--corruptions", "popup.toml", "--steps", "0..3", "--out", "frames"],
        d,
    );
    assert_eq!(code(&render), 0, "{}", String::from_utf8_lossy(&render.stderr));
    let frame = std::fs::read(d.join("frames").join(format!("{task}-step00.ppm"))).unwrap();
    assert!(frame.starts_with(b"P6\n1920 1080\n255\n"));
    assert_eq!(std::fs::read_dir(d.join("frames")).unwrap().count(), 3);
    assert_eq!(code(&deskbench(&["render", "--task", "nope", "--out", "frames"], d)), 2);
}
