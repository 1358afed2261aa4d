use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use deskbench::agent::protocol::{ExternalAgent, DEFAULT_TIMEOUT};
use deskbench::agent::{AgentPolicy, ScriptedAgent, StepContext};
use deskbench::corruption::{parse_config, Condition, CorruptedEnv, CorruptionSpec};
use deskbench::dagrpo::{curve_csv, Checkpoint, Decoding, TokenAgent, TrainConfig, Trainer};
use deskbench::eval::{
    conditions_from_specs, corruption_robustness, emit_report, run_suite, run_sweep, BenchmarkSuite, Report,
    ReportFormat, RunStore, SweepKind, STORE_ENV,
};
use deskbench::sim::TaskSuite;
use deskbench::TokenPolicy;

/// Validation failures exit with status 2; everything else exits with 3.
#[derive(Debug)]
struct Invalid(String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

fn invalid(e: impl std::fmt::Display) -> anyhow::Error {
    Invalid(e.to_string()).into()
}

#[derive(Parser)]
#[command(name = "deskbench", version, about = "Corruption-robustness benchmark for desktop agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an agent over every task × condition cell and report the rates.
    Run(RunArgs),
    /// Train a token policy with corrupted-environment rollouts.
    Train(TrainArgs),
    /// Run one ablation sweep (intensity, content or location).
    Sweep(SweepArgs),
    /// Write corrupted observations of a task as PPM images.
    Render(RenderArgs),
    /// Print reports for runs in the store.
    Report(ReportArgs),
}

#[derive(Args)]
struct SuiteArgs {
    /// `builtin` or a path to a task manifest.
    #[arg(long, default_value = "builtin")]
    suite: String,
    /// `oracle`, `naive`, `policy:<checkpoint>` or `external:<command line>`.
    #[arg(long, default_value = "oracle")]
    agent: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    /// Seconds to wait for each external agent reply.
    #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs())]
    timeout: u64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    suite: SuiteArgs,
    /// Corruption config; every spec in it becomes one condition next to
    /// clean. Defaults to one condition per kind at default parameters.
    #[arg(long)]
    corruptions: Option<PathBuf>,
    /// Directory for report.{json,csv,md}.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, env = STORE_ENV)]
    store: Option<PathBuf>,
    /// Replace an existing stored run with the same key.
    #[arg(long)]
    overwrite: bool,
    /// Write every trajectory as one JSON line to this file.
    #[arg(long)]
    trajectories: Option<PathBuf>,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
}

#[derive(Args)]
struct TrainArgs {
    /// TOML training config; omitted keys take the preset's values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from `toy` (sized for the built-in suite) or `default`.
    #[arg(long, default_value = "toy")]
    preset: String,
    #[arg(long, default_value = "builtin")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    /// Training curve CSV output path.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    suite: SuiteArgs,
    #[arg(long)]
    kind: SweepKind,
    /// Corruption config supplying the parameters the sweep does not vary.
    #[arg(long)]
    base: Option<PathBuf>,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    task: String,
    #[arg(long, default_value = "builtin")]
    suite: String,
    /// Corruption config applied together; clean when omitted.
    #[arg(long)]
    corruptions: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Steps to capture, `start..end` (end exclusive) or a single step.
    #[arg(long, default_value = "0..1")]
    steps: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, env = STORE_ENV)]
    store: PathBuf,
    /// Stored run keys; all runs when omitted.
    #[arg(long = "key")]
    keys: Vec<String>,
    /// Key of a run to compute deltas against.
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long, default_value = "markdown")]
    format: ReportFormat,
}

fn load_suite(spec: &str) -> Result<TaskSuite> {
    if spec == "builtin" {
        return Ok(TaskSuite::builtin());
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading task manifest {spec}"))?;
    TaskSuite::from_manifest(&text).map_err(invalid)
}

fn load_specs(path: Option<&Path>) -> Result<Option<Vec<CorruptionSpec>>> {
    let Some(path) = path else {
        return Ok(None);
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading corruption config {}", path.display()))?;
    let specs = parse_config(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    Ok(Some(specs))
}

enum AgentSpec {
    Oracle,
    Naive,
    Policy(Box<TokenPolicy>),
    External(Vec<String>),
}

impl AgentSpec {
    fn parse(s: &str) -> Result<Self> {
        match s {
            "oracle" => return Ok(Self::Oracle),
            "naive" => return Ok(Self::Naive),
            _ => {}
        }
        if let Some(path) = s.strip_prefix("policy:") {
            let text = fs::read_to_string(path).with_context(|| format!("reading checkpoint {path}"))?;
            let ck = Checkpoint::<f64>::from_json(&text).map_err(invalid)?;
            return Ok(Self::Policy(Box::new(ck.policy)));
        }
        if let Some(cmd) = s.strip_prefix("external:") {
            let words: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if words.is_empty() {
                bail!(invalid("external agent needs a command"));
            }
            return Ok(Self::External(words));
        }
        Err(invalid(format!("unknown agent `{s}` (oracle, naive, policy:<path>, external:<command>)")))
    }

    fn id(&self) -> String {
        match self {
            Self::Oracle => ScriptedAgent::oracle().id(),
            Self::Naive => ScriptedAgent::naive().id(),
            Self::Policy(_) => "token_policy".into(),
            Self::External(w) => format!("external:{}", w.join(" ")),
        }
    }

    fn make(&self, timeout: Duration) -> Result<Box<dyn AgentPolicy + '_>, deskbench::agent::AgentError> {
        Ok(match self {
            Self::Oracle => Box::new(ScriptedAgent::oracle()),
            Self::Naive => Box::new(ScriptedAgent::naive()),
            Self::Policy(p) => Box::new(TokenAgent::new(p.as_ref(), Decoding::Greedy, 0)),
            Self::External(w) => Box::new(ExternalAgent::spawn(&w[0], &w[1..], timeout)?),
        })
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let tasks = load_suite(&args.suite.suite)?;
    let conditions = match load_specs(args.corruptions.as_deref())? {
        Some(specs) => conditions_from_specs(&specs),
        None => Condition::default_grid(),
    };
    let suite = BenchmarkSuite::new(tasks.tasks, conditions, args.suite.repeats, args.suite.seed).map_err(invalid)?;
    let agent = AgentSpec::parse(&args.suite.agent)?;
    let timeout = Duration::from_secs(args.suite.timeout);
    let mut lines = String::new();
    let record = run_suite(
        &suite,
        &agent.id(),
        || agent.make(timeout),
        |t| {
            if args.trajectories.is_some() {
                lines.push_str(&serde_json::to_string(t).expect("trajectory serializes"));
                lines.push('\n');
            }
        },
    );
    if record.cells.iter().all(|c| c.error.is_some()) {
        let first = record.cells.first().and_then(|c| c.error.clone()).unwrap_or_default();
        bail!("every cell failed to start the agent: {first}");
    }
    if let Some(path) = &args.trajectories {
        write_file(path, &lines)?;
    }
    if let Some(root) = &args.store {
        let path = RunStore::new(root).save(&record, args.overwrite)?;
        log::info!("stored run {} at {}", record.key(), path.display());
        eprintln!("run key {}", record.key());
    }
    let report = Report::new(vec![corruption_robustness(&record, &record.agent)]);
    if let Some(dir) = &args.out {
        for (name, format) in [
            ("report.json", ReportFormat::Json),
            ("report.csv", ReportFormat::Csv),
            ("report.md", ReportFormat::Markdown),
        ] {
            write_file(&dir.join(name), emit_report(&report, format))?;
        }
    }
    print!("{}", emit_report(&report, args.format));
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let base = match args.preset.as_str() {
        "toy" => TrainConfig::toy(),
        "default" => TrainConfig::default(),
        other => bail!(invalid(format!("unknown preset `{other}` (toy, default)"))),
    };
    let config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let mut merged = toml::Table::try_from(&base).expect("config serializes to a table");
            let overrides: toml::Table = toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            merge(&mut merged, overrides);
            TrainConfig::from_toml(&toml::to_string(&merged).expect("merged config serializes")).map_err(invalid)?
        }
        None => base,
    };
    config.validate().map_err(invalid)?;
    let suite = load_suite(&args.suite)?;
    let trainer = Trainer::<f64>::new(config, &suite.tasks, args.seed).map_err(invalid)?;
    let outcome = trainer.run()?;
    write_file(&args.out, outcome.checkpoint.to_json())?;
    if let Some(path) = &args.curve {
        write_file(path, curve_csv(&outcome.curve))?;
    }
    let last = outcome.curve.last();
    eprintln!(
        "trained {} iterations; final mean reward {:.3}",
        outcome.curve.len(),
        last.map_or(0.0, |p| p.mean_reward)
    );
    Ok(())
}

fn merge(into: &mut toml::Table, from: toml::Table) {
    for (k, v) in from {
        match (into.get_mut(&k), v) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            (_, v) => {
                into.insert(k, v);
            }
        }
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let tasks = load_suite(&args.suite.suite)?;
    let base = load_specs(args.base.as_deref())?.unwrap_or_default();
    let template =
        BenchmarkSuite::new(tasks.tasks, vec![Condition::clean()], args.suite.repeats, args.suite.seed).map_err(invalid)?;
    let agent = AgentSpec::parse(&args.suite.agent)?;
    let timeout = Duration::from_secs(args.suite.timeout);
    let tables = run_sweep(args.kind, &base, &template, &agent.id(), || agent.make(timeout));
    let text = emit_report(&Report::new(tables), args.format);
    match &args.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_steps(s: &str) -> Result<std::ops::Range<u32>> {
    let bad = || invalid(format!("bad step range `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u32, u32) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if a >= b {
            return Err(bad());
        }
        Ok(a..b)
    } else {
        let a: u32 = s.parse().map_err(|_| bad())?;
        Ok(a..a + 1)
    }
}

/// Drives the oracle through the task and saves each requested step's
/// corrupted observation.
fn cmd_render(args: RenderArgs) -> Result<()> {
    let suite = load_suite(&args.suite)?;
    let task = suite.get(&args.task).map_err(invalid)?;
    let steps = parse_steps(&args.steps)?;
    let specs = load_specs(args.corruptions.as_deref())?.unwrap_or_default();
    let condition = if specs.is_empty() {
        Condition::clean()
    } else {
        Condition::named("render", specs)
    };
    let mut env = CorruptedEnv::new(task, &condition, args.seed);
    let mut agent = ScriptedAgent::oracle();
    agent.begin(task)?;
    let memory = deskbench::agent::HistoryMemory::new(deskbench::agent::memory::DEFAULT_HISTORY);
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut obs = env.observe();
    let mut written = 0;
    for step in 0..steps.end {
        if steps.contains(&step) {
            let path = args.out.join(format!("{}-step{:02}.ppm", task.id, step));
            write_file(&path, obs.raster().to_ppm())?;
            written += 1;
        }
        if env.state.is_terminal() || step + 1 >= steps.end {
            break;
        }
        let ctx = StepContext {
            task,
            step,
            observation: &obs,
            memory: &memory,
            reminder: None,
        };
        let response = agent.act(&ctx)?;
        let action = deskbench::agent::vocab::parse_response(&response)
            .map(|p| p.action)
            .map_err(|e| anyhow!("oracle produced a malformed response: {e}"))?;
        obs = env.step(&action)?.observation;
    }
    eprintln!("wrote {written} images to {}", args.out.display());
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let store = RunStore::new(&args.store);
    let keys = if args.keys.is_empty() { store.keys()? } else { args.keys.clone() };
    let baseline = match &args.baseline {
        Some(k) => {
            let r = store.load(k)?;
            Some(corruption_robustness(&r, &r.agent))
        }
        None => None,
    };
    let mut tables = Vec::with_capacity(keys.len());
    for k in &keys {
        let r = store.load(k)?;
        let t = corruption_robustness(&r, &r.agent);
        tables.push(match &baseline {
            Some(b) => t.with_baseline(b),
            None => t,
        });
    }
    print!("{}", emit_report(&Report::new(tables), args.format));
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let validation = e.chain().any(|c| {
        c.is::<Invalid>()
            || c.is::<deskbench::corruption::CorruptionError>()
            || c.is::<deskbench::eval::EvalError>()
            || matches!(c.downcast_ref::<deskbench::dagrpo::TrainError>(), Some(deskbench::dagrpo::TrainError::Config(_)))
            || matches!(c.downcast_ref::<deskbench::eval::StoreError>(), Some(deskbench::eval::StoreError::Exists(_) | deskbench::eval::StoreError::Missing(_)))
    });
    if validation {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Train(a) => cmd_train(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Render(a) => cmd_render(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
