//! `minispec` command line.

use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use minispec::assets;
use minispec::controller::{run_mission, FixtureSet, MissionOptions, MissionState, MockLlm, Phase, PlanFixture, PlanLanguage};
use minispec::events::{Event, EventKind, EventSink};
use minispec::interp::RunControl;
use minispec::lang::{parse_program, serialize, validate, Diagnostic, Level, ParseMode};
use minispec::metrics::{
    fit_latency, read_samples_csv, render_table, rows_to_csv, run_bench, BenchConfig, FitOptions, HeuristicTokenizer,
    TokenCounter,
};
use minispec::sim::{load_world, WorldState};
use minispec::skills::{default_registry, SkillRegistry};

use crate::planner::{MockKnobs, PlannerConfig};
use crate::service::{self, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "minispec", version, about = "Drone mission planner runtime")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Interactive session against one world.
    Repl(ReplArgs),
    /// Run one mission and print its events and final state.
    Run(RunArgs),
    /// Run the bundled task suite with the mock planner.
    Bench(BenchArgs),
    /// Count tokens in a file.
    Tokens(TokensArgs),
    /// Parse and validate a plan or skill definition.
    Parse(ParseArgs),
    /// Check and summarize a recorded event log.
    Replay(ReplayArgs),
    /// Start the mission HTTP and WebSocket service.
    Serve(ServeArgs),
    /// Fit `latency = a*Np + b*No + c` to measured samples.
    Fit(FitArgs),
}

#[derive(Debug, Args)]
pub struct ReplArgs {
    #[arg(long, default_value = "task_01")]
    pub world: String,
    #[arg(long)]
    pub batch: bool,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub task: String,
    /// Bundled world id or a path to a world file.
    #[arg(long)]
    pub world: String,
    /// Collect the whole plan before executing it.
    #[arg(long)]
    pub batch: bool,
    /// Mock planner output rate in tokens per second.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub replan_limit: u32,
    /// Print events as JSON lines.
    #[arg(long)]
    pub json: bool,
    /// Also write events as JSON lines to this file.
    #[arg(long)]
    pub events_out: Option<PathBuf>,
    #[arg(long)]
    pub snapshot_dir: Option<PathBuf>,
    /// Real seconds per simulated second.
    #[arg(long)]
    pub pace: Option<f64>,
    /// Seeds token-interval jitter.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Stream,
    Batch,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LanguageArg {
    Minispec,
    Verbose,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `1..11`, `3` or `1,4,8`.
    #[arg(long, default_value = "1..11", value_parser = parse_task_list)]
    pub tasks: TaskList,
    #[arg(long, default_value_t = 1)]
    pub repeat: u32,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub variant: Option<String>,
    #[arg(long, value_enum, default_value = "minispec")]
    pub language: LanguageArg,
    #[arg(long, value_enum, default_value = "both")]
    pub mode: ModeArg,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskList(pub Vec<usize>);

fn parse_task_list(s: &str) -> Result<TaskList, String> {
    let bad = || format!("expected `a..b` or a comma list of task numbers, got `{s}`");
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if let Some(t) = out.iter().find(|t| assets::task_world_id(**t).is_none()) {
        return Err(format!("no bundled task {t}"));
    }
    Ok(TaskList(out))
}

#[derive(Debug, Args)]
pub struct TokensArgs {
    pub file: PathBuf,
    /// Print the pieces separated by `|`.
    #[arg(long)]
    pub segments: bool,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    pub file: PathBuf,
    /// Parse a skill definition, where `$n` and `->` are allowed.
    #[arg(long)]
    pub skill_mode: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// JSON-lines event log as written by `run --events-out`.
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Real seconds per simulated second; 0 runs missions instantly.
    #[arg(long, default_value_t = 1.0)]
    pub pace: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with header `np,no,latency_s`.
    pub file: PathBuf,
    #[arg(long)]
    pub fix_a_zero: bool,
}

/// Bad input named on the command line; exits 2 like a clap error.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn read_input(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())).into())
}

fn open_input(path: &Path) -> anyhow::Result<File> {
    File::open(path).map_err(|e| UsageError(format!("cannot open {}: {e}", path.display())).into())
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn main() -> i32 {
    run_cli(std::env::args_os(), &mut io::stdout(), &mut io::stderr())
}

/// 0 on success, 1 on mission or input failure, 2 on usage error.
pub fn run_cli<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            if e.is::<UsageError>() {
                2
            } else {
                1
            }
        }
    }
}

fn dispatch(cmd: Command, out: &mut (dyn Write + Send), err: &mut dyn Write) -> anyhow::Result<i32> {
    match cmd {
        Command::Repl(a) => repl(a, &mut io::stdin().lock(), out),
        Command::Run(a) => run(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Tokens(a) => tokens(a, out),
        Command::Parse(a) => parse(a, out, err),
        Command::Replay(a) => replay(a, out, err),
        Command::Serve(a) => serve(a),
        Command::Fit(a) => fit(a, out),
    }
}

/// Bundled world id, or a path to a world file.
pub fn resolve_world(spec: &str) -> anyhow::Result<WorldState> {
    if let Some(text) = assets::world_text(spec) {
        return Ok(load_world(text)?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Ok(load_world(&text)?);
    }
    let ids: Vec<&str> = assets::world_ids().collect();
    Err(UsageError(format!("unknown world `{spec}`; bundled worlds are {}", ids.join(", "))).into())
}

/// Writes each event as it arrives.
struct PrintSink<'a> {
    out: &'a mut (dyn Write + Send),
    file: Option<BufWriter<File>>,
    json: bool,
    seq: u64,
    events: Vec<Event>,
}

impl EventSink for PrintSink<'_> {
    fn emit(&mut self, at: std::time::Duration, kind: EventKind) {
        let event = Event {
            seq: self.seq,
            at_ms: at.as_secs_f64() * 1000.0,
            kind,
        };
        self.seq += 1;
        let line = serde_json::to_string(&event).expect("events serialize");
        if let Some(f) = self.file.as_mut() {
            let _ = writeln!(f, "{line}");
        }
        let _ = if self.json {
            writeln!(self.out, "{line}")
        } else {
            writeln!(self.out, "{}", human_line(&event))
        };
        self.events.push(event);
    }
}

fn human_line(e: &Event) -> String {
    let payload = serde_json::to_value(&e.kind)
        .ok()
        .and_then(|v| v.get("payload").cloned())
        .map(|p| p.to_string())
        .unwrap_or_default();
    format!("{:>9.1}ms #{:<4} {:<18} {}", e.at_ms, e.seq, e.kind.name(), payload)
}

/// Runs one mission, sending events to `sink`. Shared by `run` and tests.
pub fn execute_mission(
    args: &RunArgs,
    planner: &PlannerConfig,
    registry: &SkillRegistry,
    sink: &mut dyn EventSink,
) -> anyhow::Result<(MissionState, WorldState)> {
    let mut world = resolve_world(&args.world)?;
    let knobs = MockKnobs {
        rate_tps: args.rate,
        variant: args.variant.clone(),
        jitter_seed: args.seed,
    };
    let mut llm = planner.client(&knobs)?;
    let opts = MissionOptions {
        stream: !args.batch,
        replan_limit: args.replan_limit,
        pace: args.pace,
        snapshot_dir: args.snapshot_dir.clone(),
        ..MissionOptions::default()
    };
    let state = run_mission(&args.task, &mut world, registry, llm.as_mut(), &opts, &RunControl::new(), sink);
    Ok((state, world))
}

fn phase_exit(phase: Phase) -> i32 {
    if phase == Phase::Done {
        0
    } else {
        1
    }
}

fn run(args: RunArgs, out: &mut (dyn Write + Send)) -> anyhow::Result<i32> {
    let planner = PlannerConfig::from_env()?;
    let registry = default_registry();
    let file = match &args.events_out {
        Some(p) => Some(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => None,
    };
    let mut sink = PrintSink {
        out,
        file,
        json: args.json,
        seq: 0,
        events: Vec::new(),
    };
    let (state, world) = execute_mission(&args, &planner, &registry, &mut sink)?;
    if let Some(mut f) = sink.file.take() {
        f.flush()?;
    }
    let out = sink.out;
    if !args.json {
        for line in &world.log {
            writeln!(out, "log: {line}")?;
        }
    }
    writeln!(out, "{}", serde_json::to_string_pretty(&state)?)?;
    Ok(phase_exit(state.phase))
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let fixtures = match PlannerConfig::from_env()? {
        PlannerConfig::Mock(f) => f,
        PlannerConfig::Http(_) => bail!("bench runs against the mock planner; unset MINISPEC_LLM"),
    };
    let cfg = BenchConfig {
        tasks: args.tasks.0,
        repeat: args.repeat.max(1),
        modes: match args.mode {
            ModeArg::Stream => vec![true],
            ModeArg::Batch => vec![false],
            ModeArg::Both => vec![true, false],
        },
        variant: args.variant,
        language: match args.language {
            LanguageArg::Minispec => PlanLanguage::MiniSpec,
            LanguageArg::Verbose => PlanLanguage::Verbose,
        },
        jitter_seed: args.seed,
        rate_tps: args.rate,
        fixtures,
        ..BenchConfig::default()
    };
    let rows = run_bench(&cfg, &default_registry())?;
    write!(out, "{}", render_table(&rows))?;
    if let Some(path) = args.csv {
        std::fs::write(&path, rows_to_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(0)
}

fn tokens(args: TokensArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let text = read_input(&args.file)?;
    // A trailing newline is file framing, not content.
    let text = text.strip_suffix('\n').unwrap_or(&text);
    let pieces = HeuristicTokenizer.segment(text);
    if args.segments {
        writeln!(out, "{}", pieces.join("|"))?;
    }
    writeln!(out, "{}", pieces.len())?;
    Ok(0)
}

fn parse(args: ParseArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let text = read_input(&args.file)?;
    let mode = if args.skill_mode {
        ParseMode::SkillDefinition
    } else {
        ParseMode::Plan
    };
    let program = match parse_program(text.trim_end(), mode) {
        Ok(p) => p,
        Err(e) => {
            writeln!(err, "{}", Diagnostic::syntax(e.position(), e.to_string()))?;
            return Ok(1);
        }
    };
    let diags = validate(&program, &default_registry());
    writeln!(out, "{}", serialize(&program).expect("parsed programs are closed"))?;
    for d in &diags {
        writeln!(err, "{d}")?;
    }
    Ok(if diags.iter().any(|d| d.level == Level::Error) {
        1
    } else {
        0
    })
}

fn replay(args: ReplayArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let file = open_input(&args.file)?;
    let mut events = Vec::new();
    for (i, line) in io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e: Event = serde_json::from_str(&line).with_context(|| format!("line {}", i + 1))?;
        events.push(e);
    }
    if let Some((i, e)) = events.iter().enumerate().find(|(i, e)| e.seq != *i as u64) {
        writeln!(err, "sequence gap: event {i} has seq {}", e.seq)?;
        return Ok(1);
    }
    if let Some(w) = events.windows(2).find(|w| w[1].at_ms < w[0].at_ms) {
        writeln!(err, "time goes backwards at seq {}", w[1].seq)?;
        return Ok(1);
    }
    let phase = Phase::from_events(&events);
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for e in &events {
        match counts.iter_mut().find(|(k, _)| *k == e.kind.name()) {
            Some((_, n)) => *n += 1,
            None => counts.push((e.kind.name(), 1)),
        }
    }
    writeln!(out, "events: {}", events.len())?;
    for (k, n) in counts {
        writeln!(out, "  {k}: {n}")?;
    }
    if let Some(last) = events.last() {
        writeln!(out, "duration: {:.1}ms", last.at_ms)?;
    }
    writeln!(out, "phase: {}", serde_json::to_value(phase)?.as_str().unwrap_or_default())?;
    Ok(phase_exit(phase))
}

fn serve(args: ServeArgs) -> anyhow::Result<i32> {
    let config = ServiceConfig {
        planner: PlannerConfig::from_env()?,
        pace: Some(args.pace),
        snapshot_dir: None,
    };
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(service::serve(config, args.port))?;
    Ok(0)
}

fn fit(args: FitArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let file = open_input(&args.file)?;
    let samples = read_samples_csv(file)?;
    let fit = fit_latency(
        &samples,
        FitOptions {
            fix_a_zero: args.fix_a_zero,
        },
    )?;
    let m = fit.model;
    let [sa, sb, sc] = fit.std_errors;
    writeln!(out, "samples: {}", fit.samples)?;
    writeln!(out, "a = {:.6} ± {:.6} s/prompt token", m.a, sa)?;
    writeln!(out, "b = {:.6} ± {:.6} s/output token", m.b, sb)?;
    writeln!(out, "c = {:.6} ± {:.6} s", m.c, sc)?;
    writeln!(out, "rms residual = {:.6} s", fit.rms_residual)?;
    Ok(0)
}

/// Fixture set that answers the first round of any task with `plan`.
fn literal_plan(plan: &str, rate_tps: f64) -> FixtureSet {
    FixtureSet {
        rate_tps,
        prefill_s: 0.3,
        plans: vec![PlanFixture {
            pattern: String::new(),
            world: None,
            round: 0,
            variant: None,
            plan: plan.to_string(),
            verbose: Vec::new(),
        }],
    }
}

const REPL_HELP: &str = "\
:world <id>     switch world (resets the drone)
:mode stream|batch
:plan <text>    execute a MiniSpec plan directly
:reset          reload the current world
:help
:quit
anything else is sent to the planner as a task";

fn repl(args: ReplArgs, input: &mut dyn BufRead, out: &mut (dyn Write + Send)) -> anyhow::Result<i32> {
    let planner = PlannerConfig::from_env()?;
    let registry = default_registry();
    let mut world_id = args.world;
    let mut world = resolve_world(&world_id)?;
    let mut stream = !args.batch;
    writeln!(out, "world {world_id}; type :help for commands")?;
    let mut line = String::new();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim();
        let (cmd, rest) = line.split_once(' ').map_or((line, ""), |(c, r)| (c, r.trim()));
        let mut llm = match cmd {
            "" => continue,
            ":quit" | ":q" => break,
            ":help" => {
                writeln!(out, "{REPL_HELP}")?;
                continue;
            }
            ":world" => {
                match resolve_world(rest) {
                    Ok(w) => {
                        world = w;
                        world_id = rest.to_string();
                        writeln!(out, "world {world_id}")?;
                    }
                    Err(e) => writeln!(out, "{e}")?,
                }
                continue;
            }
            ":reset" => {
                world = resolve_world(&world_id)?;
                writeln!(out, "world {world_id} reloaded")?;
                continue;
            }
            ":mode" => {
                match rest {
                    "stream" => stream = true,
                    "batch" => stream = false,
                    _ => writeln!(out, "mode is stream or batch")?,
                }
                writeln!(out, "mode {}", if stream { "stream" } else { "batch" })?;
                continue;
            }
            ":plan" => Box::new(MockLlm::new(literal_plan(rest, 20.0))) as Box<dyn minispec::controller::LlmClient>,
            c if c.starts_with(':') => {
                writeln!(out, "unknown command {c}; try :help")?;
                continue;
            }
            _ => planner.client(&MockKnobs::default())?,
        };
        let task = if cmd == ":plan" { "direct plan" } else { line };
        let opts = MissionOptions {
            stream,
            replan_limit: if cmd == ":plan" { 0 } else { 3 },
            ..MissionOptions::default()
        };
        let mut sink = PrintSink {
            out: &mut *out,
            file: None,
            json: false,
            seq: 0,
            events: Vec::new(),
        };
        let log_start = world.log.len();
        let state = run_mission(task, &mut world, &registry, llm.as_mut(), &opts, &RunControl::new(), &mut sink);
        for l in &world.log[log_start..] {
            writeln!(out, "log: {l}")?;
        }
        let verdict = match (&state.phase, state.success) {
            (Phase::Done, true) => "done, success".to_string(),
            (Phase::Done, false) => "done, success predicates not met".to_string(),
            _ => format!("failed: {}", state.failure.as_deref().unwrap_or("unknown")),
        };
        writeln!(out, "{verdict} (c-time {:.2}s)", state.c_time)?;
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_lists() {
        assert_eq!(parse_task_list("1..3").unwrap().0, [1, 2, 3]);
        assert_eq!(parse_task_list("1,4, 8").unwrap().0, [1, 4, 8]);
        assert!(parse_task_list("3..1").is_err());
        assert!(parse_task_list("12").is_err());
        assert!(parse_task_list("x").is_err());
    }
}
