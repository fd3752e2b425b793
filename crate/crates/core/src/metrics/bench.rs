//! Benchmark runs over the bundled tasks.

use std::fmt::Write as _;

use serde::Serialize;

use super::tokenizer::TokenCounter;
use crate::assets;
use crate::controller::{run_mission, FixtureSet, MissionOptions, MissionState, MockLlm, PlanLanguage};
use crate::events::NullSink;
use crate::interp::RunControl;
use crate::sim::load_world;
use crate::skills::SkillRegistry;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// 1-based task numbers.
    pub tasks: Vec<usize>,
    pub repeat: u32,
    /// Execution modes to run: `true` is streaming.
    pub modes: Vec<bool>,
    pub variant: Option<String>,
    pub language: PlanLanguage,
    /// Defaults to 0 for the `no_replan` variant and 3 otherwise.
    pub replan_limit: Option<u32>,
    /// Seeds per-run token jitter; each repeat adds its index.
    pub jitter_seed: Option<u64>,
    pub rate_tps: Option<f64>,
    pub fixtures: FixtureSet,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            tasks: (1..=11).collect(),
            repeat: 1,
            modes: vec![true, false],
            variant: None,
            language: PlanLanguage::MiniSpec,
            replan_limit: None,
            jitter_seed: None,
            rate_tps: None,
            fixtures: FixtureSet::bundled(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub task: usize,
    pub world: String,
    pub variant: String,
    pub mode: String,
    pub language: PlanLanguage,
    pub runs: u32,
    pub successes: u32,
    /// Means over the runs, in seconds; `None` if nothing was dispatched.
    pub r_time: Option<f64>,
    pub c_time: f64,
    /// Output tokens of one run, summed over its planning rounds.
    pub tokens: usize,
    pub replans: u32,
    pub skipped: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("no bundled world for task {0}")]
    UnknownTask(usize),
    #[error(transparent)]
    World(#[from] crate::sim::ConfigError),
}

/// Runs one mission of a bundled task with the mock planner.
pub fn run_task(
    task: usize,
    stream: bool,
    cfg: &BenchConfig,
    run_index: u32,
    registry: &SkillRegistry,
) -> Result<MissionState, BenchError> {
    let id = assets::task_world_id(task).ok_or(BenchError::UnknownTask(task))?;
    let mut world = load_world(assets::world_text(id).expect("listed world exists"))?;
    let text = world.task.clone().unwrap_or_default();
    let mut llm = MockLlm::new(cfg.fixtures.clone())
        .with_variant(cfg.variant.as_deref())
        .with_language(cfg.language);
    if let Some(rate) = cfg.rate_tps {
        llm = llm.with_rate(rate);
    }
    if let Some(seed) = cfg.jitter_seed {
        llm = llm.with_jitter(seed + u64::from(run_index));
    }
    let replan_limit = cfg
        .replan_limit
        .unwrap_or(if cfg.variant.as_deref() == Some("no_replan") { 0 } else { 3 });
    let opts = MissionOptions {
        stream,
        replan_limit,
        language: cfg.language,
        ..MissionOptions::default()
    };
    Ok(run_mission(&text, &mut world, registry, &mut llm, &opts, &RunControl::new(), &mut NullSink))
}

fn mode_name(stream: bool) -> &'static str {
    if stream {
        "stream"
    } else {
        "batch"
    }
}

pub fn run_bench(cfg: &BenchConfig, registry: &SkillRegistry) -> Result<Vec<BenchRow>, BenchError> {
    let mut rows = Vec::new();
    for &task in &cfg.tasks {
        let world = assets::task_world_id(task).ok_or(BenchError::UnknownTask(task))?;
        for &stream in &cfg.modes {
            let mut row = BenchRow {
                task,
                world: world.to_string(),
                variant: cfg.variant.clone().unwrap_or_else(|| "default".into()),
                mode: mode_name(stream).into(),
                language: cfg.language,
                runs: 0,
                successes: 0,
                r_time: None,
                c_time: 0.0,
                tokens: 0,
                replans: 0,
                skipped: None,
            };
            if stream && cfg.language == PlanLanguage::Verbose {
                row.skipped = Some("verbose plans have no streaming parser".into());
                rows.push(row);
                continue;
            }
            let mut r_sum = 0.0;
            let mut r_n = 0;
            for i in 0..cfg.repeat {
                let m = run_task(task, stream, cfg, i, registry)?;
                row.runs += 1;
                row.successes += u32::from(m.success);
                if let Some(r) = m.r_time {
                    r_sum += r;
                    r_n += 1;
                }
                row.c_time += m.c_time;
                row.tokens = m.output_tokens;
                row.replans += m.replan_count;
            }
            if row.runs > 0 {
                row.c_time /= f64::from(row.runs);
            }
            row.r_time = (r_n > 0).then(|| r_sum / f64::from(r_n));
            rows.push(row);
        }
    }
    Ok(rows)
}

/// `task,mode,success,r_time,c_time,tokens`, MiniSpec rows only.
pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("task,mode,success,r_time,c_time,tokens\n");
    for r in rows.iter().filter(|r| r.language == PlanLanguage::MiniSpec && r.skipped.is_none()) {
        let _ = writeln!(
            out,
            "{},{},{}/{},{},{:.3},{}",
            r.task,
            r.mode,
            r.successes,
            r.runs,
            r.r_time.map(|t| format!("{t:.3}")).unwrap_or_default(),
            r.c_time,
            r.tokens
        );
    }
    out
}

pub fn render_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<5} {:<9} {:<8} {:<7} {:>7} {:>8} {:>9} {:>7}\n",
        "task", "variant", "language", "mode", "success", "r_time", "c_time", "tokens"
    );
    for r in rows {
        let lang = match r.language {
            PlanLanguage::MiniSpec => "minispec",
            PlanLanguage::Verbose => "verbose",
        };
        if let Some(why) = &r.skipped {
            let _ = writeln!(out, "{:<5} {:<9} {:<8} {:<7} skipped: {why}", r.task, r.variant, lang, r.mode);
            continue;
        }
        let _ = writeln!(
            out,
            "{:<5} {:<9} {:<8} {:<7} {:>7} {:>8} {:>9.2} {:>7}",
            r.task,
            r.variant,
            lang,
            r.mode,
            format!("{}/{}", r.successes, r.runs),
            r.r_time.map(|t| format!("{t:.2}")).unwrap_or_else(|| "-".into()),
            r.c_time,
            r.tokens
        );
    }
    out
}

/// Token counts of one MiniSpec plan and its verbose twin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenPair {
    pub label: String,
    pub minispec: usize,
    pub verbose: usize,
}

impl TokenPair {
    /// Fraction of verbose tokens saved by MiniSpec.
    pub fn reduction(&self) -> f64 {
        1.0 - self.minispec as f64 / self.verbose as f64
    }
}

/// Per-task token pairs for the default fixtures, summed over rounds.
pub fn fixture_token_pairs(fixtures: &FixtureSet, counter: &dyn TokenCounter) -> Vec<TokenPair> {
    let mut out: Vec<TokenPair> = Vec::new();
    for f in fixtures.plans.iter().filter(|f| f.variant.is_none()) {
        let Some(verbose) = f.verbose_text() else { continue };
        let label = f.world.clone().unwrap_or_else(|| f.pattern.clone());
        let (m, v) = (counter.count(&f.plan), counter.count(&verbose));
        match out.iter_mut().find(|p| p.label == label) {
            Some(p) => {
                p.minispec += m;
                p.verbose += v;
            }
            None => out.push(TokenPair {
                label,
                minispec: m,
                verbose: v,
            }),
        }
    }
    out
}

/// Scan skill written in MiniSpec versus its verbose listing.
pub fn scan_token_pair(counter: &dyn TokenCounter) -> TokenPair {
    TokenPair {
        label: "scan".into(),
        minispec: counter.count(assets::SCAN_MINISPEC.trim_end()),
        verbose: counter.count(assets::SCAN_VERBOSE.trim_end()),
    }
}
