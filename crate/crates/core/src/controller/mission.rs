//! Plan, execute, replan: one mission against one world.

use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::llm::{LlmClient, LlmError, PlanRequest};
use super::prompt::{history_entry, planning_prompt, query_prompt};
use super::PlanLanguage;
use crate::events::{Event, EventKind, EventSink};
use crate::interp::{
    spawn_producer, ExecOutcome, ExecutionTrace, Executor, MissionClock, Policy, ReplanReason, RunControl,
    RunResult, StreamIo, Timeline, DEFAULT_STEP_BUDGET,
};
use crate::lang::{parse_program, ParseMode, Value};
use crate::metrics::translate_verbose;
use crate::sim::{scene_description, SimBackend, WorldState};
use crate::skills::{Query, QueryResponder, SkillRegistry};

#[derive(Debug, Clone, PartialEq)]
pub struct MissionOptions {
    /// Execute units while the plan is still being generated.
    pub stream: bool,
    /// Replans allowed before the mission fails.
    pub replan_limit: u32,
    /// Overrides the world's `mission.policy_trigger` flag.
    pub policy: Option<bool>,
    /// Real seconds slept per simulated second; `None` runs flat out.
    pub pace: Option<f64>,
    pub snapshot_dir: Option<PathBuf>,
    pub step_budget: u64,
    pub language: PlanLanguage,
}

impl Default for MissionOptions {
    fn default() -> Self {
        Self {
            stream: true,
            replan_limit: 3,
            policy: None,
            pace: None,
            snapshot_dir: None,
            step_budget: DEFAULT_STEP_BUDGET,
            language: PlanLanguage::MiniSpec,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    #[default]
    Idle,
    Planning,
    Executing,
    Replanning,
    Done,
    Failed,
}

impl Phase {
    pub fn is_terminal(self) -> bool {
        matches!(self, Phase::Done | Phase::Failed)
    }

    /// Phase after observing `kind`.
    pub fn after(self, kind: &EventKind) -> Phase {
        match kind {
            EventKind::MissionStarted { .. } => Phase::Planning,
            EventKind::StatementStarted { .. } if !self.is_terminal() => Phase::Executing,
            EventKind::ReplanTriggered { .. } => Phase::Replanning,
            EventKind::TokenReceived { .. } | EventKind::UnitParsed { .. } if self == Phase::Replanning => {
                Phase::Planning
            }
            EventKind::MissionDone { .. } => Phase::Done,
            EventKind::MissionFailed { .. } => Phase::Failed,
            _ => self,
        }
    }

    pub fn from_events(events: &[Event]) -> Phase {
        events.iter().fold(Phase::Idle, |p, e| p.after(&e.kind))
    }
}

/// One plan request and its execution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u32,
    pub plan: String,
    pub prompt_tokens: usize,
    pub output_tokens: usize,
    #[serde(rename = "sent_at_s")]
    pub sent_at: f64,
    #[serde(rename = "first_dispatch_s")]
    pub first_dispatch: Option<f64>,
    #[serde(rename = "finished_s")]
    pub finished: f64,
    /// `completed`, `replan:<reason>`, `aborted` or `error`.
    pub outcome: String,
    pub detail: String,
    pub trace: ExecutionTrace,
}

/// Everything known about a mission once it ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionState {
    pub task: String,
    pub world: String,
    pub stream: bool,
    pub phase: Phase,
    pub replan_count: u32,
    pub rounds: Vec<RoundRecord>,
    /// Seconds from the request to the first dispatched skill.
    #[serde(rename = "r_time_s")]
    pub r_time: Option<f64>,
    /// Seconds from the request to the end of the mission.
    #[serde(rename = "c_time_s")]
    pub c_time: f64,
    pub output_tokens: usize,
    pub prompt_tokens: usize,
    pub success: bool,
    pub answer: Value,
    pub failure: Option<String>,
}

/// Routes probe questions to the LLM client.
struct Probe<'a> {
    llm: &'a mut dyn LlmClient,
}

impl QueryResponder for Probe<'_> {
    fn answer(&mut self, query: &Query) -> Result<(String, Duration), String> {
        let prompt = query_prompt(&query.scene, &query.question).map_err(|e| e.to_string())?;
        self.llm.ask(&prompt, query).map_err(|e| e.to_string())
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

/// Runs a mission to completion, emitting events into `sink`.
pub fn run_mission(
    task: &str,
    world: &mut WorldState,
    registry: &SkillRegistry,
    llm: &mut dyn LlmClient,
    opts: &MissionOptions,
    ctl: &RunControl,
    sink: &mut dyn EventSink,
) -> MissionState {
    let clock = if llm.is_simulated() {
        MissionClock::paced(opts.pace.unwrap_or(0.0))
    } else {
        MissionClock::wall()
    };
    let policy = Policy {
        enabled: opts.policy.unwrap_or(world.mission.policy_trigger),
        ..ctl.policy()
    };
    let stream = opts.stream && opts.language == PlanLanguage::MiniSpec;
    let mut tl = Timeline::new(clock, sink);
    let mut state = MissionState {
        task: task.to_string(),
        world: world.id.clone(),
        stream,
        phase: Phase::Planning,
        replan_count: 0,
        rounds: Vec::new(),
        r_time: None,
        c_time: 0.0,
        output_tokens: 0,
        prompt_tokens: 0,
        success: false,
        answer: Value::None,
        failure: None,
    };
    tl.emit_at(
        Duration::ZERO,
        EventKind::MissionStarted {
            task: task.to_string(),
            world: world.id.clone(),
            stream,
        },
    );
    let d = world.drone;
    tl.emit_at(Duration::ZERO, EventKind::DroneState { x: d.x, y: d.y, z: d.z, yaw: d.yaw });
    tl.emit_at(Duration::ZERO, EventKind::SceneUpdated { scene: scene_description(world) });

    let mut history = String::new();
    let mut round = 0u32;
    loop {
        if ctl.is_aborted() {
            return abort(&mut tl, state);
        }
        let scene = scene_description(world);
        let prompt = match planning_prompt(registry, &scene, task, &history) {
            Ok(p) => p,
            Err(e) => return fail(&mut tl, state, format!("prompt error: {e}")),
        };
        let sent_at = tl.clock().now();
        let request = PlanRequest {
            prompt: &prompt,
            task,
            world: &world.id,
            round,
            sent_at,
        };
        let response = match llm.plan(&request) {
            Ok(r) => r,
            Err(e) => return fail(&mut tl, state, llm_failure(&e)),
        };
        let mode = ParseMode::Plan;
        let (rx, handle) = spawn_producer(response.tokens, mode);
        let mut producer = Some(handle);
        let mut joined = None;
        let result = {
            let mut backend = SimBackend::new(world).with_snapshot_dir(opts.snapshot_dir.clone());
            let mut probe = Probe { llm: &mut *llm };
            backend = backend.with_responder(&mut probe);
            let mut io = StreamIo::new(&mut tl, rx, round);
            if stream {
                Executor::new(registry, &mut backend, ctl, &mut io)
                    .with_step_budget(opts.step_budget)
                    .with_policy(policy)
                    .run_stream()
            } else {
                io.drain();
                let summary = joined.insert(producer.take().map(|h| h.join().unwrap_or_default()).unwrap_or_default());
                let text = summary.text.clone();
                let program = match opts.language {
                    PlanLanguage::MiniSpec => parse_program(&text, mode).map_err(|e| e.to_string()),
                    PlanLanguage::Verbose => translate_verbose(&text, registry).map_err(|e| e.to_string()),
                };
                match program {
                    Ok(p) => Executor::new(registry, &mut backend, ctl, &mut io)
                        .with_step_budget(opts.step_budget)
                        .with_policy(policy)
                        .run_program(&p),
                    Err(detail) => RunResult {
                        outcome: ExecOutcome::ReplanRequested {
                            reason: ReplanReason::SyntaxError,
                            detail,
                        },
                        trace: ExecutionTrace::default(),
                        first_dispatch: None,
                        steps: 0,
                    },
                }
            }
        };
        let summary = joined
            .or_else(|| producer.take().map(|h| h.join().unwrap_or_default()))
            .unwrap_or_default();
        state.prompt_tokens += response.prompt_tokens;
        state.output_tokens += summary.tokens;
        if state.r_time.is_none() {
            state.r_time = result.first_dispatch.map(secs);
        }
        let (outcome, detail) = match &result.outcome {
            ExecOutcome::Completed(_) => ("completed".to_string(), String::new()),
            ExecOutcome::ReplanRequested { reason, detail } => (format!("replan:{reason}"), detail.clone()),
            ExecOutcome::Aborted => ("aborted".to_string(), String::new()),
            ExecOutcome::RuntimeError(e) => ("error".to_string(), e.to_string()),
        };
        state.rounds.push(RoundRecord {
            round,
            plan: summary.text.clone(),
            prompt_tokens: response.prompt_tokens,
            output_tokens: summary.tokens,
            sent_at: secs(sent_at),
            first_dispatch: result.first_dispatch.map(secs),
            finished: secs(tl.clock().now()),
            outcome,
            detail,
            trace: result.trace.clone(),
        });
        match result.outcome {
            ExecOutcome::Completed(value) => {
                state.c_time = secs(tl.clock().now());
                state.success = world.success();
                state.answer = if task.trim_start().starts_with("[Q]") {
                    world.log.last().cloned().map(Value::Str).unwrap_or(value)
                } else {
                    value
                };
                state.phase = Phase::Done;
                tl.emit_at(
                    tl.clock().now(),
                    EventKind::MissionDone {
                        success: state.success,
                        answer: state.answer.clone(),
                        replan_count: state.replan_count,
                    },
                );
                return state;
            }
            ExecOutcome::ReplanRequested { reason, detail } => {
                if state.replan_count >= opts.replan_limit {
                    let msg = format!("replan limit of {} reached ({reason}: {detail})", opts.replan_limit);
                    return fail(&mut tl, state, msg);
                }
                state.replan_count += 1;
                round += 1;
                history.push_str(&history_entry(&summary.text, &result.trace.export(), reason.as_str(), &detail));
                tl.emit_at(
                    tl.clock().now(),
                    EventKind::ReplanTriggered {
                        round,
                        reason: reason.to_string(),
                        detail,
                    },
                );
            }
            ExecOutcome::Aborted => return abort(&mut tl, state),
            ExecOutcome::RuntimeError(e) => return fail(&mut tl, state, format!("runtime error: {e}")),
        }
    }
}

fn llm_failure(e: &LlmError) -> String {
    format!("llm error: {e}")
}

fn fail(tl: &mut Timeline<'_>, mut state: MissionState, reason: String) -> MissionState {
    state.c_time = secs(tl.clock().now());
    state.phase = Phase::Failed;
    state.failure = Some(reason.clone());
    tl.emit_at(tl.clock().now(), EventKind::MissionFailed { reason });
    state
}

fn abort(tl: &mut Timeline<'_>, state: MissionState) -> MissionState {
    tl.emit_at(tl.clock().now(), EventKind::Aborted {});
    fail(tl, state, "aborted".into())
}
