use std::sync::Arc;
use std::time::Duration;

use minispec::assets;
use minispec::controller::{
    run_mission, FixtureSet, LlmClient, LlmError, MissionOptions, MissionState, MockLlm, Phase, PlanFixture,
    PlanLanguage, PlanRequest, PlanStream,
};
use minispec::events::{EventKind, EventLog};
use minispec::interp::RunControl;
use minispec::lang::Value;
use minispec::metrics::{run_task, BenchConfig};
use minispec::sim::{load_world, WorldState};
use minispec::skills::{default_registry, Query};

fn world(task: usize) -> WorldState {
    load_world(assets::world_text(assets::task_world_id(task).unwrap()).unwrap()).unwrap()
}

fn mission(task: usize, llm: &mut dyn LlmClient, opts: &MissionOptions) -> (MissionState, EventLog, WorldState) {
    let mut w = world(task);
    let text = w.task.clone().unwrap();
    let mut log = EventLog::new();
    let m = run_mission(&text, &mut w, &default_registry(), llm, opts, &RunControl::new(), &mut log);
    (m, log, w)
}

fn fixtures(entries: &[(&str, u32, &str)]) -> FixtureSet {
    FixtureSet {
        rate_tps: 20.0,
        prefill_s: 0.3,
        plans: entries
            .iter()
            .map(|(world, round, plan)| PlanFixture {
                pattern: String::new(),
                world: Some(world.to_string()),
                round: *round,
                variant: None,
                plan: plan.to_string(),
                verbose: Vec::new(),
            })
            .collect(),
    }
}

#[test]
fn every_task_succeeds_in_both_modes() {
    let reg = default_registry();
    let cfg = BenchConfig::default();
    for task in 1..=11 {
        for stream in [true, false] {
            let m = run_task(task, stream, &cfg, 0, &reg).unwrap();
            assert!(m.success, "task {task} stream={stream}: {:?}", m.failure);
            assert_eq!(m.phase, Phase::Done);
        }
    }
}

#[test]
fn stream_and_batch_agree_on_traces_and_world() {
    for task in 1..=11 {
        let (s, _, ws) = mission(task, &mut MockLlm::bundled(), &MissionOptions::default());
        let batch = MissionOptions {
            stream: false,
            ..MissionOptions::default()
        };
        let (b, _, wb) = mission(task, &mut MockLlm::bundled(), &batch);
        let steps = |m: &MissionState| m.rounds.iter().map(|r| r.trace.steps()).collect::<Vec<_>>();
        assert_eq!(steps(&s), steps(&b), "task {task}");
        assert_eq!(ws.drone, wb.drone, "task {task}");
        assert!(s.r_time.unwrap() <= b.r_time.unwrap(), "task {task}");
        assert_eq!(s.output_tokens, b.output_tokens);
    }
}

#[test]
fn verbose_twins_dispatch_the_same_skills() {
    for task in 1..=11 {
        let batch = MissionOptions {
            stream: false,
            ..MissionOptions::default()
        };
        let (m, _, wm) = mission(task, &mut MockLlm::bundled(), &batch);
        let verbose = MissionOptions {
            stream: false,
            language: PlanLanguage::Verbose,
            ..MissionOptions::default()
        };
        let mut llm = MockLlm::bundled().with_language(PlanLanguage::Verbose);
        let (v, _, wv) = mission(task, &mut llm, &verbose);
        let steps = |m: &MissionState| m.rounds.iter().map(|r| r.trace.steps()).collect::<Vec<_>>();
        assert_eq!(steps(&m), steps(&v), "task {task}");
        assert_eq!(wm.drone, wv.drone);
        assert!(v.success);
        assert!(v.output_tokens > m.output_tokens);
    }
}

#[test]
fn event_stream_shape() {
    let (m, log, _) = mission(2, &mut MockLlm::bundled(), &MissionOptions::default());
    assert!(m.success);
    let kinds = log.kinds();
    assert_eq!(&kinds[..3], ["mission_started", "drone_state", "scene_updated"]);
    assert_eq!(*kinds.last().unwrap(), "mission_done");
    let events = log.events();
    assert!(events.windows(2).all(|w| w[0].seq + 1 == w[1].seq && w[0].at_ms <= w[1].at_ms));
    assert_eq!(Phase::from_events(events), Phase::Done);
    // The first statement starts when its unit is parsed, before the plan ends.
    let first_start = events.iter().position(|e| e.kind.name() == "statement_started").unwrap();
    let last_token = events.iter().rposition(|e| e.kind.name() == "token_received").unwrap();
    assert!(first_start < last_token);
    let total: usize = events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::TokenReceived { count, .. } => Some(*count),
            _ => None,
        })
        .sum();
    assert_eq!(total, m.output_tokens);
}

#[test]
fn replan_feeds_history_into_the_next_prompt() {
    struct Recorder {
        inner: MockLlm,
        prompts: Vec<String>,
    }
    impl LlmClient for Recorder {
        fn plan(&mut self, req: &PlanRequest<'_>) -> Result<PlanStream, LlmError> {
            self.prompts.push(req.prompt.to_string());
            self.inner.plan(req)
        }
        fn ask(&mut self, prompt: &str, query: &Query) -> Result<(String, Duration), LlmError> {
            self.inner.ask(prompt, query)
        }
    }
    let mut llm = Recorder {
        inner: MockLlm::bundled(),
        prompts: Vec::new(),
    };
    let (m, log, _) = mission(9, &mut llm, &MissionOptions::default());
    assert!(m.success);
    assert_eq!(m.replan_count, 1);
    assert_eq!(m.rounds.len(), 2);
    assert_eq!(m.rounds[0].outcome, "replan:explicit_statement");
    assert_eq!(m.output_tokens, m.rounds[0].output_tokens + m.rounds[1].output_tokens);
    assert_eq!(llm.prompts.len(), 2);
    assert!(!llm.prompts[0].contains("previous plan:"));
    assert!(llm.prompts[1].contains("previous plan:\ntc(180);rp\nexecuted:\n"));
    assert!(llm.prompts[1].contains("reason: explicit_statement"));
    // The replanned round sees the turned-around scene.
    assert!(llm.prompts[1].contains("name:chair_1"));
    assert!(log.events().iter().any(|e| matches!(&e.kind,
        EventKind::ReplanTriggered { round: 1, reason, .. } if reason == "explicit_statement")));
}

#[test]
fn no_replan_variant_fails_on_collision() {
    let mut llm = MockLlm::bundled().with_variant(Some("no_replan"));
    let opts = MissionOptions {
        replan_limit: 0,
        ..MissionOptions::default()
    };
    let (m, log, w) = mission(9, &mut llm, &opts);
    assert!(!m.success);
    assert_eq!(m.phase, Phase::Failed);
    assert!(m.failure.unwrap().contains("skill_fault"));
    assert_eq!(w.collisions.len(), 1);
    assert_eq!(*log.kinds().last().unwrap(), "mission_failed");
}

#[test]
fn syntax_error_triggers_replan() {
    for stream in [true, false] {
        let mut llm = MockLlm::new(fixtures(&[("task_03", 0, "tc(45);g('person'"), ("task_03", 1, "tu(45);g('person')")]));
        let opts = MissionOptions {
            stream,
            ..MissionOptions::default()
        };
        let (m, _, _) = mission(3, &mut llm, &opts);
        assert!(m.success, "stream={stream}");
        assert_eq!(m.rounds[0].outcome, "replan:syntax_error");
        // Streaming already executed the complete first statement.
        assert_eq!(m.rounds[0].trace.len(), usize::from(stream));
    }
}

#[test]
fn unknown_skill_and_runtime_error() {
    let mut llm = MockLlm::new(fixtures(&[("task_03", 0, "fly('x')")]));
    let opts = MissionOptions {
        replan_limit: 0,
        ..MissionOptions::default()
    };
    let (m, _, _) = mission(3, &mut llm, &opts);
    assert!(m.failure.unwrap().contains("syntax_error"));

    let mut llm = MockLlm::new(fixtures(&[("task_03", 0, "l(_2)")]));
    let (m, _, _) = mission(3, &mut llm, &MissionOptions::default());
    assert_eq!(m.replan_count, 0);
    assert!(m.failure.unwrap().contains("unbound variable _2"));
}

#[test]
fn missing_fixture_fails_cleanly() {
    let mut llm = MockLlm::new(fixtures(&[]));
    let (m, log, _) = mission(1, &mut llm, &MissionOptions::default());
    assert!(m.failure.unwrap().contains("no fixture plan"));
    assert_eq!(log.kinds(), ["mission_started", "drone_state", "scene_updated", "mission_failed"]);
}

#[test]
fn policy_trigger_replans() {
    let mut llm = MockLlm::new(fixtures(&[("task_09", 0, "tc(100);tc(100)"), ("task_09", 1, "tu(20);ml(50);g('apple')")]));
    let (m, _, _) = mission(9, &mut llm, &MissionOptions::default());
    assert_eq!(m.rounds[0].outcome, "replan:policy_trigger");
    assert!(m.success);
    // Off by default in other worlds, and overridable per mission.
    let mut llm = MockLlm::new(fixtures(&[("task_09", 0, "tc(100);tc(100)")]));
    let opts = MissionOptions {
        policy: Some(false),
        ..MissionOptions::default()
    };
    let (m, _, _) = mission(9, &mut llm, &opts);
    assert_eq!(m.rounds.len(), 1);
    assert_eq!(m.phase, Phase::Done);
}

#[test]
fn question_tasks_answer_with_the_last_log() {
    let mut set = fixtures(&[("task_10", 0, "tc(180);_1=q('How many people can you see?');l(_1)")]);
    set.plans[0].pattern = "[q]".into();
    let mut w = world(10);
    let mut log = EventLog::new();
    let m = run_mission(
        "[Q] How many people are behind you?",
        &mut w,
        &default_registry(),
        &mut MockLlm::new(set),
        &MissionOptions::default(),
        &RunControl::new(),
        &mut log,
    );
    assert_eq!(m.answer, Value::Str("Two people".into()));
}

#[test]
fn abort_during_probe() {
    struct AbortOnAsk {
        inner: MockLlm,
        ctl: Arc<RunControl>,
    }
    impl LlmClient for AbortOnAsk {
        fn plan(&mut self, req: &PlanRequest<'_>) -> Result<PlanStream, LlmError> {
            self.inner.plan(req)
        }
        fn ask(&mut self, prompt: &str, query: &Query) -> Result<(String, Duration), LlmError> {
            self.ctl.abort();
            self.inner.ask(prompt, query)
        }
    }
    let ctl = Arc::new(RunControl::new());
    let mut llm = AbortOnAsk {
        inner: MockLlm::bundled(),
        ctl: ctl.clone(),
    };
    let mut w = world(5);
    let text = w.task.clone().unwrap();
    let mut log = EventLog::new();
    let m = run_mission(&text, &mut w, &default_registry(), &mut llm, &MissionOptions::default(), &ctl, &mut log);
    assert_eq!(m.phase, Phase::Failed);
    assert_eq!(m.failure.as_deref(), Some("aborted"));
    let kinds = log.kinds();
    assert_eq!(&kinds[kinds.len() - 2..], ["aborted", "mission_failed"]);
    // The probe finished; nothing was dispatched after it.
    let last_start = log
        .events()
        .iter()
        .rev()
        .find_map(|e| match &e.kind {
            EventKind::StatementStarted { text, .. } => Some(text.clone()),
            _ => None,
        })
        .unwrap();
    assert!(last_start.starts_with("_1=q("), "{last_start}");
}

#[test]
fn snapshots_are_written() {
    let dir = std::env::temp_dir().join(format!("minispec-mission-{}", std::process::id()));
    let opts = MissionOptions {
        snapshot_dir: Some(dir.clone()),
        ..MissionOptions::default()
    };
    let (m, _, w) = mission(1, &mut MockLlm::bundled(), &opts);
    assert!(m.success);
    let body = std::fs::read_to_string(&w.pictures[0].path).unwrap();
    assert!(body.contains("chair_1"));
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn jitter_is_reproducible() {
    let reg = default_registry();
    let cfg = BenchConfig {
        jitter_seed: Some(11),
        ..BenchConfig::default()
    };
    let a = run_task(8, true, &cfg, 3, &reg).unwrap();
    let b = run_task(8, true, &cfg, 3, &reg).unwrap();
    assert_eq!(a.c_time, b.c_time);
    let c = run_task(8, true, &cfg, 4, &reg).unwrap();
    assert_ne!(a.c_time, c.c_time);
    assert!(a.success && c.success);
}
