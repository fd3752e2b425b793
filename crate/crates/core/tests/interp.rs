use std::time::Duration;

use minispec::events::{EventKind, EventLog};
use minispec::interp::{
    spawn_producer, ExecOutcome, Executor, MissionClock, Policy, ReplanReason, RunControl, RunResult, RuntimeError,
    StreamIo, TimedToken, Timeline,
};
use minispec::lang::{parse_program, ParseMode, Value};
use minispec::sim::{load_world, SimBackend, WorldState};
use minispec::skills::{default_registry, Backend, Invocation};

fn world() -> WorldState {
    load_world(
        r#"{"id":"w","drone":{"x":0,"y":0,"z":100,"yaw":0},"objects":[
            {"name":"apple","id":1,"pos":[120,200,100],"extent":[10,10],"color":"red"},
            {"name":"bottle","id":2,"pos":[0,-300,100],"extent":[8,25],"color":"green"}]}"#,
    )
    .unwrap()
}

fn batch(plan: &str, ctl: &RunControl) -> (RunResult, EventLog, WorldState) {
    let reg = default_registry();
    let program = parse_program(plan, ParseMode::Plan).unwrap();
    let mut w = world();
    let mut log = EventLog::new();
    let result = {
        let mut backend = SimBackend::new(&mut w);
        let mut tl = Timeline::new(MissionClock::sim(), &mut log);
        Executor::new(&reg, &mut backend, ctl, &mut tl).run_program(&program)
    };
    (result, log, w)
}

fn tokens(plan: &str, per_token_ms: u64) -> Vec<TimedToken> {
    // Three characters per token is enough to split lexemes across chunks.
    let chars: Vec<char> = plan.chars().collect();
    chars
        .chunks(3)
        .enumerate()
        .map(|(i, c)| TimedToken::new(Duration::from_millis(per_token_ms * (i as u64 + 1)), c.iter().collect::<String>()))
        .collect()
}

fn stream(plan: &str, ctl: &RunControl) -> (RunResult, EventLog, WorldState) {
    let reg = default_registry();
    let mut w = world();
    let mut log = EventLog::new();
    let (rx, handle) = spawn_producer(tokens(plan, 100), ParseMode::Plan);
    let result = {
        let mut backend = SimBackend::new(&mut w);
        let mut tl = Timeline::new(MissionClock::sim(), &mut log);
        let mut io = StreamIo::new(&mut tl, rx, 0);
        Executor::new(&reg, &mut backend, ctl, &mut io).run_stream()
    };
    handle.join().unwrap();
    (result, log, w)
}

const PLANS: &[&str] = &[
    "tc(90);mf(50)",
    "?iv('apple')==True{l('yes')}tc(45);l('done')",
    "8{?iv('apple')==True{->True}tc(45)}->False",
    "s('apple');g('bottle')",
    "_1=sa('anything');?_1!=False{l(_1)};l('x')",
    "3{tc(30);2{tu(10)}};?ox('apple')>0.5|iv('bottle')==True{p()}",
    "tc(180);rp;mf(10)",
    "l(_3)",
];

#[test]
fn stream_and_batch_traces_match() {
    for plan in PLANS {
        let ctl = RunControl::new();
        let (b, _, wb) = batch(plan, &ctl);
        let (s, _, ws) = stream(plan, &ctl);
        assert_eq!(b.trace.steps(), s.trace.steps(), "{plan}");
        assert_eq!(b.outcome, s.outcome, "{plan}");
        assert_eq!(wb.drone, ws.drone, "{plan}");
        assert!(!b.trace.is_empty(), "{plan}");
    }
}

#[test]
fn streaming_starts_before_text_ends() {
    let plan = "tc(90);mf(50);l('a');l('b');l('c')";
    let (s, _, _) = stream(plan, &RunControl::new());
    // "tc(90);" completes on the third 3-char token.
    assert_eq!(s.first_dispatch, Some(Duration::from_millis(300)));
    let (b, _, _) = batch(plan, &RunControl::new());
    assert_eq!(b.first_dispatch, Some(Duration::ZERO));
}

#[test]
fn stream_event_timestamps_are_monotone() {
    for plan in PLANS {
        let (_, log, _) = stream(plan, &RunControl::new());
        let ats: Vec<f64> = log.events().iter().map(|e| e.at_ms).collect();
        assert!(ats.windows(2).all(|w| w[0] <= w[1]), "{plan}: {ats:?}");
        let kinds = log.kinds();
        assert!(kinds.contains(&"token_received") && kinds.contains(&"unit_parsed"));
    }
}

#[test]
fn scan_finds_object_after_turning() {
    let (r, _, w) = batch("_1=s('bottle');->_1", &RunControl::new());
    assert_eq!(r.outcome, ExecOutcome::Completed(Value::Bool(true)));
    assert_eq!(w.drone.yaw, 180.0);
    let depths: Vec<usize> = r.trace.records.iter().map(|t| t.depth).collect();
    assert!(depths.contains(&1));
}

#[test]
fn replan_statement_stops_with_no_later_dispatch() {
    let (r, _, w) = batch("tc(180);rp;mf(10)", &RunControl::new());
    assert_eq!(
        r.outcome,
        ExecOutcome::ReplanRequested {
            reason: ReplanReason::ExplicitStatement,
            detail: "plan requested a replan".into()
        }
    );
    assert_eq!(r.trace.records.last().unwrap().text, "rp");
    assert_eq!(w.drone.y, 0.0);
}

#[test]
fn error_mapping() {
    let ctl = RunControl::new();
    let reason = |plan: &str| match batch(plan, &ctl).0.outcome {
        ExecOutcome::ReplanRequested { reason, .. } => Some(reason),
        _ => None,
    };
    assert_eq!(reason("zz(1)"), Some(ReplanReason::SyntaxError));
    assert_eq!(reason("tc(1,2)"), Some(ReplanReason::SyntaxError));
    assert_eq!(reason("tc('x')"), Some(ReplanReason::SyntaxError));
    assert_eq!(reason("101{l('x')}"), Some(ReplanReason::SyntaxError));
    assert_eq!(reason("ox('ghost')"), Some(ReplanReason::SkillFault));
    assert_eq!(reason("q('anything?')"), Some(ReplanReason::SkillFault));
    assert_eq!(
        batch("l(_2)", &ctl).0.outcome,
        ExecOutcome::RuntimeError(RuntimeError::UnboundVariable(2))
    );
    assert!(matches!(
        batch("?l('a')>1{l('b')}", &ctl).0.outcome,
        ExecOutcome::RuntimeError(RuntimeError::TypeMismatch(_))
    ));
}

#[test]
fn policy_trigger_is_cumulative_and_opt_in() {
    let plan = "tc(90);tc(90);tc(10);l('after')";
    assert!(matches!(batch(plan, &RunControl::new()).0.outcome, ExecOutcome::Completed(_)));
    let ctl = RunControl::with_policy(Policy::enabled());
    let (r, _, w) = batch(plan, &ctl);
    assert!(matches!(
        r.outcome,
        ExecOutcome::ReplanRequested {
            reason: ReplanReason::PolicyTrigger,
            ..
        }
    ));
    assert_eq!(w.drone.yaw, 190.0);
    assert!(!w.log.iter().any(|l| l == "after"));
}

#[test]
fn short_circuit_skips_right_operand() {
    let (r, _, w) = batch("?iv('ghost')==True&l('rhs')==True{l('body')}", &RunControl::new());
    assert!(matches!(r.outcome, ExecOutcome::Completed(_)));
    assert!(w.log.is_empty());
    let (_, _, w) = batch("?iv('apple')==True|l('rhs')==True{l('body')}", &RunControl::new());
    assert_eq!(w.log, vec!["body"]);
}

#[test]
fn step_budget() {
    let reg = default_registry();
    let program = parse_program("100{100{100{ d(0) }}}", ParseMode::Plan).unwrap();
    let mut w = world();
    let mut backend = SimBackend::new(&mut w);
    let mut log = EventLog::new();
    let mut tl = Timeline::new(MissionClock::sim(), &mut log);
    let ctl = RunControl::new();
    let r = Executor::new(&reg, &mut backend, &ctl, &mut tl)
        .with_step_budget(5000)
        .run_program(&program);
    assert_eq!(r.outcome, ExecOutcome::RuntimeError(RuntimeError::StepBudget(5000)));
}

/// Backend that aborts the run on its n-th dispatch.
struct AbortAfter<'a> {
    ctl: &'a RunControl,
    left: usize,
}

impl Backend for AbortAfter<'_> {
    fn invoke(&mut self, _callable: &str, _args: &[Value]) -> Invocation {
        self.left -= 1;
        if self.left == 0 {
            self.ctl.abort();
        }
        Invocation::ok(true, Duration::from_millis(10))
    }
}

#[test]
fn abort_lets_current_skill_finish_then_stops() {
    let reg = default_registry();
    let program = parse_program("8{tc(10);tc(10)}", ParseMode::Plan).unwrap();
    let ctl = RunControl::new();
    let mut backend = AbortAfter { ctl: &ctl, left: 5 };
    let mut log = EventLog::new();
    let mut tl = Timeline::new(MissionClock::sim(), &mut log);
    let r = Executor::new(&reg, &mut backend, &ctl, &mut tl).run_program(&program);
    assert_eq!(r.outcome, ExecOutcome::Aborted);
    assert_eq!(r.trace.len(), 5);
    let started = log.kinds().iter().filter(|k| **k == "statement_started").count();
    let finished = log.kinds().iter().filter(|k| **k == "statement_finished").count();
    assert_eq!(started, finished);
    assert!(log.events().iter().all(|e| !matches!(e.kind, EventKind::MissionDone { .. })));
}
