//! Plan execution, batch and streamed.

use std::collections::HashMap;
use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::coerce::compare;
use super::control::{Policy, RunControl};
use super::io::{Feed, RunIo};
use super::trace::{ExecutionTrace, TraceRecord, TraceResult};
use crate::events::EventKind;
use crate::lang::{
    call_text, condition_text, statement_text, Body, CallExpr, Condition, Operand, Program, Statement,
    Term, UnitKind, Value, MAX_LOOP_COUNT,
};
use crate::skills::{coerce_args, Backend, HighLevelSkill, SkillRef, SkillRegistry};

pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanReason {
    ExplicitStatement,
    SyntaxError,
    SkillFault,
    PolicyTrigger,
}

impl ReplanReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ReplanReason::ExplicitStatement => "explicit_statement",
            ReplanReason::SyntaxError => "syntax_error",
            ReplanReason::SkillFault => "skill_fault",
            ReplanReason::PolicyTrigger => "policy_trigger",
        }
    }
}

impl fmt::Display for ReplanReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Errors that fail the mission outright instead of replanning.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuntimeError {
    #[error("unbound variable _{0}")]
    UnboundVariable(u8),
    #[error("missing positional argument ${0}")]
    MissingPositionalArg(u8),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error("step budget of {0} exceeded")]
    StepBudget(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stop {
    Replan { reason: ReplanReason, detail: String },
    Aborted,
    Error(RuntimeError),
}

impl Stop {
    fn replan(reason: ReplanReason, detail: impl Into<String>) -> Self {
        Stop::Replan {
            reason,
            detail: detail.into(),
        }
    }

    fn label(&self) -> String {
        match self {
            Stop::Replan { reason, .. } => format!("replan:{reason}"),
            Stop::Aborted => "aborted".into(),
            Stop::Error(e) => format!("error:{e}"),
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum ExecOutcome {
    /// Ran to the end or hit a top-level return.
    Completed(Value),
    ReplanRequested { reason: ReplanReason, detail: String },
    Aborted,
    RuntimeError(RuntimeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub outcome: ExecOutcome,
    pub trace: ExecutionTrace,
    /// Clock reading when the first low-level skill was dispatched.
    pub first_dispatch: Option<Duration>,
    pub steps: u64,
}

enum Flow {
    Continue,
    Return(Value),
    Stop(Stop),
}

#[derive(Default)]
struct Frame {
    vars: HashMap<u8, Value>,
    positional: Vec<Value>,
}

/// Runs statements against a registry and a backend.
///
/// Trace records cover elementary statements and condition evaluations at
/// every skill depth. Start times are non-decreasing.
pub struct Executor<'r> {
    registry: &'r SkillRegistry,
    backend: &'r mut dyn Backend,
    ctl: &'r RunControl,
    io: &'r mut dyn RunIo,
    trace: ExecutionTrace,
    steps: u64,
    step_budget: u64,
    rotation: f64,
    forward: f64,
    first_dispatch: Option<Duration>,
    policy: Option<Policy>,
}

impl<'r> Executor<'r> {
    pub fn new(
        registry: &'r SkillRegistry,
        backend: &'r mut dyn Backend,
        ctl: &'r RunControl,
        io: &'r mut dyn RunIo,
    ) -> Self {
        Self {
            registry,
            backend,
            ctl,
            io,
            trace: ExecutionTrace::default(),
            steps: 0,
            step_budget: DEFAULT_STEP_BUDGET,
            rotation: 0.0,
            forward: 0.0,
            first_dispatch: None,
            policy: None,
        }
    }

    /// Overrides the policy carried by the run control.
    pub fn with_policy(mut self, policy: Policy) -> Self {
        self.policy = Some(policy);
        self
    }

    pub fn with_step_budget(mut self, budget: u64) -> Self {
        self.step_budget = budget;
        self
    }

    /// Executes a fully parsed plan.
    pub fn run_program(mut self, program: &Program) -> RunResult {
        let mut frame = Frame::default();
        let flow = self.exec_body(&program.body, &mut frame, 0);
        self.finish(flow)
    }

    /// Executes units as the parser produces them.
    pub fn run_stream(mut self) -> RunResult {
        let mut frame = Frame::default();
        let flow = self.stream_top(&mut frame);
        self.finish(flow)
    }

    fn finish(self, flow: Flow) -> RunResult {
        let outcome = match flow {
            Flow::Continue => ExecOutcome::Completed(Value::None),
            Flow::Return(v) => ExecOutcome::Completed(v),
            Flow::Stop(Stop::Replan { reason, detail }) => ExecOutcome::ReplanRequested { reason, detail },
            Flow::Stop(Stop::Aborted) => ExecOutcome::Aborted,
            Flow::Stop(Stop::Error(e)) => ExecOutcome::RuntimeError(e),
        };
        RunResult {
            outcome,
            trace: self.trace,
            first_dispatch: self.first_dispatch,
            steps: self.steps,
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        self.steps += 1;
        if self.steps > self.step_budget {
            return Err(Stop::Error(RuntimeError::StepBudget(self.step_budget)));
        }
        if self.ctl.is_aborted() {
            return Err(Stop::Aborted);
        }
        Ok(())
    }

    /// Runs `f` inside a trace record with start/finish events.
    fn recorded<F>(&mut self, text: String, depth: usize, f: F) -> Result<Value, Stop>
    where
        F: FnOnce(&mut Self) -> Result<Value, Stop>,
    {
        let started = self.io.now();
        self.io.emit(EventKind::StatementStarted {
            text: text.clone(),
            depth,
        });
        let out = f(self);
        let result = match &out {
            Ok(v) => TraceResult::Value(v.clone()),
            Err(s) => TraceResult::Stopped(s.label()),
        };
        self.io.emit(EventKind::StatementFinished {
            text: text.clone(),
            depth,
            result: result.to_string(),
        });
        self.trace.records.push(TraceRecord {
            text,
            depth,
            started,
            finished: self.io.now(),
            result,
        });
        out
    }

    fn exec_body(&mut self, body: &Body, frame: &mut Frame, depth: usize) -> Flow {
        for stmt in body.statements() {
            match self.exec_stmt(stmt, frame, depth) {
                Flow::Continue => {}
                other => return other,
            }
        }
        Flow::Continue
    }

    fn exec_stmt(&mut self, stmt: &Statement, frame: &mut Frame, depth: usize) -> Flow {
        if let Err(s) = self.tick() {
            return Flow::Stop(s);
        }
        let done = |r: Result<Value, Stop>| match r {
            Ok(_) => Flow::Continue,
            Err(s) => Flow::Stop(s),
        };
        match stmt {
            Statement::Call(call) => done(self.recorded(statement_text(stmt), depth, |ex| ex.call(call, frame, depth))),
            Statement::Assign { var, call } => {
                let r = self.recorded(statement_text(stmt), depth, |ex| ex.call(call, frame, depth));
                if let Ok(v) = &r {
                    frame.vars.insert(*var, v.clone());
                }
                done(r)
            }
            Statement::Return(term) => {
                match self.recorded(statement_text(stmt), depth, |ex| ex.eval_term(term, frame)) {
                    Ok(v) => Flow::Return(v),
                    Err(s) => Flow::Stop(s),
                }
            }
            Statement::Replan => {
                let r = self.recorded(statement_text(stmt), depth, |_| {
                    Err(Stop::replan(ReplanReason::ExplicitStatement, "plan requested a replan"))
                });
                done(r)
            }
            Statement::Loop { count, body } => {
                if let Err(s) = self.check_loop(*count) {
                    return Flow::Stop(s);
                }
                for _ in 0..*count {
                    match self.exec_body(body, frame, depth) {
                        Flow::Continue => {}
                        other => return other,
                    }
                }
                Flow::Continue
            }
            Statement::If { cond, body } => match self.eval_condition_recorded(cond, frame, depth) {
                Ok(true) => self.exec_body(body, frame, depth),
                Ok(false) => Flow::Continue,
                Err(s) => Flow::Stop(s),
            },
        }
    }

    fn check_loop(&self, count: u32) -> Result<(), Stop> {
        if count > MAX_LOOP_COUNT {
            return Err(Stop::replan(
                ReplanReason::SyntaxError,
                format!("loop count {count} exceeds {MAX_LOOP_COUNT}"),
            ));
        }
        Ok(())
    }

    fn eval_condition_recorded(&mut self, cond: &Condition, frame: &mut Frame, depth: usize) -> Result<bool, Stop> {
        let text = format!("?{}", condition_text(cond));
        self.recorded(text, depth, |ex| ex.eval_condition(cond, frame, depth).map(Value::Bool))
            .map(|v| v == Value::Bool(true))
    }

    fn eval_condition(&mut self, cond: &Condition, frame: &mut Frame, depth: usize) -> Result<bool, Stop> {
        match cond {
            Condition::Compare { lhs, op, rhs } => {
                let a = self.eval_operand(lhs, frame, depth)?;
                let b = self.eval_operand(rhs, frame, depth)?;
                compare(&a, *op, &b).map_err(|e| Stop::Error(RuntimeError::TypeMismatch(e.to_string())))
            }
            Condition::And(a, b) => Ok(self.eval_condition(a, frame, depth)? && self.eval_condition(b, frame, depth)?),
            Condition::Or(a, b) => Ok(self.eval_condition(a, frame, depth)? || self.eval_condition(b, frame, depth)?),
        }
    }

    fn eval_operand(&mut self, op: &Operand, frame: &mut Frame, depth: usize) -> Result<Value, Stop> {
        match op {
            Operand::Term(t) => self.eval_term(t, frame),
            Operand::Call(c) => self.call(c, frame, depth),
        }
    }

    fn eval_term(&self, term: &Term, frame: &Frame) -> Result<Value, Stop> {
        match term {
            Term::Literal(l) => Ok(Value::from(l)),
            Term::Var(n) => frame
                .vars
                .get(n)
                .cloned()
                .ok_or(Stop::Error(RuntimeError::UnboundVariable(*n))),
            Term::Positional(n) => frame
                .positional
                .get(usize::from(*n).wrapping_sub(1))
                .cloned()
                .ok_or(Stop::Error(RuntimeError::MissingPositionalArg(*n))),
        }
    }

    fn call(&mut self, call: &CallExpr, frame: &mut Frame, depth: usize) -> Result<Value, Stop> {
        if self.ctl.is_aborted() {
            return Err(Stop::Aborted);
        }
        let registry = self.registry;
        let Some(skill) = registry.resolve(&call.callee) else {
            return Err(Stop::replan(
                ReplanReason::SyntaxError,
                format!("unknown skill `{}` in {}", call.callee, call_text(call)),
            ));
        };
        let mut args = Vec::with_capacity(call.args.len());
        for t in &call.args {
            args.push(self.eval_term(t, frame)?);
        }
        let args = coerce_args(skill.name(), skill.args(), args)
            .map_err(|e| Stop::replan(ReplanReason::SyntaxError, e.to_string()))?;
        match skill {
            SkillRef::Low(low) => self.dispatch(&low.callable, &args),
            SkillRef::High(high) => self.call_high(high, args, depth + 1),
        }
    }

    fn dispatch(&mut self, callable: &str, args: &[Value]) -> Result<Value, Stop> {
        let start = self.io.now();
        self.first_dispatch.get_or_insert(start);
        let mut inv = self.backend.invoke(callable, args);
        inv.events.sort_by_key(|(off, _)| *off);
        for (off, kind) in inv.events {
            self.io.advance_to(start + off);
            self.io.emit(kind);
        }
        self.io.advance_to(start + inv.duration);
        self.rotation += inv.motion.rotation_deg;
        self.forward += inv.motion.forward_cm;
        let value = inv.result.map_err(|e| Stop::replan(ReplanReason::SkillFault, e))?;
        let policy = self.policy.unwrap_or_else(|| self.ctl.policy());
        if policy.enabled && (self.rotation > policy.max_rotation_deg || self.forward > policy.max_forward_cm) {
            return Err(Stop::replan(
                ReplanReason::PolicyTrigger,
                format!(
                    "motion budget exceeded: rotated {:.0} deg, moved forward {:.0} cm",
                    self.rotation, self.forward
                ),
            ));
        }
        Ok(value)
    }

    fn call_high(&mut self, skill: &HighLevelSkill, args: Vec<Value>, depth: usize) -> Result<Value, Stop> {
        let mut frame = Frame {
            vars: HashMap::new(),
            positional: args,
        };
        match self.exec_body(&skill.definition.body, &mut frame, depth) {
            Flow::Continue => Ok(Value::None),
            Flow::Return(v) => Ok(v),
            Flow::Stop(s) => Err(s),
        }
    }

    fn stream_top(&mut self, frame: &mut Frame) -> Flow {
        loop {
            let flow = match self.io.next_unit(self.ctl) {
                Feed::Unit(u) => match u.kind {
                    UnitKind::Statement(s) => self.exec_stmt(&s, frame, 0),
                    UnitKind::LoopHeader { count } => self.stream_loop(count, frame, true).0,
                    UnitKind::IfHeader { cond } => self.stream_if(&cond, frame, true).0,
                    UnitKind::BodyClose => Flow::Stop(Stop::replan(ReplanReason::SyntaxError, "unmatched `}`")),
                },
                Feed::End => return Flow::Continue,
                Feed::Failed(e) => return Flow::Stop(Stop::replan(ReplanReason::SyntaxError, e.to_string())),
                Feed::Aborted => return Flow::Stop(Stop::Aborted),
            };
            if !matches!(flow, Flow::Continue) {
                return flow;
            }
        }
    }

    /// Consumes units up to the matching close, collecting them into `into`.
    /// Units are executed on arrival only when `execute` is set.
    fn stream_block(&mut self, frame: &mut Frame, execute: bool, into: &mut Body) -> Flow {
        loop {
            let unit = match self.io.next_unit(self.ctl) {
                Feed::Unit(u) => u,
                Feed::End => {
                    return Flow::Stop(Stop::replan(ReplanReason::SyntaxError, "plan ended inside an open block"))
                }
                Feed::Failed(e) => return Flow::Stop(Stop::replan(ReplanReason::SyntaxError, e.to_string())),
                Feed::Aborted => return Flow::Stop(Stop::Aborted),
            };
            let span = unit.span;
            let (flow, stmt) = match unit.kind {
                UnitKind::Statement(s) => {
                    let flow = if execute {
                        self.exec_stmt(&s, frame, 0)
                    } else {
                        Flow::Continue
                    };
                    (flow, Some(s))
                }
                UnitKind::LoopHeader { count } => self.stream_loop(count, frame, execute),
                UnitKind::IfHeader { cond } => self.stream_if(&cond, frame, execute),
                UnitKind::BodyClose => {
                    into.close();
                    return Flow::Continue;
                }
            };
            if let Some(s) = stmt {
                // Bodies are only closed by us, so pushing cannot fail.
                let _ = into.push(s, span);
            }
            if !matches!(flow, Flow::Continue) {
                return flow;
            }
        }
    }

    /// First pass runs as units arrive; later passes re-run the recorded body.
    fn stream_loop(&mut self, count: u32, frame: &mut Frame, execute: bool) -> (Flow, Option<Statement>) {
        if execute {
            if let Err(s) = self.tick().and_then(|_| self.check_loop(count)) {
                return (Flow::Stop(s), None);
            }
        }
        let mut body = Body::new();
        let first = self.stream_block(frame, execute && count > 0, &mut body);
        if !matches!(first, Flow::Continue) {
            return (first, None);
        }
        if execute {
            for _ in 1..count {
                match self.exec_body(&body, frame, 0) {
                    Flow::Continue => {}
                    other => return (other, None),
                }
            }
        }
        (Flow::Continue, Some(Statement::Loop { count, body }))
    }

    fn stream_if(&mut self, cond: &Condition, frame: &mut Frame, execute: bool) -> (Flow, Option<Statement>) {
        let take = if execute {
            if let Err(s) = self.tick() {
                return (Flow::Stop(s), None);
            }
            match self.eval_condition_recorded(cond, frame, 0) {
                Ok(b) => b,
                Err(s) => return (Flow::Stop(s), None),
            }
        } else {
            false
        };
        let mut body = Body::new();
        let flow = self.stream_block(frame, take, &mut body);
        if !matches!(flow, Flow::Continue) {
            return (flow, None);
        }
        (
            Flow::Continue,
            Some(Statement::If {
                cond: cond.clone(),
                body,
            }),
        )
    }
}
