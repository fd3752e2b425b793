//! Static checks against a skill registry.

use std::collections::HashSet;
use std::fmt;

use super::ast::*;

/// Largest loop count a plan may use.
pub const MAX_LOOP_COUNT: u32 = 100;

/// What the validator needs to know about callable skills.
pub trait SkillLookup {
    /// Declared argument count for a name or abbreviation, `None` if unknown.
    fn arity_of(&self, callee: &str) -> Option<usize>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Error,
    Warning,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Error => "ERROR",
            Level::Warning => "WARNING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    UnknownSkill { name: String },
    ArityMismatch { name: String, expected: usize, got: usize },
    UnboundVariable { var: u8 },
    LoopCountExceeded { count: u32 },
    Syntax,
}

impl DiagnosticKind {
    pub fn code(&self) -> &'static str {
        match self {
            DiagnosticKind::UnknownSkill { .. } => "UNKNOWN_SKILL",
            DiagnosticKind::ArityMismatch { .. } => "ARITY_MISMATCH",
            DiagnosticKind::UnboundVariable { .. } => "UNBOUND_VARIABLE",
            DiagnosticKind::LoopCountExceeded { .. } => "LOOP_COUNT_EXCEEDED",
            DiagnosticKind::Syntax => "SYNTAX_ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub level: Level,
    pub span: Span,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    fn error(span: Span, kind: DiagnosticKind) -> Self {
        let message = match &kind {
            DiagnosticKind::UnknownSkill { name } => format!("unknown skill `{name}`"),
            DiagnosticKind::ArityMismatch {
                name,
                expected,
                got,
            } => format!("{name} expects {expected} got {got}"),
            DiagnosticKind::UnboundVariable { var } => format!("_{var} is read before assignment"),
            DiagnosticKind::LoopCountExceeded { count } => {
                format!("loop count {count} exceeds the cap of {MAX_LOOP_COUNT}")
            }
            DiagnosticKind::Syntax => String::new(),
        };
        Self {
            level: Level::Error,
            span,
            kind,
            message,
        }
    }

    /// Wraps a parse failure so CLI tools can print it in the same format.
    pub fn syntax(position: usize, message: impl Into<String>) -> Self {
        Self {
            level: Level::Error,
            span: Span::new(position, position + 1),
            kind: DiagnosticKind::Syntax,
            message: message.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        self.kind.code()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.level, self.span, self.code(), self.message)
    }
}

/// Checks callees, arities, variable binding order and loop caps.
///
/// Binding is conservative: any assignment earlier in textual order counts,
/// even inside a branch that may not run.
pub fn validate(program: &Program, skills: &dyn SkillLookup) -> Vec<Diagnostic> {
    let mut v = Validator {
        skills,
        bound: HashSet::new(),
        out: Vec::new(),
    };
    v.body(&program.body);
    v.out
}

struct Validator<'a> {
    skills: &'a dyn SkillLookup,
    bound: HashSet<u8>,
    out: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn body(&mut self, body: &Body) {
        for (stmt, span) in body.iter() {
            self.statement(stmt, span);
        }
    }

    fn statement(&mut self, stmt: &Statement, span: Span) {
        match stmt {
            Statement::Call(c) => self.call(c, span),
            Statement::Assign { var, call } => {
                self.call(call, span);
                self.bound.insert(*var);
            }
            Statement::Return(t) => self.term(t, span),
            Statement::Replan => {}
            Statement::Loop { count, body } => {
                if *count > MAX_LOOP_COUNT {
                    self.out.push(Diagnostic::error(
                        span,
                        DiagnosticKind::LoopCountExceeded { count: *count },
                    ));
                }
                self.body(body);
            }
            Statement::If { cond, body } => {
                for op in cond.operands() {
                    match op {
                        Operand::Term(t) => self.term(t, span),
                        Operand::Call(c) => self.call(c, span),
                    }
                }
                self.body(body);
            }
        }
    }

    fn call(&mut self, call: &CallExpr, span: Span) {
        for a in &call.args {
            self.term(a, span);
        }
        match self.skills.arity_of(&call.callee) {
            None => self.out.push(Diagnostic::error(
                span,
                DiagnosticKind::UnknownSkill {
                    name: call.callee.clone(),
                },
            )),
            Some(expected) if expected != call.args.len() => self.out.push(Diagnostic::error(
                span,
                DiagnosticKind::ArityMismatch {
                    name: call.callee.clone(),
                    expected,
                    got: call.args.len(),
                },
            )),
            Some(_) => {}
        }
    }

    fn term(&mut self, term: &Term, span: Span) {
        if let Term::Var(n) = term {
            if !self.bound.contains(n) {
                self.out.push(Diagnostic::error(
                    span,
                    DiagnosticKind::UnboundVariable { var: *n },
                ));
            }
        }
    }
}
