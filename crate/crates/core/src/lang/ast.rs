//! Syntax tree for MiniSpec programs.
//!
//! Composite statements own a [`Body`] that is append-only: the incremental
//! parser pushes statements into it as they arrive and closes it when the
//! matching `}` is seen.

use std::fmt;

/// Byte range into the full plan text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

/// A literal written in plan text. `None` is a runtime-only value and has no
/// literal form.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
}

/// A value-level operand: what may appear as a call argument or after `->`.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Literal(Literal),
    /// `_n`, 1..=99
    Var(u8),
    /// `$n` inside a high-level skill definition, 1..=99
    Positional(u8),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallExpr {
    pub callee: String,
    pub args: Vec<Term>,
}

impl CallExpr {
    pub fn new(callee: impl Into<String>, args: Vec<Term>) -> Self {
        Self {
            callee: callee.into(),
            args,
        }
    }
}

/// Condition operand. Calls are only legal here, never as call arguments.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Term(Term),
    Call(CallExpr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Gt,
    Lt,
    Eq,
    Ne,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Gt => ">",
            Comparator::Lt => "<",
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
        }
    }
}

/// `&` binds tighter than `|`; both chain to the left.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    Compare {
        lhs: Operand,
        op: Comparator,
        rhs: Operand,
    },
    And(Box<Condition>, Box<Condition>),
    Or(Box<Condition>, Box<Condition>),
}

impl Condition {
    pub fn compare(lhs: Operand, op: Comparator, rhs: Operand) -> Self {
        Condition::Compare { lhs, op, rhs }
    }

    /// Every operand of every leaf, left to right.
    pub fn operands(&self) -> Vec<&Operand> {
        let mut out = Vec::new();
        self.collect_operands(&mut out);
        out
    }

    fn collect_operands<'a>(&'a self, out: &mut Vec<&'a Operand>) {
        match self {
            Condition::Compare { lhs, rhs, .. } => {
                out.push(lhs);
                out.push(rhs);
            }
            Condition::And(a, b) | Condition::Or(a, b) => {
                a.collect_operands(out);
                b.collect_operands(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Call(CallExpr),
    Assign { var: u8, call: CallExpr },
    Return(Term),
    Replan,
    Loop { count: u32, body: Body },
    If { cond: Condition, body: Body },
}

impl Statement {
    pub fn is_elementary(&self) -> bool {
        !matches!(self, Statement::Loop { .. } | Statement::If { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot append to a closed body")]
pub struct BodyClosed;

/// Append-only statement list with a closed flag.
///
/// Source spans ride alongside the statements but do not take part in
/// equality, so a reparsed canonical program compares equal to the original.
#[derive(Debug, Clone, Default)]
pub struct Body {
    statements: Vec<Statement>,
    spans: Vec<Span>,
    closed: bool,
}

impl PartialEq for Body {
    fn eq(&self, other: &Self) -> bool {
        self.closed == other.closed && self.statements == other.statements
    }
}

impl Body {
    pub fn new() -> Self {
        Self::default()
    }

    /// A closed body holding `statements`, with empty spans.
    pub fn closed(statements: Vec<Statement>) -> Self {
        let spans = vec![Span::default(); statements.len()];
        Self {
            statements,
            spans,
            closed: true,
        }
    }

    pub fn push(&mut self, statement: Statement, span: Span) -> Result<(), BodyClosed> {
        if self.closed {
            return Err(BodyClosed);
        }
        self.statements.push(statement);
        self.spans.push(span);
        Ok(())
    }

    pub fn close(&mut self) {
        self.closed = true;
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn statements(&self) -> &[Statement] {
        &self.statements
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Statement, Span)> {
        self.statements.iter().zip(self.spans.iter().copied())
    }

    /// True when this body and every nested body are closed.
    pub fn fully_closed(&self) -> bool {
        self.closed
            && self.statements.iter().all(|s| match s {
                Statement::Loop { body, .. } | Statement::If { body, .. } => body.fully_closed(),
                _ => true,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub body: Body,
}

impl Program {
    pub fn new(body: Body) -> Self {
        Self { body }
    }

    pub fn empty() -> Self {
        Self {
            body: Body::closed(Vec::new()),
        }
    }

    pub fn statements(&self) -> &[Statement] {
        self.body.statements()
    }

    /// Highest `$n` index referenced anywhere in the program, 0 if none.
    pub fn max_positional(&self) -> u8 {
        fn term(t: &Term) -> u8 {
            match t {
                Term::Positional(n) => *n,
                _ => 0,
            }
        }
        fn call(c: &CallExpr) -> u8 {
            c.args.iter().map(term).max().unwrap_or(0)
        }
        fn body(b: &Body) -> u8 {
            b.statements()
                .iter()
                .map(|s| match s {
                    Statement::Call(c) | Statement::Assign { call: c, .. } => call(c),
                    Statement::Return(t) => term(t),
                    Statement::Replan => 0,
                    Statement::Loop { body: inner, .. } => body(inner),
                    Statement::If { cond, body: inner } => cond
                        .operands()
                        .into_iter()
                        .map(|o| match o {
                            Operand::Term(t) => term(t),
                            Operand::Call(c) => call(c),
                        })
                        .max()
                        .unwrap_or(0)
                        .max(body(inner)),
                })
                .max()
                .unwrap_or(0)
        }
        body(&self.body)
    }
}
