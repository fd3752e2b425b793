//! Incremental parser producing executable units.
//!
//! An elementary statement is emitted when its terminator is seen: `;`, the
//! `}` of its enclosing body, end of stream, or the first lexeme of the next
//! statement (models sometimes omit the `;`, e.g. `g('apple')->True`).
//! Composite statements are emitted as headers as soon as `{` arrives; their
//! bodies follow as ordinary units and end with [`UnitKind::BodyClose`].

use super::ast::*;
use super::lexer::{LexError, Lexeme, LexemeKind, Lexer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Plan,
    /// Permits `$n` references and the `name,arg` call form.
    SkillDefinition,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("parse error at byte {position}: expected {}, found {found}", expected.join(" or "))]
    Unexpected {
        position: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    #[error("parse error at byte {position}: unexpected end of plan, expected {}", expected.join(" or "))]
    UnexpectedEnd {
        position: usize,
        expected: Vec<&'static str>,
    },
    /// A `$n` reference outside a skill definition.
    #[error("positional reference {text} at byte {position} is only allowed in skill definitions")]
    PositionalRefOutsidePlan { position: usize, text: String },
    #[error("loop count at byte {position} must be a positive integer")]
    BadLoopCount { position: usize },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Lex(e) => e.position,
            ParseError::Unexpected { position, .. }
            | ParseError::UnexpectedEnd { position, .. }
            | ParseError::PositionalRefOutsidePlan { position, .. }
            | ParseError::BadLoopCount { position } => *position,
        }
    }

    pub fn expected(&self) -> &[&'static str] {
        match self {
            ParseError::Unexpected { expected, .. } | ParseError::UnexpectedEnd { expected, .. } => {
                expected
            }
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum UnitKind {
    /// Call, Assign, Return or Replan.
    Statement(Statement),
    LoopHeader { count: u32 },
    IfHeader { cond: Condition },
    BodyClose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutableUnit {
    pub kind: UnitKind,
    pub span: Span,
}

enum Header {
    Loop(u32),
    If(Condition),
}

struct OpenBlock {
    header: Header,
    body: Body,
    start: usize,
}

enum Stop {
    Incomplete,
    Error(ParseError),
}

impl From<ParseError> for Stop {
    fn from(e: ParseError) -> Self {
        Stop::Error(e)
    }
}

type Step<T> = Result<T, Stop>;

/// Lexer plus statement assembler. Single owner; feed chunks in order.
pub struct IncrementalParser {
    mode: ParseMode,
    lexer: Lexer,
    pending: Vec<Lexeme>,
    stack: Vec<OpenBlock>,
    root: Body,
    /// Set right after `}` so one optional `;` may follow a composite.
    after_close: bool,
    error: Option<ParseError>,
    finished: bool,
}

impl IncrementalParser {
    pub fn new(mode: ParseMode) -> Self {
        Self {
            mode,
            lexer: Lexer::new(),
            pending: Vec::new(),
            stack: Vec::new(),
            root: Body::new(),
            after_close: false,
            error: None,
            finished: false,
        }
    }

    pub fn mode(&self) -> ParseMode {
        self.mode
    }

    /// Bytes of plan text received so far.
    pub fn fed(&self) -> usize {
        self.lexer.fed()
    }

    pub fn error(&self) -> Option<&ParseError> {
        self.error.as_ref()
    }

    /// Open composite depth.
    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    pub fn feed(&mut self, chunk: &str) -> Result<Vec<ExecutableUnit>, ParseError> {
        self.check()?;
        let lexemes = self.lexer.feed(chunk).map_err(|e| self.poison(e.into()))?;
        self.feed_lexemes(lexemes)
    }

    /// Accepts already-lexed input. Mixing with [`feed`](Self::feed) is fine
    /// as long as the lexemes come from the same text in order.
    pub fn feed_lexemes(
        &mut self,
        lexemes: impl IntoIterator<Item = Lexeme>,
    ) -> Result<Vec<ExecutableUnit>, ParseError> {
        self.check()?;
        self.pending.extend(lexemes);
        self.advance(false)
    }

    pub fn finish(&mut self) -> Result<Vec<ExecutableUnit>, ParseError> {
        self.check()?;
        let tail = self.lexer.finish().map_err(|e| self.poison(e.into()))?;
        self.pending.extend(tail);
        let units = self.advance(true)?;
        self.finished = true;
        if !self.stack.is_empty() {
            let position = self.lexer.fed();
            return Err(self.poison(ParseError::UnexpectedEnd {
                position,
                expected: vec!["`}`"],
            }));
        }
        self.root.close();
        Ok(units)
    }

    /// The program parsed so far. Bodies still open are included unclosed.
    pub fn snapshot(&self) -> Program {
        let mut body = self.root.clone();
        let mut tail: Option<(Statement, Span)> = None;
        for block in self.stack.iter().rev() {
            let mut inner = block.body.clone();
            if let Some((s, sp)) = tail.take() {
                let _ = inner.push(s, sp);
            }
            let stmt = block_statement(&block.header, inner);
            tail = Some((stmt, Span::new(block.start, self.lexer.fed())));
        }
        if let Some((s, sp)) = tail {
            let _ = body.push(s, sp);
        }
        Program::new(body)
    }

    /// The completed program; only valid after a successful [`finish`](Self::finish).
    pub fn into_program(self) -> Result<Program, ParseError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        if !self.finished {
            return Err(ParseError::UnexpectedEnd {
                position: self.lexer.fed(),
                expected: vec!["end of plan"],
            });
        }
        Ok(Program::new(self.root))
    }

    fn check(&self) -> Result<(), ParseError> {
        match &self.error {
            Some(e) => Err(e.clone()),
            None => Ok(()),
        }
    }

    fn poison(&mut self, e: ParseError) -> ParseError {
        self.error = Some(e.clone());
        e
    }

    fn advance(&mut self, eof: bool) -> Result<Vec<ExecutableUnit>, ParseError> {
        let mut out = Vec::new();
        while !self.pending.is_empty() {
            let attempt = {
                let mut cur = Cursor {
                    lexemes: &self.pending,
                    pos: 0,
                    eof,
                    mode: self.mode,
                };
                next_unit(&mut cur, self.after_close, !self.stack.is_empty())
                    .map(|parsed| (parsed, cur.pos))
            };
            match attempt {
                Ok((parsed, consumed)) => {
                    self.pending.drain(..consumed);
                    if let Some(unit) = self.apply(parsed)? {
                        out.push(unit);
                    }
                }
                Err(Stop::Incomplete) => break,
                Err(Stop::Error(e)) => return Err(self.poison(e)),
            }
        }
        Ok(out)
    }

    fn apply(&mut self, parsed: Parsed) -> Result<Option<ExecutableUnit>, ParseError> {
        self.after_close = false;
        let unit = match parsed {
            Parsed::SkipSemi => return Ok(None),
            Parsed::Elementary(stmt, span) => {
                self.current_body()
                    .push(stmt.clone(), span)
                    .expect("open body");
                ExecutableUnit {
                    kind: UnitKind::Statement(stmt),
                    span,
                }
            }
            Parsed::Loop(count, span) => {
                self.stack.push(OpenBlock {
                    header: Header::Loop(count),
                    body: Body::new(),
                    start: span.start,
                });
                ExecutableUnit {
                    kind: UnitKind::LoopHeader { count },
                    span,
                }
            }
            Parsed::If(cond, span) => {
                self.stack.push(OpenBlock {
                    header: Header::If(cond.clone()),
                    body: Body::new(),
                    start: span.start,
                });
                ExecutableUnit {
                    kind: UnitKind::IfHeader { cond },
                    span,
                }
            }
            Parsed::Close(span) => {
                let mut block = self.stack.pop().expect("close only parsed with open block");
                block.body.close();
                let stmt = block_statement(&block.header, block.body);
                self.current_body()
                    .push(stmt, Span::new(block.start, span.end))
                    .expect("open body");
                self.after_close = true;
                ExecutableUnit {
                    kind: UnitKind::BodyClose,
                    span,
                }
            }
        };
        Ok(Some(unit))
    }

    fn current_body(&mut self) -> &mut Body {
        match self.stack.last_mut() {
            Some(b) => &mut b.body,
            None => &mut self.root,
        }
    }
}

fn block_statement(header: &Header, body: Body) -> Statement {
    match header {
        Header::Loop(count) => Statement::Loop {
            count: *count,
            body,
        },
        Header::If(cond) => Statement::If {
            cond: cond.clone(),
            body,
        },
    }
}

/// Parses a complete text.
pub fn parse_program(text: &str, mode: ParseMode) -> Result<Program, ParseError> {
    let mut parser = IncrementalParser::new(mode);
    parser.feed(text)?;
    parser.finish()?;
    parser.into_program()
}

/// Parses a complete text and returns every unit in emission order.
pub fn parse_units(text: &str, mode: ParseMode) -> Result<Vec<ExecutableUnit>, ParseError> {
    let mut parser = IncrementalParser::new(mode);
    let mut units = parser.feed(text)?;
    units.extend(parser.finish()?);
    Ok(units)
}

enum Parsed {
    Elementary(Statement, Span),
    Loop(u32, Span),
    If(Condition, Span),
    Close(Span),
    SkipSemi,
}

struct Cursor<'a> {
    lexemes: &'a [Lexeme],
    pos: usize,
    eof: bool,
    mode: ParseMode,
}

const STATEMENT_START: &[&str] = &[
    "skill call",
    "variable",
    "`->`",
    "`replan`",
    "`?`",
    "loop count",
];

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Lexeme> {
        self.lexemes.get(self.pos)
    }

    /// Next lexeme, or Incomplete / UnexpectedEnd when input runs out.
    fn need(&self, expected: &[&'static str]) -> Step<&'a Lexeme> {
        match self.peek() {
            Some(l) => Ok(l),
            None if !self.eof => Err(Stop::Incomplete),
            None => Err(Stop::Error(ParseError::UnexpectedEnd {
                position: self.end_position(),
                expected: expected.to_vec(),
            })),
        }
    }

    fn end_position(&self) -> usize {
        self.lexemes.last().map(|l| l.span.end).unwrap_or(0)
    }

    fn bump(&mut self) -> &'a Lexeme {
        let l = &self.lexemes[self.pos];
        self.pos += 1;
        l
    }

    fn expect(&mut self, kind: LexemeKind, what: &'static str) -> Step<&'a Lexeme> {
        let l = self.need(&[what])?;
        if l.kind == kind {
            Ok(self.bump())
        } else {
            Err(unexpected(l, &[what]))
        }
    }
}

fn unexpected(l: &Lexeme, expected: &[&'static str]) -> Stop {
    Stop::Error(ParseError::Unexpected {
        position: l.span.start,
        found: format!("`{}`", l.text),
        expected: expected.to_vec(),
    })
}

fn is_statement_start(kind: LexemeKind) -> bool {
    matches!(
        kind,
        LexemeKind::Ident
            | LexemeKind::Var
            | LexemeKind::Arrow
            | LexemeKind::Replan
            | LexemeKind::QMark
            | LexemeKind::Int
    )
}

fn next_unit(cur: &mut Cursor<'_>, after_close: bool, in_block: bool) -> Step<Parsed> {
    let first = cur.need(STATEMENT_START)?;
    let start = first.span.start;
    match first.kind {
        LexemeKind::RBrace if in_block => {
            cur.bump();
            Ok(Parsed::Close(first.span))
        }
        LexemeKind::Semi if after_close => {
            cur.bump();
            Ok(Parsed::SkipSemi)
        }
        LexemeKind::QMark => {
            cur.bump();
            let cond = parse_condition(cur)?;
            let brace = cur.expect(LexemeKind::LBrace, "`{`")?;
            Ok(Parsed::If(cond, Span::new(start, brace.span.end)))
        }
        LexemeKind::Int => {
            cur.bump();
            let brace = cur.expect(LexemeKind::LBrace, "`{`")?;
            let count = first
                .text
                .parse::<u32>()
                .ok()
                .filter(|c| *c > 0)
                .ok_or(ParseError::BadLoopCount { position: start })?;
            Ok(Parsed::Loop(count, Span::new(start, brace.span.end)))
        }
        LexemeKind::Ident | LexemeKind::Var | LexemeKind::Arrow | LexemeKind::Replan => {
            let stmt = parse_elementary(cur)?;
            let end = cur.lexemes[cur.pos - 1].span.end;
            match cur.peek() {
                None if !cur.eof => return Err(Stop::Incomplete),
                None => {}
                Some(l) if l.kind == LexemeKind::Semi => {
                    cur.bump();
                }
                Some(l) if l.kind == LexemeKind::RBrace && in_block => {}
                Some(l) if is_statement_start(l.kind) => {}
                Some(l) => {
                    let mut expected = vec!["`;`"];
                    if in_block {
                        expected.push("`}`");
                    }
                    return Err(unexpected(l, &expected));
                }
            }
            Ok(Parsed::Elementary(stmt, Span::new(start, end)))
        }
        _ => {
            let mut expected = STATEMENT_START.to_vec();
            if in_block {
                expected.push("`}`");
            }
            Err(unexpected(first, &expected))
        }
    }
}

fn parse_elementary(cur: &mut Cursor<'_>) -> Step<Statement> {
    let first = cur.bump();
    match first.kind {
        LexemeKind::Replan => Ok(Statement::Replan),
        LexemeKind::Arrow => Ok(Statement::Return(parse_value(cur)?)),
        LexemeKind::Var => {
            cur.expect(LexemeKind::Assign, "`=`")?;
            let callee = cur.expect(LexemeKind::Ident, "skill call")?;
            let call = parse_call_rest(cur, callee, true)?;
            Ok(Statement::Assign {
                var: var_index(&first.text),
                call,
            })
        }
        LexemeKind::Ident => Ok(Statement::Call(parse_call_rest(cur, first, true)?)),
        _ => unreachable!("caller checked statement start"),
    }
}

/// Parses what follows a callee identifier: `(args)`, nothing, or, in
/// skill-definition mode at statement level, `,arg{,arg}`.
fn parse_call_rest(cur: &mut Cursor<'_>, callee: &Lexeme, statement_level: bool) -> Step<CallExpr> {
    if callee.text.starts_with('$') {
        return Err(unexpected(callee, &["skill name"]));
    }
    let comma_ok = statement_level && cur.mode == ParseMode::SkillDefinition;
    let mut args = Vec::new();
    match cur.peek() {
        None if !cur.eof => return Err(Stop::Incomplete),
        Some(l) if l.kind == LexemeKind::LParen => {
            cur.bump();
            let next = cur.need(&["argument", "`)`"])?;
            if next.kind == LexemeKind::RParen {
                cur.bump();
            } else {
                loop {
                    args.push(parse_value(cur)?);
                    let sep = cur.need(&["`,`", "`)`"])?;
                    match sep.kind {
                        LexemeKind::Comma => {
                            cur.bump();
                        }
                        LexemeKind::RParen => {
                            cur.bump();
                            break;
                        }
                        _ => return Err(unexpected(sep, &["`,`", "`)`"])),
                    }
                }
            }
        }
        Some(l) if l.kind == LexemeKind::Comma && comma_ok => {
            while cur.peek().is_some_and(|l| l.kind == LexemeKind::Comma) {
                cur.bump();
                args.push(parse_value(cur)?);
            }
            if cur.peek().is_none() && !cur.eof {
                return Err(Stop::Incomplete);
            }
        }
        _ => {}
    }
    Ok(CallExpr::new(callee.text.clone(), args))
}

fn var_index(text: &str) -> u8 {
    text[1..].parse().expect("lexer validated index")
}

fn parse_value(cur: &mut Cursor<'_>) -> Step<Term> {
    const EXPECTED: &[&str] = &["value"];
    let l = cur.need(EXPECTED)?;
    let term = match l.kind {
        LexemeKind::Int => Term::Literal(Literal::Int(
            l.text.parse().map_err(|_| unexpected(l, &["integer in range"]))?,
        )),
        LexemeKind::Float => Term::Literal(Literal::Float(
            l.text.parse().map_err(|_| unexpected(l, EXPECTED))?,
        )),
        LexemeKind::Str => Term::Literal(Literal::Str(l.text.clone())),
        LexemeKind::Bool => Term::Literal(Literal::Bool(l.text == "True")),
        LexemeKind::Var => Term::Var(var_index(&l.text)),
        LexemeKind::Ident if l.text.starts_with('$') => {
            if cur.mode == ParseMode::Plan {
                return Err(Stop::Error(ParseError::PositionalRefOutsidePlan {
                    position: l.span.start,
                    text: l.text.clone(),
                }));
            }
            Term::Positional(var_index(&l.text))
        }
        _ => return Err(unexpected(l, EXPECTED)),
    };
    cur.bump();
    Ok(term)
}

fn parse_operand(cur: &mut Cursor<'_>) -> Step<Operand> {
    let l = cur.need(&["operand"])?;
    if l.kind == LexemeKind::Ident && !l.text.starts_with('$') {
        cur.bump();
        return Ok(Operand::Call(parse_call_rest(cur, l, false)?));
    }
    Ok(Operand::Term(parse_value(cur)?))
}

fn parse_comparator(cur: &mut Cursor<'_>) -> Step<Comparator> {
    const EXPECTED: &[&str] = &["`>`", "`<`", "`==`", "`!=`"];
    let l = cur.need(EXPECTED)?;
    let op = match l.kind {
        LexemeKind::CmpGt => Comparator::Gt,
        LexemeKind::CmpLt => Comparator::Lt,
        LexemeKind::CmpEq => Comparator::Eq,
        LexemeKind::CmpNe => Comparator::Ne,
        _ => return Err(unexpected(l, EXPECTED)),
    };
    cur.bump();
    Ok(op)
}

/// `&` binds tighter than `|`, both left-associative.
fn parse_condition(cur: &mut Cursor<'_>) -> Step<Condition> {
    let mut disjuncts: Vec<Condition> = Vec::new();
    let mut conj: Option<Condition> = None;
    loop {
        let lhs = parse_operand(cur)?;
        let op = parse_comparator(cur)?;
        let rhs = parse_operand(cur)?;
        let leaf = Condition::compare(lhs, op, rhs);
        conj = Some(match conj.take() {
            Some(prev) => Condition::And(Box::new(prev), Box::new(leaf)),
            None => leaf,
        });
        let next = cur.need(&["`&`", "`|`", "`{`"])?;
        match next.kind {
            LexemeKind::Amp => {
                cur.bump();
            }
            LexemeKind::Pipe => {
                cur.bump();
                disjuncts.push(conj.take().expect("set above"));
            }
            LexemeKind::LBrace => break,
            _ => return Err(unexpected(next, &["`&`", "`|`", "`{`"])),
        }
    }
    disjuncts.push(conj.expect("set above"));
    let mut iter = disjuncts.into_iter();
    let first = iter.next().expect("at least one");
    Ok(iter.fold(first, |acc, c| Condition::Or(Box::new(acc), Box::new(c))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(name: &str, args: Vec<Term>) -> CallExpr {
        CallExpr::new(name, args)
    }

    fn int(v: i64) -> Term {
        Term::Literal(Literal::Int(v))
    }

    fn s(v: &str) -> Term {
        Term::Literal(Literal::Str(v.into()))
    }

    fn kinds(units: &[ExecutableUnit]) -> Vec<&'static str> {
        units
            .iter()
            .map(|u| match &u.kind {
                UnitKind::Statement(_) => "stmt",
                UnitKind::LoopHeader { .. } => "loop",
                UnitKind::IfHeader { .. } => "if",
                UnitKind::BodyClose => "close",
            })
            .collect()
    }

    #[test]
    fn elementary_emitted_at_semicolon() {
        let mut p = IncrementalParser::new(ParseMode::Plan);
        assert!(p.feed("tc(180)").unwrap().is_empty());
        let units = p.feed(";?q('Any food target here?')!=False").unwrap();
        assert_eq!(kinds(&units), vec!["stmt"]);
        let units = p.feed("{").unwrap();
        assert_eq!(kinds(&units), vec!["if"]);
        let units = p.feed("g('Table')}").unwrap();
        assert_eq!(kinds(&units), vec!["stmt", "close"]);
        assert!(p.finish().unwrap().is_empty());
        let prog = p.into_program().unwrap();
        assert_eq!(prog.statements().len(), 2);
    }

    #[test]
    fn scan_definition_units() {
        let units = parse_units("8{?iv($1)==True{->True}tc(45)}->False", ParseMode::SkillDefinition)
            .unwrap();
        assert_eq!(
            kinds(&units),
            vec!["loop", "if", "stmt", "close", "stmt", "close", "stmt"]
        );
        assert_eq!(units[0].kind, UnitKind::LoopHeader { count: 8 });
        assert_eq!(
            units[6].kind,
            UnitKind::Statement(Statement::Return(Term::Literal(Literal::Bool(false))))
        );
    }

    #[test]
    fn empty_input() {
        assert!(parse_units("", ParseMode::Plan).unwrap().is_empty());
        assert_eq!(parse_program("", ParseMode::Plan).unwrap(), Program::empty());
    }

    #[test]
    fn comma_form_in_skill_mode() {
        let prog = parse_program("mf,120", ParseMode::SkillDefinition).unwrap();
        assert_eq!(prog.statements(), &[Statement::Call(call("mf", vec![int(120)]))]);
        assert!(parse_program("mf,120", ParseMode::Plan).is_err());
    }

    #[test]
    fn orienting_definition() {
        let text = "4{_1=ox,$1;?_1>0.6{tc,15};?_1<0.4{tu,15};_2=ox,$1;?_2<0.6&_2>0.4{->True}}->False";
        let prog = parse_program(text, ParseMode::SkillDefinition).unwrap();
        let stmts = prog.statements();
        assert_eq!(stmts.len(), 2);
        match &stmts[0] {
            Statement::Loop { count: 4, body } => assert_eq!(body.len(), 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unbalanced_paren() {
        let err = parse_program("tc(45", ParseMode::Plan).unwrap_err();
        assert!(err.expected().contains(&"`,`") && err.expected().contains(&"`)`"));
    }

    #[test]
    fn positional_in_plan_rejected() {
        let err = parse_program("iv($1)", ParseMode::Plan).unwrap_err();
        assert!(matches!(err, ParseError::PositionalRefOutsidePlan { .. }));
    }

    #[test]
    fn semicolon_rules() {
        assert!(parse_program("tc(1);", ParseMode::Plan).is_ok());
        assert!(parse_program("2{tc(1)};tc(2)", ParseMode::Plan).is_ok());
        assert!(parse_program("2{tc(1)}tc(2)", ParseMode::Plan).is_ok());
        assert!(parse_program("2{}", ParseMode::Plan).is_ok());
        assert!(parse_program("tc(1);;", ParseMode::Plan).is_err());
        assert!(parse_program("2{;tc(1)}", ParseMode::Plan).is_err());
        assert!(parse_program(";", ParseMode::Plan).is_err());
        assert!(parse_program("2{tc(1)};;", ParseMode::Plan).is_err());
    }

    #[test]
    fn missing_separator_accepted_before_statement_start() {
        let prog = parse_program("?s('apple')==True{g('apple')->True}", ParseMode::Plan).unwrap();
        match &prog.statements()[0] {
            Statement::If { body, .. } => {
                assert_eq!(body.statements()[0], Statement::Call(call("g", vec![s("apple")])));
                assert_eq!(body.statements()[1], Statement::Return(Term::Literal(Literal::Bool(true))));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_over_or() {
        let prog = parse_program("?_1==1|_1==2&_1==3{}", ParseMode::Plan).unwrap();
        let Statement::If { cond, .. } = &prog.statements()[0] else {
            panic!()
        };
        match cond {
            Condition::Or(_, rhs) => assert!(matches!(**rhs, Condition::And(_, _))),
            other => panic!("expected Or at root, got {other:?}"),
        }
    }

    #[test]
    fn zero_arg_calls() {
        let a = parse_program("p();p", ParseMode::Plan).unwrap();
        assert_eq!(a.statements()[0], a.statements()[1]);
    }

    #[test]
    fn unclosed_block_at_end() {
        assert!(parse_program("2{tc(1)", ParseMode::Plan).is_err());
        assert!(parse_program("tc(1)}", ParseMode::Plan).is_err());
    }

    #[test]
    fn bad_loop_count() {
        assert!(matches!(
            parse_program("0{tc(1)}", ParseMode::Plan),
            Err(ParseError::BadLoopCount { .. })
        ));
    }

    #[test]
    fn poisoned_after_error() {
        let mut p = IncrementalParser::new(ParseMode::Plan);
        assert!(p.feed("tc(1)+").is_err());
        assert!(p.feed("tc(2);").is_err());
    }

    #[test]
    fn positional_callee_rejected() {
        assert!(parse_program("$1()", ParseMode::SkillDefinition).is_err());
    }

    #[test]
    fn spans_within_fed_bytes() {
        let text = "tc(180);8{?iv('apple')==True{->True}tc(45)}->False";
        let mut p = IncrementalParser::new(ParseMode::Plan);
        for (i, ch) in text.char_indices() {
            for u in p.feed(&text[i..i + ch.len_utf8()]).unwrap() {
                assert!(u.span.end <= p.fed());
            }
        }
        p.finish().unwrap();
    }
}
