//! Translator for the verbose, Python-like baseline plan language.
//!
//! Supported forms, one per line with indentation-delimited blocks:
//! `[module.]skill(args)`, `name = [module.]skill(args)`, `for i in range(N):`,
//! `if cond:` with `and`/`or`, `return value`, `replan()` and a leading
//! `def name(params):` that turns the body into a skill definition.
//! Skill names are resolved against the registry and rewritten to their
//! abbreviations, so a translated plan is identical to its MiniSpec twin.

use std::collections::HashMap;

use crate::lang::{Body, CallExpr, Comparator, Condition, Literal, Operand, Program, Statement, Term};
use crate::skills::SkillRegistry;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("verbose plan line {line}: {message}")]
pub struct VerboseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Op(&'static str),
}

fn lex_line(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                i += 1;
            }
            out.push(Tok::Name(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            if s.contains('.') {
                out.push(Tok::Float(s.parse().map_err(|_| format!("bad number `{s}`"))?));
            } else {
                out.push(Tok::Int(s.parse().map_err(|_| format!("bad number `{s}`"))?));
            }
        } else if c == '\'' || c == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != c {
                i += 1;
            }
            if i == chars.len() {
                return Err("unterminated string".into());
            }
            out.push(Tok::Str(chars[start..i].iter().collect()));
            i += 1;
        } else {
            let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let op = match two.as_str() {
                "==" => Some("=="),
                "!=" => Some("!="),
                _ => None,
            };
            if let Some(op) = op {
                out.push(Tok::Op(op));
                i += 2;
                continue;
            }
            let op = match c {
                '<' => "<",
                '>' => ">",
                '=' => "=",
                '(' => "(",
                ')' => ")",
                ',' => ",",
                ':' => ":",
                _ => return Err(format!("unexpected character `{c}`")),
            };
            out.push(Tok::Op(op));
            i += 1;
        }
    }
    Ok(out)
}

struct Line {
    number: usize,
    indent: usize,
    toks: Vec<Tok>,
}

struct Translator<'r> {
    registry: &'r SkillRegistry,
    vars: HashMap<String, u8>,
    params: HashMap<String, u8>,
    pending_loop: Option<u32>,
}

struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Op(o)) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> Result<(), String> {
        if self.eat_op(op) {
            Ok(())
        } else {
            Err(format!("expected `{op}`"))
        }
    }

    fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

impl Translator<'_> {
    fn callee(&self, dotted: &str) -> Result<String, String> {
        let name = dotted.rsplit('.').next().unwrap_or(dotted);
        self.registry
            .resolve(name)
            .map(|s| s.abbr().to_string())
            .ok_or_else(|| format!("unknown skill `{name}`"))
    }

    fn term(&self, tok: &Tok) -> Result<Term, String> {
        Ok(match tok {
            Tok::Int(n) => Term::Literal(Literal::Int(*n)),
            Tok::Float(f) => Term::Literal(Literal::Float(*f)),
            Tok::Str(s) => Term::Literal(Literal::Str(s.clone())),
            Tok::Name(n) if n == "True" => Term::Literal(Literal::Bool(true)),
            Tok::Name(n) if n == "False" => Term::Literal(Literal::Bool(false)),
            Tok::Name(n) => {
                if let Some(v) = self.vars.get(n) {
                    Term::Var(*v)
                } else if let Some(p) = self.params.get(n) {
                    Term::Positional(*p)
                } else {
                    return Err(format!("undefined name `{n}`"));
                }
            }
            Tok::Op(o) => return Err(format!("unexpected `{o}`")),
        })
    }

    fn call_rest(&self, name: &str, cur: &mut Cursor<'_>) -> Result<CallExpr, String> {
        cur.expect_op("(")?;
        let mut args = Vec::new();
        if !cur.eat_op(")") {
            loop {
                let t = cur.next().ok_or("unexpected end of line")?;
                args.push(self.term(t)?);
                if cur.eat_op(")") {
                    break;
                }
                cur.expect_op(",")?;
            }
        }
        Ok(CallExpr::new(self.callee(name)?, args))
    }

    fn operand(&self, cur: &mut Cursor<'_>) -> Result<Operand, String> {
        let t = cur.next().ok_or("unexpected end of condition")?;
        if let Tok::Name(n) = t {
            if matches!(cur.peek(), Some(Tok::Op("("))) {
                return Ok(Operand::Call(self.call_rest(n, cur)?));
            }
        }
        Ok(Operand::Term(self.term(t)?))
    }

    fn compare(&self, cur: &mut Cursor<'_>) -> Result<Condition, String> {
        let lhs = self.operand(cur)?;
        let op = match cur.next() {
            Some(Tok::Op("==")) => Comparator::Eq,
            Some(Tok::Op("!=")) => Comparator::Ne,
            Some(Tok::Op("<")) => Comparator::Lt,
            Some(Tok::Op(">")) => Comparator::Gt,
            _ => return Err("expected a comparison operator".into()),
        };
        let rhs = self.operand(cur)?;
        Ok(Condition::compare(lhs, op, rhs))
    }

    fn keyword(cur: &mut Cursor<'_>, word: &str) -> bool {
        if matches!(cur.peek(), Some(Tok::Name(n)) if n == word) {
            cur.pos += 1;
            true
        } else {
            false
        }
    }

    fn condition(&self, cur: &mut Cursor<'_>) -> Result<Condition, String> {
        let mut or = self.conjunction(cur)?;
        while Self::keyword(cur, "or") {
            or = Condition::Or(Box::new(or), Box::new(self.conjunction(cur)?));
        }
        Ok(or)
    }

    fn conjunction(&self, cur: &mut Cursor<'_>) -> Result<Condition, String> {
        let mut and = self.compare(cur)?;
        while Self::keyword(cur, "and") {
            and = Condition::And(Box::new(and), Box::new(self.compare(cur)?));
        }
        Ok(and)
    }

    fn var_for(&mut self, name: &str) -> Result<u8, String> {
        if let Some(v) = self.vars.get(name) {
            return Ok(*v);
        }
        let n = u8::try_from(self.vars.len() + 1)
            .ok()
            .filter(|n| *n <= 99)
            .ok_or("too many variables")?;
        self.vars.insert(name.to_string(), n);
        Ok(n)
    }

    fn block(&mut self, lines: &[Line], idx: &mut usize, indent: usize) -> Result<Vec<Statement>, VerboseError> {
        let mut out = Vec::new();
        while *idx < lines.len() {
            let line = &lines[*idx];
            if line.indent < indent {
                break;
            }
            let err = |message: String| VerboseError {
                line: line.number,
                message,
            };
            if line.indent > indent {
                return Err(err("unexpected indentation".into()));
            }
            *idx += 1;
            let mut cur = Cursor { toks: &line.toks, pos: 0 };
            let header = match cur.peek() {
                Some(Tok::Name(n)) if n == "for" || n == "if" => Some(n.as_str()),
                _ => None,
            };
            if let Some(kw) = header {
                cur.pos += 1;
                let stmt_head = if kw == "for" {
                    self.loop_header(&mut cur).map_err(err)?
                } else {
                    Some(self.condition(&mut cur).map_err(err)?)
                };
                cur.expect_op(":").map_err(err)?;
                if !cur.done() {
                    return Err(err("trailing tokens after `:`".into()));
                }
                let child = lines
                    .get(*idx)
                    .map(|l| l.indent)
                    .filter(|i| *i > indent)
                    .ok_or_else(|| err("expected an indented block".into()))?;
                let body = Body::closed(self.block(lines, idx, child)?);
                out.push(match stmt_head {
                    Some(cond) => Statement::If { cond, body },
                    None => {
                        let count = self.pending_loop.take().expect("loop header sets count");
                        Statement::Loop { count, body }
                    }
                });
                continue;
            }
            let stmt = self.simple(&mut cur).map_err(err)?;
            if !cur.done() {
                return Err(err("trailing tokens".into()));
            }
            out.push(stmt);
        }
        Ok(out)
    }

    fn loop_header(&mut self, cur: &mut Cursor<'_>) -> Result<Option<Condition>, String> {
        match cur.next() {
            Some(Tok::Name(_)) => {}
            _ => return Err("expected a loop variable".into()),
        }
        if !Self::keyword(cur, "in") || !Self::keyword(cur, "range") {
            return Err("expected `in range(N)`".into());
        }
        cur.expect_op("(")?;
        let count = match cur.next() {
            Some(Tok::Int(n)) if *n > 0 => u32::try_from(*n).map_err(|_| "loop count too large")?,
            _ => return Err("loop count must be a positive integer".into()),
        };
        cur.expect_op(")")?;
        self.pending_loop = Some(count);
        Ok(None)
    }

    fn simple(&mut self, cur: &mut Cursor<'_>) -> Result<Statement, String> {
        let first = cur.next().ok_or("empty statement")?;
        let Tok::Name(name) = first else {
            return Err("expected a statement".into());
        };
        match name.as_str() {
            "return" => {
                let t = cur.next().ok_or("`return` needs a value")?;
                return Ok(Statement::Return(self.term(t)?));
            }
            "replan" => {
                if cur.eat_op("(") {
                    cur.expect_op(")")?;
                }
                return Ok(Statement::Replan);
            }
            _ => {}
        }
        if cur.eat_op("=") {
            let Some(Tok::Name(callee)) = cur.next() else {
                return Err("expected a skill call after `=`".into());
            };
            let call = self.call_rest(callee, cur)?;
            let var = self.var_for(name)?;
            return Ok(Statement::Assign { var, call });
        }
        Ok(Statement::Call(self.call_rest(name, cur)?))
    }
}

/// Translates verbose plan text into a MiniSpec program.
pub fn translate_verbose(text: &str, registry: &SkillRegistry) -> Result<Program, VerboseError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let expanded = raw.replace('\t', "    ");
        let content = expanded.trim_start();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let toks = lex_line(content).map_err(|message| VerboseError { line: i + 1, message })?;
        lines.push(Line {
            number: i + 1,
            indent: expanded.len() - content.len(),
            toks,
        });
    }
    let mut tr = Translator {
        registry,
        vars: HashMap::new(),
        params: HashMap::new(),
        pending_loop: None,
    };
    let mut idx = 0;
    let base = lines.first().map_or(0, |l| l.indent);
    if let Some(def) = lines.first().filter(|l| matches!(l.toks.first(), Some(Tok::Name(n)) if n == "def")) {
        let err = |message: String| VerboseError { line: def.number, message };
        let mut cur = Cursor { toks: &def.toks[1..], pos: 0 };
        match cur.next() {
            Some(Tok::Name(_)) => {}
            _ => return Err(err("expected a skill name".into())),
        }
        cur.expect_op("(").map_err(err)?;
        let mut n = 0u8;
        if !cur.eat_op(")") {
            loop {
                match cur.next() {
                    Some(Tok::Name(p)) => {
                        n += 1;
                        tr.params.insert(p.clone(), n);
                    }
                    _ => return Err(err("expected a parameter name".into())),
                }
                if cur.eat_op(")") {
                    break;
                }
                cur.expect_op(",").map_err(err)?;
            }
        }
        cur.expect_op(":").map_err(err)?;
        idx = 1;
        let child = lines
            .get(1)
            .map(|l| l.indent)
            .filter(|i| *i > base)
            .ok_or_else(|| err("expected an indented body".into()))?;
        let body = tr.block(&lines, &mut idx, child)?;
        if idx < lines.len() {
            return Err(VerboseError {
                line: lines[idx].number,
                message: "statements after a skill definition".into(),
            });
        }
        return Ok(Program::new(Body::closed(body)));
    }
    let body = tr.block(&lines, &mut idx, base)?;
    if idx < lines.len() {
        return Err(VerboseError {
            line: lines[idx].number,
            message: "unexpected dedent".into(),
        });
    }
    Ok(Program::new(Body::closed(body)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets;
    use crate::lang::{parse_program, serialize, ParseMode};
    use crate::skills::default_registry;

    #[test]
    fn scan_definition_matches_minispec() {
        let reg = default_registry();
        let p = translate_verbose(assets::SCAN_VERBOSE, &reg).unwrap();
        assert_eq!(serialize(&p).unwrap(), "8{?iv($1)==True{->True}tu(45)}->False");
    }

    #[test]
    fn fixture_pairs_translate_to_their_twins() {
        let reg = default_registry();
        let set = crate::controller::FixtureSet::bundled();
        for f in &set.plans {
            let text = f.verbose_text().expect("every fixture has a verbose twin");
            let verbose = translate_verbose(&text, &reg).unwrap_or_else(|e| panic!("{}: {e}", f.plan));
            let minispec = parse_program(&f.plan, ParseMode::Plan).unwrap();
            assert_eq!(verbose, minispec, "{}", f.plan);
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let reg = default_registry();
        let e = translate_verbose("drone_skill.turn_cw(90)\nfly_away()", &reg).unwrap_err();
        assert_eq!(e.line, 2);
        let e = translate_verbose("if x == True:\n    tc(1)", &reg).unwrap_err();
        assert!(e.message.contains("undefined name"));
        let e = translate_verbose("for i in range(3):\ntc(1)", &reg).unwrap_err();
        assert!(e.message.contains("indented"));
    }
}
