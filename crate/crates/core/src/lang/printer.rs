//! Canonical serialization.

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot serialize a program with an unclosed body")]
pub struct OpenBodyError;

/// Canonical text: parenthesized calls, `;` only between statements that do
/// not end in `}`, no whitespace, no trailing `;`.
pub fn serialize(program: &Program) -> Result<String, OpenBodyError> {
    let mut out = String::new();
    write_body(&program.body, &mut out, true)?;
    Ok(out)
}

/// Prints one elementary statement or a composite header for traces.
pub fn statement_text(stmt: &Statement) -> String {
    let mut out = String::new();
    match stmt {
        Statement::Loop { count, .. } => out.push_str(&format!("{count}{{")),
        Statement::If { cond, .. } => {
            out.push('?');
            write_condition(cond, &mut out);
            out.push('{');
        }
        other => write_elementary(other, &mut out),
    }
    out
}

pub fn condition_text(cond: &Condition) -> String {
    let mut out = String::new();
    write_condition(cond, &mut out);
    out
}

pub fn call_text(call: &CallExpr) -> String {
    let mut out = String::new();
    write_call(call, &mut out);
    out
}

pub fn term_text(term: &Term) -> String {
    let mut out = String::new();
    write_term(term, &mut out);
    out
}

fn write_body(body: &Body, out: &mut String, top: bool) -> Result<(), OpenBodyError> {
    // The top-level body of a finished parse is closed; hand-built programs
    // may leave it open, which is harmless at the root.
    if !top && !body.is_closed() {
        return Err(OpenBodyError);
    }
    let mut need_sep = false;
    for stmt in body.statements() {
        if need_sep {
            out.push(';');
        }
        match stmt {
            Statement::Loop { count, body } => {
                out.push_str(&count.to_string());
                out.push('{');
                write_body(body, out, false)?;
                out.push('}');
                need_sep = false;
            }
            Statement::If { cond, body } => {
                out.push('?');
                write_condition(cond, out);
                out.push('{');
                write_body(body, out, false)?;
                out.push('}');
                need_sep = false;
            }
            other => {
                write_elementary(other, out);
                need_sep = true;
            }
        }
    }
    Ok(())
}

fn write_elementary(stmt: &Statement, out: &mut String) {
    match stmt {
        Statement::Call(c) => write_call(c, out),
        Statement::Assign { var, call } => {
            out.push_str(&format!("_{var}="));
            write_call(call, out);
        }
        Statement::Return(t) => {
            out.push_str("->");
            write_term(t, out);
        }
        Statement::Replan => out.push_str("rp"),
        Statement::Loop { .. } | Statement::If { .. } => unreachable!("composite"),
    }
}

fn write_call(call: &CallExpr, out: &mut String) {
    out.push_str(&call.callee);
    out.push('(');
    for (i, a) in call.args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_term(a, out);
    }
    out.push(')');
}

fn write_term(term: &Term, out: &mut String) {
    match term {
        Term::Literal(l) => write_literal(l, out),
        Term::Var(n) => out.push_str(&format!("_{n}")),
        Term::Positional(n) => out.push_str(&format!("${n}")),
    }
}

pub(crate) fn float_text(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn write_literal(lit: &Literal, out: &mut String) {
    match lit {
        Literal::Int(v) => out.push_str(&v.to_string()),
        Literal::Float(v) => out.push_str(&float_text(*v)),
        Literal::Str(s) => {
            // No escapes exist, so a string holding `'` must use `"`.
            let q = if s.contains('\'') { '"' } else { '\'' };
            out.push(q);
            out.push_str(s);
            out.push(q);
        }
        Literal::Bool(b) => out.push_str(if *b { "True" } else { "False" }),
    }
}

fn write_operand(op: &Operand, out: &mut String) {
    match op {
        Operand::Term(t) => write_term(t, out),
        Operand::Call(c) => write_call(c, out),
    }
}

fn write_condition(cond: &Condition, out: &mut String) {
    match cond {
        Condition::Compare { lhs, op, rhs } => {
            write_operand(lhs, out);
            out.push_str(op.symbol());
            write_operand(rhs, out);
        }
        Condition::And(a, b) => {
            write_condition(a, out);
            out.push('&');
            write_condition(b, out);
        }
        Condition::Or(a, b) => {
            write_condition(a, out);
            out.push('|');
            write_condition(b, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_program, ParseMode};

    fn canon(text: &str, mode: ParseMode) -> String {
        serialize(&parse_program(text, mode).unwrap()).unwrap()
    }

    #[test]
    fn scan_round_trips_verbatim() {
        let text = "8{?iv($1)==True{->True}tc(45)}->False";
        assert_eq!(canon(text, ParseMode::SkillDefinition), text);
    }

    #[test]
    fn comma_form_canonicalized() {
        assert_eq!(canon("mf,120", ParseMode::SkillDefinition), "mf(120)");
    }

    #[test]
    fn empty_program() {
        assert_eq!(serialize(&Program::empty()).unwrap(), "");
    }

    #[test]
    fn quotes_and_whitespace() {
        assert_eq!(canon("l( \"hi\" ) ; p", ParseMode::Plan), "l('hi');p()");
        assert_eq!(canon("l(\"it's\")", ParseMode::Plan), "l(\"it's\")");
    }

    #[test]
    fn floats_keep_a_point() {
        assert_eq!(canon("?_1>1.0{rp}", ParseMode::Plan), "?_1>1.0{rp}");
        assert_eq!(canon("?_1>0.60{replan}", ParseMode::Plan), "?_1>0.6{rp}");
    }

    #[test]
    fn open_body_rejected() {
        let mut body = Body::new();
        body.push(
            Statement::Loop {
                count: 2,
                body: Body::new(),
            },
            Span::default(),
        )
        .unwrap();
        assert_eq!(serialize(&Program::new(body)), Err(OpenBodyError));
    }

    #[test]
    fn condition_precedence_survives_round_trip() {
        let text = "?_1==1|_1==2&_1==3{}";
        assert_eq!(canon(text, ParseMode::Plan), text);
    }
}
