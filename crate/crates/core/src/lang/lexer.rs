//! Incremental lexer.
//!
//! Text arrives in arbitrary chunks. A lexeme is only emitted once the lexer
//! can prove it will not grow with more input, so half of `replan` or an open
//! string stays buffered until the next chunk or [`Lexer::finish`].

use super::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LexemeKind {
    Ident,
    Int,
    Float,
    Str,
    Bool,
    Var,
    Arrow,
    QMark,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Assign,
    CmpGt,
    CmpLt,
    CmpEq,
    CmpNe,
    Amp,
    Pipe,
    Replan,
}

impl LexemeKind {
    pub fn describe(self) -> &'static str {
        match self {
            LexemeKind::Ident => "identifier",
            LexemeKind::Int => "integer",
            LexemeKind::Float => "float",
            LexemeKind::Str => "string",
            LexemeKind::Bool => "bool",
            LexemeKind::Var => "variable",
            LexemeKind::Arrow => "`->`",
            LexemeKind::QMark => "`?`",
            LexemeKind::LBrace => "`{`",
            LexemeKind::RBrace => "`}`",
            LexemeKind::LParen => "`(`",
            LexemeKind::RParen => "`)`",
            LexemeKind::Semi => "`;`",
            LexemeKind::Comma => "`,`",
            LexemeKind::Assign => "`=`",
            LexemeKind::CmpGt => "`>`",
            LexemeKind::CmpLt => "`<`",
            LexemeKind::CmpEq => "`==`",
            LexemeKind::CmpNe => "`!=`",
            LexemeKind::Amp => "`&`",
            LexemeKind::Pipe => "`|`",
            LexemeKind::Replan => "`replan`",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexeme {
    pub kind: LexemeKind,
    /// Source text; for strings the quotes are stripped.
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("lex error at byte {position}: {message} `{text}`")]
pub struct LexError {
    pub position: usize,
    pub text: String,
    pub message: String,
}

impl LexError {
    fn new(position: usize, text: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            position,
            text: text.into(),
            message: message.into(),
        }
    }
}

enum Scan {
    Done(Lexeme, usize),
    Skip(usize),
    Incomplete,
}

#[derive(Debug, Default, Clone)]
pub struct Lexer {
    buf: String,
    /// Absolute offset of `buf[0]` in the full text.
    base: usize,
    error: Option<LexError>,
}

impl Lexer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Bytes received so far.
    pub fn fed(&self) -> usize {
        self.base + self.buf.len()
    }

    pub fn feed(&mut self, chunk: &str) -> Result<Vec<Lexeme>, LexError> {
        if let Some(e) = &self.error {
            return Err(e.clone());
        }
        self.buf.push_str(chunk);
        self.drain(false)
    }

    /// Flushes the buffered tail. Unterminated strings become errors here.
    pub fn finish(&mut self) -> Result<Vec<Lexeme>, LexError> {
        if let Some(e) = &self.error {
            return Err(e.clone());
        }
        self.drain(true)
    }

    fn drain(&mut self, eof: bool) -> Result<Vec<Lexeme>, LexError> {
        let mut out = Vec::new();
        let mut pos = 0;
        loop {
            match scan(&self.buf[pos..], self.base + pos, eof) {
                Ok(Scan::Done(lexeme, len)) => {
                    out.push(lexeme);
                    pos += len;
                }
                Ok(Scan::Skip(len)) => pos += len,
                Ok(Scan::Incomplete) => break,
                Err(e) => {
                    self.error = Some(e.clone());
                    return Err(e);
                }
            }
        }
        self.buf.drain(..pos);
        self.base += pos;
        Ok(out)
    }
}

/// Lexes a complete text in one shot.
pub fn lex(text: &str) -> Result<Vec<Lexeme>, LexError> {
    let mut lexer = Lexer::new();
    let mut out = lexer.feed(text)?;
    out.extend(lexer.finish()?);
    Ok(out)
}

fn is_word(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn scan(s: &str, at: usize, eof: bool) -> Result<Scan, LexError> {
    let bytes = s.as_bytes();
    let Some(&first) = bytes.first() else {
        return Ok(Scan::Incomplete);
    };
    let done = |kind, text: &str, len: usize| {
        Ok(Scan::Done(
            Lexeme {
                kind,
                text: text.to_string(),
                span: Span::new(at, at + len),
            },
            len,
        ))
    };
    // Operators that may extend into a two-byte form need one byte of lookahead.
    let next = bytes.get(1).copied();
    match first {
        b' ' | b'\t' | b'\r' | b'\n' => {
            let len = bytes
                .iter()
                .take_while(|b| matches!(b, b' ' | b'\t' | b'\r' | b'\n'))
                .count();
            Ok(Scan::Skip(len))
        }
        b'?' => done(LexemeKind::QMark, "?", 1),
        b'{' => done(LexemeKind::LBrace, "{", 1),
        b'}' => done(LexemeKind::RBrace, "}", 1),
        b'(' => done(LexemeKind::LParen, "(", 1),
        b')' => done(LexemeKind::RParen, ")", 1),
        b';' => done(LexemeKind::Semi, ";", 1),
        b',' => done(LexemeKind::Comma, ",", 1),
        b'&' => done(LexemeKind::Amp, "&", 1),
        b'|' => done(LexemeKind::Pipe, "|", 1),
        b'>' => done(LexemeKind::CmpGt, ">", 1),
        b'<' => done(LexemeKind::CmpLt, "<", 1),
        b'=' => match next {
            Some(b'=') => done(LexemeKind::CmpEq, "==", 2),
            None if !eof => Ok(Scan::Incomplete),
            _ => done(LexemeKind::Assign, "=", 1),
        },
        b'!' => match next {
            Some(b'=') => done(LexemeKind::CmpNe, "!=", 2),
            None if !eof => Ok(Scan::Incomplete),
            _ => Err(LexError::new(at, "!", "expected `!=`")),
        },
        b'-' => match next {
            Some(b'>') => done(LexemeKind::Arrow, "->", 2),
            Some(d) if d.is_ascii_digit() => scan_number(s, at, eof),
            None if !eof => Ok(Scan::Incomplete),
            _ => Err(LexError::new(at, "-", "expected `->` or a number")),
        },
        b'\'' | b'"' => match s[1..].find(first as char) {
            Some(close) => {
                let len = close + 2;
                done(LexemeKind::Str, &s[1..close + 1], len)
            }
            None if !eof => Ok(Scan::Incomplete),
            None => Err(LexError::new(at, s, "unterminated string")),
        },
        b'$' => {
            let digits = bytes[1..].iter().take_while(|b| b.is_ascii_digit()).count();
            let len = 1 + digits;
            if len == bytes.len() && !eof {
                return Ok(Scan::Incomplete);
            }
            if digits == 0 {
                return Err(LexError::new(at, "$", "expected positional index"));
            }
            if bytes.get(len).copied().is_some_and(is_word) {
                return Err(LexError::new(at, &s[..len + 1], "malformed positional reference"));
            }
            check_index(&s[1..len], at, &s[..len])?;
            done(LexemeKind::Ident, &s[..len], len)
        }
        b if b.is_ascii_digit() => scan_number(s, at, eof),
        b if b.is_ascii_alphabetic() || b == b'_' => {
            let len = bytes.iter().take_while(|b| is_word(**b)).count();
            if len == bytes.len() && !eof {
                return Ok(Scan::Incomplete);
            }
            let word = &s[..len];
            let kind = match word {
                "True" | "False" => LexemeKind::Bool,
                "replan" | "rp" => LexemeKind::Replan,
                _ if word.len() > 1
                    && word.starts_with('_')
                    && word[1..].bytes().all(|b| b.is_ascii_digit()) =>
                {
                    check_index(&word[1..], at, word)?;
                    LexemeKind::Var
                }
                _ => LexemeKind::Ident,
            };
            done(kind, word, len)
        }
        _ => {
            let ch = s.chars().next().unwrap_or('?');
            Err(LexError::new(at, ch.to_string(), "unexpected character"))
        }
    }
}

fn check_index(digits: &str, at: usize, text: &str) -> Result<(), LexError> {
    let ok = !digits.starts_with('0') && digits.len() <= 2;
    if ok {
        Ok(())
    } else {
        Err(LexError::new(at, text, "index must be 1..99 without leading zeros"))
    }
}

fn scan_number(s: &str, at: usize, eof: bool) -> Result<Scan, LexError> {
    let bytes = s.as_bytes();
    let mut len = usize::from(bytes[0] == b'-');
    len += bytes[len..].iter().take_while(|b| b.is_ascii_digit()).count();
    let mut kind = LexemeKind::Int;
    if bytes.get(len) == Some(&b'.') {
        let frac = bytes[len + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
        if frac == 0 && (len + 1 < bytes.len() || eof) {
            return Err(LexError::new(at, &s[..len + 1], "expected digits after `.`"));
        }
        len += 1 + frac;
        kind = LexemeKind::Float;
    }
    if len == bytes.len() && !eof {
        return Ok(Scan::Incomplete);
    }
    if let Some(&b) = bytes.get(len) {
        if is_word(b) || b == b'.' {
            return Err(LexError::new(at, &s[..len + 1], "malformed number"));
        }
    }
    Ok(Scan::Done(
        Lexeme {
            kind,
            text: s[..len].to_string(),
            span: Span::new(at, at + len),
        },
        len,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use LexemeKind::*;

    fn kinds(lexemes: &[Lexeme]) -> Vec<LexemeKind> {
        lexemes.iter().map(|l| l.kind).collect()
    }

    #[test]
    fn split_integer_is_buffered() {
        let mut lx = Lexer::new();
        let first = lx.feed("tc(1").unwrap();
        assert_eq!(kinds(&first), vec![Ident, LParen]);
        let second = lx.feed("80);").unwrap();
        assert_eq!(kinds(&second), vec![Int, RParen, Semi]);
        assert_eq!(second[0].text, "180");
        assert_eq!(second[0].span, Span::new(3, 6));
    }

    #[test]
    fn scan_header_lexemes() {
        let out = lex("?iv($1)==True{").unwrap();
        assert_eq!(
            kinds(&out),
            vec![QMark, Ident, LParen, Ident, RParen, CmpEq, Bool, LBrace]
        );
        assert_eq!(out[3].text, "$1");
    }

    #[test]
    fn illegal_character() {
        let err = lex("@@").unwrap_err();
        assert_eq!(err.position, 0);
        assert_eq!(err.text, "@");
    }

    #[test]
    fn keywords_and_strings() {
        let out = lex("rp;replan;'a b';\"it's\"").unwrap();
        assert_eq!(kinds(&out), vec![Replan, Semi, Replan, Semi, Str, Semi, Str]);
        assert_eq!(out[4].text, "a b");
        assert_eq!(out[6].text, "it's");
    }

    #[test]
    fn partial_keyword_waits() {
        let mut lx = Lexer::new();
        assert!(lx.feed("rep").unwrap().is_empty());
        assert_eq!(kinds(&lx.feed("lan;").unwrap()), vec![Replan, Semi]);
    }

    #[test]
    fn operators_need_lookahead() {
        let mut lx = Lexer::new();
        assert!(lx.feed("_1=").unwrap().len() == 1);
        assert_eq!(kinds(&lx.feed("=2").unwrap()), vec![CmpEq]);
        assert_eq!(kinds(&lx.finish().unwrap()), vec![Int]);
    }

    #[test]
    fn numbers() {
        let out = lex("0.6 -3 12 -0.5").unwrap();
        assert_eq!(kinds(&out), vec![Float, Int, Int, Float]);
        assert!(lex("8x").is_err());
        assert!(lex("1.").is_err());
        assert!(lex("1.2.3").is_err());
    }

    #[test]
    fn variable_indices() {
        assert_eq!(kinds(&lex("_1 _99").unwrap()), vec![Var, Var]);
        assert!(lex("_0").is_err());
        assert!(lex("_01").is_err());
        assert!(lex("_100").is_err());
        assert!(lex("$0").is_err());
    }

    #[test]
    fn unterminated_string_at_end() {
        let mut lx = Lexer::new();
        assert!(lx.feed("l('hi").unwrap().len() == 2);
        assert!(lx.finish().is_err());
    }

    #[test]
    fn non_ascii_only_inside_strings() {
        assert!(lex("l('café')").is_ok());
        assert!(lex("café").is_err());
    }
}
