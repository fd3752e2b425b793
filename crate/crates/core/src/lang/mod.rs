//! MiniSpec syntax: lexing, incremental parsing, printing and validation.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod validate;
pub mod value;

pub use ast::*;
pub use lexer::{lex, LexError, Lexeme, LexemeKind, Lexer};
pub use parser::{
    parse_program, parse_units, ExecutableUnit, IncrementalParser, ParseError, ParseMode, UnitKind,
};
pub use printer::{call_text, condition_text, serialize, statement_text, term_text, OpenBodyError};
pub use validate::{validate, Diagnostic, DiagnosticKind, Level, SkillLookup, MAX_LOOP_COUNT};
pub use value::Value;
