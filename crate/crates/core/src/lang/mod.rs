//! Syntax of the calculus: AST, parser, pretty-printer and class tables.
//!
//! Concrete syntax:
//!
//! ```text
//! program  := classdecl* [";"] seq
//! classdecl:= "class" Id "{" (field | method)* "}"
//! field    := type Id ";"
//! method   := type Id ["[" [mod] ["^" coeff] "]"] "(" params ")" "{" seq "}"
//! param    := type ["^" coeff] Id
//! type     := [mod] Id | "int"
//! seq      := (type Id "=" expr ";" | expr ";")* expr
//! expr     := postfix ["=" expr]
//! postfix  := primary ("." Id ["(" args ")"])*
//! primary  := Id | ["-"] Int | "new" Id "(" args ")" | "(" expr ")" | "{" seq "}"
//! ```

mod ast;
mod lexer;
mod parser;
mod pretty;
mod table;

use thiserror::Error;

pub use ast::*;
pub use parser::{all_names, parse, parse_expr};
pub use table::{alpha_fresh_sig, ClassTable, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LangErrorKind {
    Syntax,
    Duplicate,
    UnknownClass,
    UnknownMember,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{pos}: {msg}")]
pub struct LangError {
    pub kind: LangErrorKind,
    pub pos: Pos,
    pub msg: String,
}

impl LangError {
    pub fn new(kind: LangErrorKind, pos: Pos, msg: String) -> Self {
        LangError { kind, pos, msg }
    }

    pub fn syntax(pos: Pos, msg: String) -> Self {
        LangError::new(LangErrorKind::Syntax, pos, msg)
    }
}
