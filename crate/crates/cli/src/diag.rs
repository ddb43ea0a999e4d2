//! `file:line:col` diagnostics. Expressions carry no positions, so check
//! errors are located from the method they name or the first quoted
//! identifier of the message.

use std::path::Path;

use coeffect_core::lang::{ClassTable, LangError, LangErrorKind, Pos};
use coeffect_core::sharing::CheckError;
use serde_json::{json, Value};

pub struct Diagnostic {
    pub code: String,
    pub msg: String,
    pub pos: Pos,
}

impl Diagnostic {
    pub fn render(&self, file: &Path) -> String {
        format!(
            "{}:{}:{}: error[{}]: {}",
            file.display(),
            self.pos.line,
            self.pos.col,
            self.code,
            self.msg
        )
    }

    pub fn to_json(&self, file: &Path) -> Value {
        json!({
            "schema": coeffect_core::sharing::SCHEMA,
            "file": file.display().to_string(),
            "error": {
                "code": self.code,
                "message": self.msg,
                "line": self.pos.line,
                "col": self.pos.col,
            },
        })
    }
}

pub fn from_lang(e: &LangError) -> Diagnostic {
    let code = match e.kind {
        LangErrorKind::Syntax => "E_SYNTAX",
        LangErrorKind::Duplicate => "E_DUPLICATE",
        LangErrorKind::UnknownClass | LangErrorKind::UnknownMember => "E_LOOKUP",
    };
    Diagnostic {
        code: code.into(),
        msg: e.msg.clone(),
        pos: e.pos,
    }
}

pub fn from_check(src: &str, table: &ClassTable, e: &CheckError) -> Diagnostic {
    Diagnostic {
        code: e.code.to_string(),
        msg: e.msg.clone(),
        pos: locate(src, table, &e.msg),
    }
}

fn pos_at(src: &str, offset: usize) -> Pos {
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    Pos { line, col }
}

/// Offset of the main expression: just after the first `;` outside braces.
fn main_offset(src: &str) -> usize {
    let mut depth = 0i32;
    for (i, ch) in src.char_indices() {
        match ch {
            '{' => depth += 1,
            '}' => depth -= 1,
            ';' if depth == 0 => {
                let rest = &src[i + 1..];
                return i + 1 + (rest.len() - rest.trim_start().len());
            }
            _ => {}
        }
    }
    0
}

fn quoted(msg: &str) -> impl Iterator<Item = &str> {
    msg.split('`').skip(1).step_by(2)
}

fn find_word(src: &str, from: usize, word: &str) -> Option<usize> {
    let is_ident = |c: char| c.is_alphanumeric() || c == '_';
    let mut start = from;
    while let Some(i) = src[start..].find(word) {
        let at = start + i;
        let end = at + word.len();
        let left_ok = !src[..at].chars().next_back().is_some_and(is_ident);
        let right_ok = !src[end..].chars().next().is_some_and(is_ident);
        if left_ok && right_ok {
            return Some(at);
        }
        start = end;
    }
    None
}

fn locate(src: &str, table: &ClassTable, msg: &str) -> Pos {
    if let Some(rest) = msg.strip_prefix("in `") {
        if let Some((cm, _)) = rest.split_once('`') {
            if let Some((c, m)) = cm.split_once('.') {
                if let Ok(md) = table.method(c, m) {
                    return md.pos;
                }
            }
        }
    }
    let main = main_offset(src);
    for q in quoted(msg) {
        let word = q.rsplit('.').next().unwrap_or(q);
        if !word.is_empty() && word.chars().all(|c| c.is_alphanumeric() || c == '_') {
            if let Some(at) = find_word(src, main, word) {
                return pos_at(src, at);
            }
        }
    }
    pos_at(src, main)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions() {
        let src = "class A {int f;}\n;\n  x.f = y";
        assert_eq!(main_offset(src), 21);
        let p = pos_at(src, main_offset(src));
        assert_eq!((p.line, p.col), (3, 3));
        assert_eq!(find_word(src, 0, "f"), Some(13));
        assert_eq!(find_word("xy x", 0, "x"), Some(3));
        assert_eq!(quoted("a `b` c `d.e`").collect::<Vec<_>>(), ["b", "d.e"]);
    }
}
