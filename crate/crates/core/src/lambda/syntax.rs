use std::collections::BTreeSet;
use std::fmt;

use super::{Grade, LambdaError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LType<R> {
    Int,
    /// `T₁ →c T₂`.
    Fun(Box<LType<R>>, R, Box<LType<R>>),
}

impl<R> LType<R> {
    pub fn fun(a: LType<R>, c: R, b: LType<R>) -> Self {
        LType::Fun(Box::new(a), c, Box::new(b))
    }

    /// The simple type underneath the grades.
    pub fn shape(&self) -> LType<()> {
        match self {
            LType::Int => LType::Int,
            LType::Fun(a, _, b) => LType::fun(a.shape(), (), b.shape()),
        }
    }
}

impl<R: fmt::Display> fmt::Display for LType<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LType::Int => write!(f, "int"),
            LType::Fun(a, c, b) if matches!(**a, LType::Fun(..)) => write!(f, "({a}) ->[{c}] {b}"),
            LType::Fun(a, c, b) => write!(f, "{a} ->[{c}] {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LTerm<R> {
    Num(i64),
    Var(String),
    Abs(String, LType<R>, Box<LTerm<R>>),
    App(Box<LTerm<R>>, Box<LTerm<R>>),
}

impl<R> LTerm<R> {
    pub fn var(x: impl Into<String>) -> Self {
        LTerm::Var(x.into())
    }

    pub fn abs(x: impl Into<String>, t: LType<R>, body: LTerm<R>) -> Self {
        LTerm::Abs(x.into(), t, Box::new(body))
    }

    pub fn app(f: LTerm<R>, a: LTerm<R>) -> Self {
        LTerm::App(Box::new(f), Box::new(a))
    }

    /// Free variables, sorted.
    pub fn free_vars(&self) -> BTreeSet<String> {
        match self {
            LTerm::Num(_) => BTreeSet::new(),
            LTerm::Var(x) => BTreeSet::from([x.clone()]),
            LTerm::Abs(x, _, b) => {
                let mut fv = b.free_vars();
                fv.remove(x);
                fv
            }
            LTerm::App(f, a) => {
                let mut fv = f.free_vars();
                fv.extend(a.free_vars());
                fv
            }
        }
    }
}

impl<R: fmt::Display> fmt::Display for LTerm<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LTerm::Num(n) => write!(f, "{n}"),
            LTerm::Var(x) => write!(f, "{x}"),
            LTerm::Abs(x, t, b) => write!(f, "\\{x}:{t}. {b}"),
            LTerm::App(g, a) => {
                match **g {
                    LTerm::Abs(..) => write!(f, "({g})")?,
                    _ => write!(f, "{g}")?,
                }
                match **a {
                    LTerm::App(..) | LTerm::Abs(..) => write!(f, " ({a})"),
                    _ => write!(f, " {a}"),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Lambda,
    Ident(String),
    Num(i64),
    Colon,
    Dot,
    LParen,
    RParen,
    Arrow(String),
    IntKw,
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, LambdaError> {
    let cs: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        let start = i;
        match c {
            _ if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '\\' | 'λ' => {
                out.push((Tok::Lambda, start));
                i += 1;
            }
            ':' => {
                out.push((Tok::Colon, start));
                i += 1;
            }
            '.' => {
                out.push((Tok::Dot, start));
                i += 1;
            }
            '(' => {
                out.push((Tok::LParen, start));
                i += 1;
            }
            ')' => {
                out.push((Tok::RParen, start));
                i += 1;
            }
            '-' if cs.get(i + 1) == Some(&'>') => {
                i += 2;
                while cs.get(i).is_some_and(|c| c.is_whitespace()) {
                    i += 1;
                }
                if cs.get(i) != Some(&'[') {
                    return Err(LambdaError::at(i, "expected `[grade]` after `->`"));
                }
                let close = cs[i..]
                    .iter()
                    .position(|&c| c == ']')
                    .ok_or_else(|| LambdaError::at(i, "unclosed `[`"))?;
                let grade: String = cs[i + 1..i + close].iter().collect();
                out.push((Tok::Arrow(grade.trim().to_string()), start));
                i += close + 1;
            }
            _ if c.is_ascii_digit() => {
                while i < cs.len() && cs[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = cs[start..i].iter().collect();
                let n = s
                    .parse()
                    .map_err(|_| LambdaError::at(start, "integer literal out of range"))?;
                out.push((Tok::Num(n), start));
            }
            _ if c.is_alphabetic() || c == '_' => {
                while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || cs[i] == '\'') {
                    i += 1;
                }
                let s: String = cs[start..i].iter().collect();
                out.push((
                    if s == "int" {
                        Tok::IntKw
                    } else {
                        Tok::Ident(s)
                    },
                    start,
                ));
            }
            _ => {
                return Err(LambdaError::at(
                    start,
                    format!("unexpected character `{c}`"),
                ))
            }
        }
    }
    out.push((Tok::Eof, cs.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), LambdaError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(LambdaError::at(self.pos(), format!("expected {what}")))
        }
    }

    fn ty<R: Grade>(&mut self) -> Result<LType<R>, LambdaError> {
        let base = match self.bump() {
            Tok::IntKw => LType::Int,
            Tok::LParen => {
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                t
            }
            _ => {
                return Err(LambdaError::at(
                    self.toks[self.i.saturating_sub(1)].1,
                    "expected a type",
                ))
            }
        };
        if let Tok::Arrow(g) = self.peek().clone() {
            let pos = self.pos();
            self.bump();
            let c = R::parse_grade(&g)
                .ok_or_else(|| LambdaError::at(pos, format!("`{g}` is not a grade")))?;
            let rest = self.ty()?;
            return Ok(LType::fun(base, c, rest));
        }
        Ok(base)
    }

    fn term<R: Grade>(&mut self) -> Result<LTerm<R>, LambdaError> {
        if *self.peek() == Tok::Lambda {
            self.bump();
            let x = match self.bump() {
                Tok::Ident(x) => x,
                _ => {
                    return Err(LambdaError::at(
                        self.toks[self.i.saturating_sub(1)].1,
                        "expected a binder",
                    ))
                }
            };
            self.expect(Tok::Colon, "`:`")?;
            let t = self.ty()?;
            self.expect(Tok::Dot, "`.`")?;
            let body = self.term()?;
            return Ok(LTerm::abs(x, t, body));
        }
        let mut f = self.atom()?;
        while matches!(
            self.peek(),
            Tok::Num(_) | Tok::Ident(_) | Tok::LParen | Tok::Lambda
        ) {
            let a = if *self.peek() == Tok::Lambda {
                self.term()?
            } else {
                self.atom()?
            };
            f = LTerm::app(f, a);
        }
        Ok(f)
    }

    fn atom<R: Grade>(&mut self) -> Result<LTerm<R>, LambdaError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(n) => Ok(LTerm::Num(n)),
            Tok::Ident(x) => Ok(LTerm::Var(x)),
            Tok::LParen => {
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(LambdaError::at(pos, "expected a term")),
        }
    }
}

/// Parse `\x:T. t`, juxtaposition and parentheses. Function types are
/// written `T ->[c] T`.
pub fn parse_lterm<R: Grade>(src: &str) -> Result<LTerm<R>, LambdaError> {
    let mut p = Parser {
        toks: lex(src)?,
        i: 0,
    };
    let t = p.term()?;
    if *p.peek() != Tok::Eof {
        return Err(LambdaError::at(p.pos(), "unexpected input after term"));
    }
    Ok(t)
}

pub fn parse_ltype<R: Grade>(src: &str) -> Result<LType<R>, LambdaError> {
    let mut p = Parser {
        toks: lex(src)?,
        i: 0,
    };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return Err(LambdaError::at(p.pos(), "unexpected input after type"));
    }
    Ok(t)
}
