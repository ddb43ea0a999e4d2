use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::algebra::Coeffect;

/// Type modifier. `Seal` only arises inside the checker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Modifier {
    Mut,
    Read,
    Imm,
    Caps,
    Seal(u64),
}

impl Modifier {
    pub fn parse(s: &str) -> Option<Modifier> {
        match s {
            "mut" => Some(Modifier::Mut),
            "read" => Some(Modifier::Read),
            "imm" => Some(Modifier::Imm),
            "caps" => Some(Modifier::Caps),
            _ => None,
        }
    }

    pub fn is_seal(self) -> bool {
        matches!(self, Modifier::Seal(_))
    }
}

impl fmt::Display for Modifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modifier::Mut => write!(f, "mut"),
            Modifier::Read => write!(f, "read"),
            Modifier::Imm => write!(f, "imm"),
            Modifier::Caps => write!(f, "caps"),
            Modifier::Seal(k) => write!(f, "seal{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Class(String, Modifier),
}

impl Type {
    pub fn class(name: impl Into<String>) -> Type {
        Type::Class(name.into(), Modifier::Mut)
    }

    pub fn class_name(&self) -> Option<&str> {
        match self {
            Type::Int => None,
            Type::Class(c, _) => Some(c),
        }
    }

    pub fn modifier(&self) -> Option<Modifier> {
        match self {
            Type::Int => None,
            Type::Class(_, m) => Some(*m),
        }
    }

    pub fn with_modifier(&self, m: Modifier) -> Type {
        match self {
            Type::Int => Type::Int,
            Type::Class(c, _) => Type::Class(c.clone(), m),
        }
    }

    /// The type with modifiers dropped (all class types become `mut`).
    pub fn erase(&self) -> Type {
        self.with_modifier(Modifier::Mut)
    }

    pub fn is_prim(&self) -> bool {
        matches!(self, Type::Int)
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "int"),
            Type::Class(c, Modifier::Mut) => write!(f, "{c}"),
            Type::Class(c, m) => write!(f, "{m} {c}"),
        }
    }
}

/// Parses `int`, `C`, `caps C` or `C@caps`.
impl FromStr for Type {
    type Err = String;

    fn from_str(s: &str) -> Result<Type, String> {
        let ident = |c: &str| {
            let ok = c
                .chars()
                .next()
                .is_some_and(|h| h.is_alphabetic() || h == '_')
                && c.chars().all(|h| h.is_alphanumeric() || h == '_');
            if ok {
                Ok(c.to_string())
            } else {
                Err(format!("bad class name `{c}`"))
            }
        };
        let modifier =
            |m: &str| Modifier::parse(m).ok_or_else(|| format!("unknown modifier `{m}`"));
        let s = s.trim();
        if let Some((c, m)) = s.split_once('@') {
            return Ok(Type::Class(ident(c.trim())?, modifier(m.trim())?));
        }
        match s.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["int"] => Ok(Type::Int),
            [c] => Ok(Type::class(ident(c)?)),
            [m, c] => Ok(Type::Class(ident(c)?, modifier(m)?)),
            _ => Err(format!("bad type `{s}`")),
        }
    }
}

/// Binder used for `e1; e2`, which is a block whose variable is unused.
pub const SEQ_BINDER: &str = "_";

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    Const(i64),
    Field(Box<Expr>, String),
    Assign(Box<Expr>, String, Box<Expr>),
    New(String, Vec<Expr>),
    Call(Box<Expr>, String, Vec<Expr>),
    /// `{T x = e; body}`; a missing type marks the sequence sugar.
    Block(Option<Type>, String, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(x: impl Into<String>) -> Expr {
        Expr::Var(x.into())
    }

    pub fn seq(first: Expr, then: Expr) -> Expr {
        Expr::Block(None, SEQ_BINDER.into(), Box::new(first), Box::new(then))
    }

    pub fn is_value(&self) -> bool {
        matches!(self, Expr::Var(_) | Expr::Const(_))
    }

    pub fn free_vars(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut std::collections::BTreeSet<String>) {
        match self {
            Expr::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Expr::Const(_) => {}
            Expr::Field(e, _) => e.collect_free(bound, out),
            Expr::Assign(e, _, v) => {
                e.collect_free(bound, out);
                v.collect_free(bound, out);
            }
            Expr::New(_, args) => args.iter().for_each(|a| a.collect_free(bound, out)),
            Expr::Call(r, _, args) => {
                r.collect_free(bound, out);
                args.iter().for_each(|a| a.collect_free(bound, out));
            }
            Expr::Block(_, x, init, body) => {
                init.collect_free(bound, out);
                bound.push(x.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 1,
            Expr::Field(e, _) => 1 + e.size(),
            Expr::Assign(e, _, v) => 1 + e.size() + v.size(),
            Expr::New(_, args) => 1 + args.iter().map(Expr::size).sum::<usize>(),
            Expr::Call(r, _, args) => 1 + r.size() + args.iter().map(Expr::size).sum::<usize>(),
            Expr::Block(_, _, i, b) => 1 + i.size() + b.size(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub ty: Type,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub ty: Type,
    pub name: String,
    pub coeff: Option<Coeffect>,
}

#[derive(Clone, Debug)]
pub struct MethodDecl {
    pub name: String,
    pub ret: Type,
    pub recv_mod: Modifier,
    /// Declared receiver coeffect; `None` when the method is unannotated.
    pub recv_coeff: Option<Coeffect>,
    pub params: Vec<Param>,
    pub body: Expr,
    pub pos: Pos,
}

impl MethodDecl {
    pub fn is_annotated(&self) -> bool {
        self.recv_coeff.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct ClassDecl {
    pub name: String,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub pos: Pos,
}

// Source positions are not part of a declaration's identity.
impl PartialEq for MethodDecl {
    fn eq(&self, o: &Self) -> bool {
        (
            &self.name,
            &self.ret,
            self.recv_mod,
            &self.recv_coeff,
            &self.params,
            &self.body,
        ) == (
            &o.name,
            &o.ret,
            o.recv_mod,
            &o.recv_coeff,
            &o.params,
            &o.body,
        )
    }
}

impl Eq for MethodDecl {}

impl PartialEq for ClassDecl {
    fn eq(&self, o: &Self) -> bool {
        (&self.name, &self.fields, &self.methods) == (&o.name, &o.fields, &o.methods)
    }
}

impl Eq for ClassDecl {}

/// The method type of `mtype`: receiver and parameter coeffects included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodSig {
    pub recv_mod: Modifier,
    pub recv_coeff: Coeffect,
    pub params: Vec<(String, Type, Coeffect)>,
    pub ret: Type,
}
