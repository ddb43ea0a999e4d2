use std::collections::BTreeSet;

use indexmap::IndexMap;

use super::ast::*;
use super::lexer::{lex, Tok};
use super::table::{ClassTable, Program};
use super::{LangError, LangErrorKind};
use crate::algebra::{Coeffect, Link};

pub fn parse(src: &str) -> Result<Program, LangError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        i: 0,
        class_refs: Vec::new(),
    };
    let program = p.program()?;
    for (name, pos) in &p.class_refs {
        if !program.table.has_class(name) {
            return Err(LangError::new(
                LangErrorKind::UnknownClass,
                *pos,
                format!("unknown class `{name}`"),
            ));
        }
    }
    Ok(program)
}

/// Parse a lone expression (no class declarations).
pub fn parse_expr(src: &str) -> Result<Expr, LangError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        i: 0,
        class_refs: Vec::new(),
    };
    let e = p.seq(&Tok::Eof)?;
    p.expect(&Tok::Eof)?;
    Ok(e)
}

enum Item {
    Decl(Type, String, Expr),
    Expr(Expr),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    class_refs: Vec<(String, Pos)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        self.peek_at(0)
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let idx = (self.i + k).min(self.toks.len() - 1);
        &self.toks[idx].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i.min(self.toks.len() - 1)].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i < self.toks.len() - 1 {
            self.i += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, LangError> {
        Err(LangError::syntax(
            self.pos(),
            format!("expected {expected}, found {}", self.peek().describe()),
        ))
    }

    fn expect(&mut self, t: &Tok) -> Result<(), LangError> {
        if self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.error(&t.describe())
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, LangError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                if s == SEQ_BINDER {
                    return Err(LangError::syntax(pos, "`_` is reserved".into()));
                }
                self.bump();
                Ok(s)
            }
            _ => self.error("identifier"),
        }
    }

    fn program(&mut self) -> Result<Program, LangError> {
        let mut classes: IndexMap<String, ClassDecl> = IndexMap::new();
        while *self.peek() == Tok::Class {
            let c = self.class_decl()?;
            if classes.contains_key(&c.name) {
                return Err(LangError::new(
                    LangErrorKind::Duplicate,
                    c.pos,
                    format!("duplicate class `{}`", c.name),
                ));
            }
            classes.insert(c.name.clone(), c);
        }
        self.eat(&Tok::Semi);
        let main = self.seq(&Tok::Eof)?;
        self.expect(&Tok::Eof)?;
        Ok(Program {
            table: ClassTable::new(classes),
            main,
        })
    }

    fn class_decl(&mut self) -> Result<ClassDecl, LangError> {
        let pos = self.pos();
        self.expect(&Tok::Class)?;
        let name = self.ident()?;
        self.expect(&Tok::LBrace)?;
        let mut fields: Vec<FieldDecl> = Vec::new();
        let mut methods: Vec<MethodDecl> = Vec::new();
        while *self.peek() != Tok::RBrace {
            let mpos = self.pos();
            let ty = self.ty()?;
            let mname = self.ident()?;
            if self.eat(&Tok::Semi) {
                if let Some(m) = ty.modifier() {
                    if m != Modifier::Mut && m != Modifier::Imm {
                        return Err(LangError::syntax(
                            mpos,
                            format!("field `{mname}` may only be declared mut or imm"),
                        ));
                    }
                }
                if fields.iter().any(|f| f.name == mname) {
                    return Err(LangError::new(
                        LangErrorKind::Duplicate,
                        mpos,
                        format!("duplicate field `{mname}` in `{name}`"),
                    ));
                }
                fields.push(FieldDecl { ty, name: mname });
            } else {
                let m = self.method_rest(ty, mname, mpos)?;
                if methods.iter().any(|x| x.name == m.name) {
                    return Err(LangError::new(
                        LangErrorKind::Duplicate,
                        mpos,
                        format!("duplicate method `{}` in `{name}`", m.name),
                    ));
                }
                methods.push(m);
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(ClassDecl {
            name,
            fields,
            methods,
            pos,
        })
    }

    fn method_rest(&mut self, ret: Type, name: String, pos: Pos) -> Result<MethodDecl, LangError> {
        let mut recv_mod = Modifier::Mut;
        let mut recv_coeff = None;
        if self.eat(&Tok::LBrack) {
            if let Tok::Mod(m) = self.peek().clone() {
                self.bump();
                recv_mod = Modifier::parse(&m).unwrap();
            }
            if self.eat(&Tok::Caret) {
                recv_coeff = Some(self.coeff()?);
            }
            self.expect(&Tok::RBrack)?;
        }
        self.expect(&Tok::LParen)?;
        let mut params: Vec<Param> = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                let ppos = self.pos();
                let ty = self.ty()?;
                let coeff = if self.eat(&Tok::Caret) {
                    Some(self.coeff()?)
                } else {
                    None
                };
                let pname = self.ident()?;
                if pname == "this" || params.iter().any(|p| p.name == pname) {
                    return Err(LangError::new(
                        LangErrorKind::Duplicate,
                        ppos,
                        format!("parameter name `{pname}` repeated or reserved in `{name}`"),
                    ));
                }
                params.push(Param {
                    ty,
                    name: pname,
                    coeff,
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        let annotated = recv_coeff.is_some();
        if params.iter().any(|p| p.coeff.is_some() != annotated) {
            return Err(LangError::syntax(
                pos,
                format!("method `{name}` must annotate coeffects on the receiver and every parameter, or on none"),
            ));
        }
        self.expect(&Tok::LBrace)?;
        let body = self.seq(&Tok::RBrace)?;
        self.expect(&Tok::RBrace)?;
        Ok(MethodDecl {
            name,
            ret,
            recv_mod,
            recv_coeff,
            params,
            body,
            pos,
        })
    }

    fn coeff(&mut self) -> Result<Coeffect, LangError> {
        self.expect(&Tok::LBrace)?;
        let mut out = Coeffect::empty();
        if *self.peek() != Tok::RBrace {
            loop {
                let l = self.ident()?;
                out.insert(if l == "res" {
                    Link::Res
                } else {
                    Link::Named(l)
                });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RBrace)?;
        Ok(out)
    }

    fn ty(&mut self) -> Result<Type, LangError> {
        let pos = self.pos();
        let m = if let Tok::Mod(m) = self.peek().clone() {
            self.bump();
            Some(Modifier::parse(&m).unwrap())
        } else {
            None
        };
        match self.peek().clone() {
            Tok::IntKw => {
                if m.is_some() {
                    return Err(LangError::syntax(
                        pos,
                        "modifiers apply only to class types".into(),
                    ));
                }
                self.bump();
                Ok(Type::Int)
            }
            Tok::Ident(c) => {
                let cpos = self.pos();
                self.bump();
                self.class_refs.push((c.clone(), cpos));
                Ok(Type::Class(c, m.unwrap_or(Modifier::Mut)))
            }
            _ => self.error("type"),
        }
    }

    fn is_decl_start(&self) -> bool {
        match self.peek() {
            Tok::Mod(_) => true,
            Tok::IntKw | Tok::Ident(_) => {
                matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::Eq
            }
            _ => false,
        }
    }

    fn seq(&mut self, end: &Tok) -> Result<Expr, LangError> {
        let mut items = Vec::new();
        loop {
            if self.is_decl_start() {
                let ty = self.ty()?;
                let x = self.ident()?;
                self.expect(&Tok::Eq)?;
                let e = self.expr()?;
                items.push(Item::Decl(ty, x, e));
                if *self.peek() != Tok::Semi {
                    return self.error("`;` after declaration");
                }
            } else {
                items.push(Item::Expr(self.expr()?));
            }
            if !self.eat(&Tok::Semi) {
                break;
            }
            if self.peek() == end {
                return self.error("expression after `;`");
            }
        }
        if self.peek() != end {
            return self.error(&end.describe());
        }
        let mut rest = match items.pop() {
            Some(Item::Expr(e)) => e,
            _ => unreachable!("a declaration is always followed by `;`"),
        };
        while let Some(item) = items.pop() {
            rest = match item {
                Item::Decl(t, x, e) => Expr::Block(Some(t), x, Box::new(e), Box::new(rest)),
                Item::Expr(e) => Expr::seq(e, rest),
            };
        }
        Ok(rest)
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        let pos = self.pos();
        let lhs = self.postfix()?;
        if self.eat(&Tok::Eq) {
            let rhs = self.expr()?;
            match lhs {
                Expr::Field(recv, f) => Ok(Expr::Assign(recv, f, Box::new(rhs))),
                _ => Err(LangError::syntax(
                    pos,
                    "left side of `=` must be a field access".into(),
                )),
            }
        } else {
            Ok(lhs)
        }
    }

    fn postfix(&mut self) -> Result<Expr, LangError> {
        let mut e = self.primary()?;
        while self.eat(&Tok::Dot) {
            let name = self.ident()?;
            if *self.peek() == Tok::LParen {
                let args = self.args()?;
                e = Expr::Call(Box::new(e), name, args);
            } else {
                e = Expr::Field(Box::new(e), name);
            }
        }
        Ok(e)
    }

    fn args(&mut self) -> Result<Vec<Expr>, LangError> {
        self.expect(&Tok::LParen)?;
        let mut out = Vec::new();
        if *self.peek() != Tok::RParen {
            loop {
                out.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(&Tok::RParen)?;
        Ok(out)
    }

    fn primary(&mut self) -> Result<Expr, LangError> {
        match self.peek().clone() {
            Tok::Ident(_) => Ok(Expr::Var(self.ident()?)),
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Const(n))
            }
            Tok::Minus => {
                self.bump();
                match self.bump() {
                    Tok::Int(n) => Ok(Expr::Const(-n)),
                    _ => self.error("integer after `-`"),
                }
            }
            Tok::New => {
                self.bump();
                let pos = self.pos();
                let c = self.ident()?;
                self.class_refs.push((c.clone(), pos));
                let args = self.args()?;
                Ok(Expr::New(c, args))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrace => {
                self.bump();
                let e = self.seq(&Tok::RBrace)?;
                self.expect(&Tok::RBrace)?;
                Ok(e)
            }
            _ => self.error("expression"),
        }
    }
}

/// Names bound or used anywhere in an expression; used to pick fresh names.
pub fn all_names(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Var(x) => {
            out.insert(x.clone());
        }
        Expr::Const(_) => {}
        Expr::Field(r, _) => all_names(r, out),
        Expr::Assign(r, _, v) => {
            all_names(r, out);
            all_names(v, out);
        }
        Expr::New(_, args) => args.iter().for_each(|a| all_names(a, out)),
        Expr::Call(r, _, args) => {
            all_names(r, out);
            args.iter().for_each(|a| all_names(a, out));
        }
        Expr::Block(_, x, i, b) => {
            out.insert(x.clone());
            all_names(i, out);
            all_names(b, out);
        }
    }
}
