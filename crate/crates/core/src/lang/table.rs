use std::collections::BTreeMap;

use indexmap::IndexMap;

use super::ast::*;
use super::{LangError, LangErrorKind};
use crate::algebra::{Coeffect, Link, LinkGen};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClassTable {
    classes: IndexMap<String, ClassDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub table: ClassTable,
    pub main: Expr,
}

fn unknown(msg: String) -> LangError {
    LangError::new(LangErrorKind::UnknownMember, Pos::default(), msg)
}

impl ClassTable {
    pub fn new(classes: IndexMap<String, ClassDecl>) -> Self {
        ClassTable { classes }
    }

    pub fn has_class(&self, c: &str) -> bool {
        self.classes.contains_key(c)
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.classes.values()
    }

    pub fn class(&self, c: &str) -> Result<&ClassDecl, LangError> {
        self.classes.get(c).ok_or_else(|| {
            LangError::new(
                LangErrorKind::UnknownClass,
                Pos::default(),
                format!("unknown class `{c}`"),
            )
        })
    }

    pub fn fields(&self, c: &str) -> Result<&[FieldDecl], LangError> {
        Ok(&self.class(c)?.fields)
    }

    /// Index and declaration of field `f` of class `c`.
    pub fn field(&self, c: &str, f: &str) -> Result<(usize, &FieldDecl), LangError> {
        self.fields(c)?
            .iter()
            .enumerate()
            .find(|(_, d)| d.name == f)
            .ok_or_else(|| unknown(format!("class `{c}` has no field `{f}`")))
    }

    pub fn method(&self, c: &str, m: &str) -> Result<&MethodDecl, LangError> {
        self.class(c)?
            .methods
            .iter()
            .find(|d| d.name == m)
            .ok_or_else(|| unknown(format!("class `{c}` has no method `{m}`")))
    }

    /// The coeffect-annotated method type. Fails for methods whose
    /// coeffects are neither declared nor installed by inference.
    pub fn mtype(&self, c: &str, m: &str) -> Result<MethodSig, LangError> {
        let d = self.method(c, m)?;
        let recv_coeff = d
            .recv_coeff
            .clone()
            .ok_or_else(|| unknown(format!("method `{c}.{m}` has no coeffects yet")))?;
        let params = d
            .params
            .iter()
            .map(|p| {
                (
                    p.name.clone(),
                    p.ty.clone(),
                    p.coeff.clone().unwrap_or_default(),
                )
            })
            .collect();
        Ok(MethodSig {
            recv_mod: d.recv_mod,
            recv_coeff,
            params,
            ret: d.ret.clone(),
        })
    }

    pub fn mbody(&self, c: &str, m: &str) -> Result<(Vec<String>, &Expr), LangError> {
        let d = self.method(c, m)?;
        Ok((d.params.iter().map(|p| p.name.clone()).collect(), &d.body))
    }

    /// Install coeffects for an unannotated method.
    pub fn set_coeffects(&mut self, c: &str, m: &str, recv: Coeffect, params: Vec<Coeffect>) {
        let d = self
            .classes
            .get_mut(c)
            .and_then(|cd| cd.methods.iter_mut().find(|d| d.name == m))
            .expect("method exists");
        d.recv_coeff = Some(recv);
        for (p, x) in d.params.iter_mut().zip(params) {
            p.coeff = Some(x);
        }
    }
}

/// Rename every non-`res` link of a signature to a fresh one, consistently
/// across receiver and parameters.
pub fn alpha_fresh_sig(sig: &MethodSig, gen: &mut LinkGen) -> MethodSig {
    let mut map: BTreeMap<Link, Link> = BTreeMap::new();
    let mut rename = |l: &Link| map.entry(l.clone()).or_insert_with(|| gen.fresh()).clone();
    let recv_coeff = sig.recv_coeff.rename(&mut rename);
    let params = sig
        .params
        .iter()
        .map(|(n, t, c)| (n.clone(), t.clone(), c.rename(&mut rename)))
        .collect();
    MethodSig {
        recv_mod: sig.recv_mod,
        recv_coeff,
        params,
        ret: sig.ret.clone(),
    }
}
