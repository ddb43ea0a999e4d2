use std::collections::BTreeMap;

use super::ctx::{CheckError, ErrorCode, TypeCtx};
use super::infer::{infer, Env, Judgment};
use crate::algebra::{Coeffect, Link, LinkGen};
use crate::interp::{Memory, Value};
use crate::lang::{ClassTable, Expr, Type};

/// Typing of a memory: a context over exactly its references, and the
/// fresh link given to each reference.
#[derive(Clone, Debug)]
pub struct MemTyping {
    pub ctx: TypeCtx,
    pub links: BTreeMap<String, Link>,
}

pub(crate) fn check_mem(table: &ClassTable, mem: &Memory) -> Result<(), CheckError> {
    mem.check(table)
        .map_err(|m| CheckError::new(ErrorCode::Memory, m))
}

/// Context of an object's field values: each reference at `{res}`.
fn object_ctx(table: &ClassTable, class: &str, fields: &[Value]) -> Result<TypeCtx, CheckError> {
    let decls = table.fields(class)?;
    let mut g = TypeCtx::new();
    for (fd, v) in decls.iter().zip(fields) {
        if let Value::Ref(r) = v {
            g = g.sum(&TypeCtx::singleton(
                r.clone(),
                fd.ty.erase(),
                Coeffect::res(),
            ));
        }
    }
    Ok(g)
}

/// `Γ_μ + Σ {ℓᵢ} × Γᵢ` with a fresh `ℓᵢ` per reference.
pub fn type_memory(
    table: &ClassTable,
    mem: &Memory,
    gen: &mut LinkGen,
) -> Result<MemTyping, CheckError> {
    check_mem(table, mem)?;
    let mut links = BTreeMap::new();
    let mut base = TypeCtx::new();
    for (r, o) in mem.iter() {
        let l = gen.fresh();
        base.insert(
            r.clone(),
            Type::class(o.class.clone()),
            Coeffect::singleton(l.clone()),
        );
        links.insert(r.clone(), l);
    }
    let mut ctx = base;
    for (r, o) in mem.iter() {
        let gi = object_ctx(table, &o.class, &o.fields)?;
        ctx = ctx.sum(&gi.scale(&Coeffect::singleton(links[r].clone())));
    }
    Ok(MemTyping { ctx, links })
}

/// Types of the references of a memory.
pub fn mem_env(mem: &Memory) -> Env {
    mem.iter()
        .map(|(r, o)| (r.clone(), Type::class(o.class.clone())))
        .collect()
}

/// A configuration judgment: the expression part, the memory part, and
/// their sum.
#[derive(Clone, Debug)]
pub struct ConfJudgment {
    pub expr: Judgment,
    pub mem: MemTyping,
    pub ctx: TypeCtx,
}

impl ConfJudgment {
    pub fn ty(&self) -> &Type {
        &self.expr.ty
    }
}

pub fn type_configuration(
    table: &ClassTable,
    e: &Expr,
    mem: &Memory,
    gen: &mut LinkGen,
) -> Result<ConfJudgment, CheckError> {
    let mt = type_memory(table, mem, gen)?;
    let j = infer(table, &mem_env(mem), e, gen)?;
    if let Some(x) = j.ctx.vars().find(|x| !mem.contains(x)) {
        return Err(CheckError::new(
            ErrorCode::Unbound,
            format!("`{x}` is not a reference in memory"),
        ));
    }
    let ctx = j.ctx.sum(&mt.ctx);
    Ok(ConfJudgment {
        expr: j,
        mem: mt,
        ctx,
    })
}

/// `Restr(Γ+Δ)|Γ = Γ`, erasing types.
pub fn restriction_holds(before: &TypeCtx, after: &TypeCtx) -> bool {
    let g = before.erase();
    let sum = g.sum(&after.erase());
    let vars: Vec<String> = g.vars().cloned().collect();
    sum.restrict(&vars, &g.links()).coeffs() == g.coeffs()
}
