use std::collections::{BTreeMap, BTreeSet};

use petgraph::unionfind::UnionFind;

use super::infer::{infer_mod, Mode};
use super::lattice::modif;
use crate::algebra::{Coeffect, LinkGen};
use crate::interp::{reach, sharing_rel_filtered, Memory, Partition, Value};
use crate::lang::{ClassTable, Expr, Modifier, Type};
use crate::sharing::{check_mem, CheckError, Env, ErrorCode, Judgment, MemTyping, TypeCtx};

/// Modifier of each reference in a memory.
pub type ModMap = BTreeMap<String, Modifier>;

fn mem_err(msg: String) -> CheckError {
    CheckError::new(ErrorCode::Memory, msg)
}

/// Required modifier of every heap edge `x.f ↦ y`: `T_f[mods(x)]`.
fn edges<'m>(
    table: &'m ClassTable,
    mem: &'m Memory,
) -> impl Iterator<Item = (&'m str, &'m str, &'m Type)> + 'm {
    mem.iter().flat_map(move |(x, o)| {
        let decls = table.fields(&o.class).unwrap_or(&[]);
        decls
            .iter()
            .zip(&o.fields)
            .filter_map(move |(fd, v)| match v {
                Value::Ref(y) => Some((x.as_str(), y.as_str(), &fd.ty)),
                Value::Int(_) => None,
            })
    })
}

/// The `⊩` judgment: every reference typed with its given modifier, field
/// values at `T_i[m]` exactly, `imm` references under fresh links.
pub fn type_memory_mod(
    table: &ClassTable,
    mem: &Memory,
    mods: &ModMap,
    gen: &mut LinkGen,
) -> Result<MemTyping, CheckError> {
    check_mem(table, mem)?;
    for (r, _) in mem.iter() {
        match mods.get(r) {
            None => return Err(mem_err(format!("reference `{r}` has no modifier"))),
            Some(Modifier::Read | Modifier::Caps) => {
                return Err(mem_err(format!("reference `{r}` cannot be {}", mods[r])));
            }
            Some(_) => {}
        }
    }
    let mut links = BTreeMap::new();
    let mut ctx = TypeCtx::new();
    for (r, o) in mem.iter() {
        let l = gen.fresh();
        ctx.insert(
            r.clone(),
            Type::Class(o.class.clone(), mods[r]),
            Coeffect::singleton(l.clone()),
        );
        links.insert(r.clone(), l);
    }
    for (x, o) in mem.iter() {
        let m = mods[x];
        let mut gx = TypeCtx::new();
        for (fd, v) in table.fields(&o.class)?.iter().zip(&o.fields) {
            let Value::Ref(y) = v else { continue };
            let want = modif(&fd.ty, m).expect("field modifiers combine with reference modifiers");
            let have = Type::Class(mem.get(y).expect("checked").class.clone(), mods[y]);
            if want != have {
                return Err(mem_err(format!(
                    "`{y}` is `{have}` but `{x}.{}` requires `{want}`",
                    fd.name
                )));
            }
            let c = if mods[y] == Modifier::Imm {
                gen.fresh_coeffect()
            } else {
                Coeffect::res()
            };
            gx = gx.sum(&TypeCtx::singleton(y.clone(), have, c));
        }
        ctx = ctx.sum(&gx.scale(&Coeffect::singleton(links[x].clone())));
    }
    Ok(MemTyping { ctx, links })
}

/// Sharing through edges whose endpoints are both at most `mut`.
pub fn mod_sharing(mem: &Memory, mods: &ModMap) -> Partition {
    sharing_rel_filtered(mem, |r| {
        mods.get(r)
            .is_some_and(|m| super::lattice::leq(*m, Modifier::Mut))
    })
}

/// Reachability from an `imm` reference yields `imm`, from a seal only that
/// seal or `imm`, from `mut` only `mut` or `imm`.
pub fn deep_modifiers_hold(mem: &Memory, mods: &ModMap) -> Result<(), String> {
    for (x, _) in mem.iter() {
        let mx = mods[x];
        for y in reach(mem, x) {
            let my = mods[&y];
            let ok = my == Modifier::Imm || (mx != Modifier::Imm && my == mx);
            if !ok {
                return Err(format!("`{y}` ({my}) is reachable from `{x}` ({mx})"));
            }
        }
    }
    Ok(())
}

/// References forced to `imm`: those reachable from `seeds` or from the
/// value of an `imm` field.
pub fn imm_closure(table: &ClassTable, mem: &Memory, seeds: &BTreeSet<String>) -> BTreeSet<String> {
    let mut roots: BTreeSet<&str> = seeds
        .iter()
        .map(String::as_str)
        .filter(|r| mem.contains(r))
        .collect();
    for (_, y, ft) in edges(table, mem) {
        if ft.modifier() == Some(Modifier::Imm) {
            roots.insert(y);
        }
    }
    roots.into_iter().flat_map(|r| reach(mem, r)).collect()
}

/// The references any typing must hold `imm`: the [`imm_closure`], plus
/// every reference holding one of them through a `mut` field (that field
/// would otherwise need a `mut` target), closed again under reachability.
fn forced_imm(table: &ClassTable, mem: &Memory, seeds: &BTreeSet<String>) -> BTreeSet<String> {
    let mut imm = imm_closure(table, mem, seeds);
    loop {
        let back: Vec<&str> = edges(table, mem)
            .filter(|(x, y, ft)| {
                ft.modifier() == Some(Modifier::Mut) && imm.contains(*y) && !imm.contains(*x)
            })
            .map(|(x, _, _)| x)
            .collect();
        if back.is_empty() {
            return imm;
        }
        let more: Vec<String> = back.into_iter().flat_map(|x| reach(mem, x)).collect();
        imm.extend(more);
    }
}

/// A typed configuration under the modifier rules.
#[derive(Clone, Debug)]
pub struct ModConfJudgment {
    pub expr: Judgment,
    pub mem: MemTyping,
    pub mods: ModMap,
    pub ctx: TypeCtx,
}

impl ModConfJudgment {
    pub fn ty(&self) -> &Type {
        &self.expr.ty
    }
}

/// Type a runtime configuration. References start as `mut`, or `imm` when
/// forced by `imm_seeds` or `imm` fields (see [`forced_imm`]); promotions inside `e` may seal
/// some of them. Seals then spread across `mut` fields in both directions,
/// and seal groups that touch are merged into one seal. A reference the
/// expression uses as `mut` but that lands in a sealed group is retried
/// with a sealed type.
///
/// In [`Mode::Source`] the expression is checked as a program whose free
/// variables are the references, at their `mut` or `imm` modifiers: this is
/// how initial configurations are typed. Configurations reached by
/// reduction use [`Mode::Runtime`].
pub fn type_configuration_mod(
    table: &ClassTable,
    e: &Expr,
    mem: &Memory,
    imm_seeds: &BTreeSet<String>,
    expected: Option<&Type>,
    mode: Mode,
    gen: &mut LinkGen,
) -> Result<ModConfJudgment, CheckError> {
    check_mem(table, mem)?;
    let imm = forced_imm(table, mem, imm_seeds);
    let base = |r: &str| {
        if imm.contains(r) {
            Modifier::Imm
        } else {
            Modifier::Mut
        }
    };
    let mut env: Env = mem
        .iter()
        .map(|(r, o)| (r.clone(), Type::Class(o.class.clone(), base(r))))
        .collect();

    // A `mut` field forces its target to carry the holder's modifier, so
    // references linked by `mut` fields outside the `imm` part share one
    // modifier: a seal if the expression sealed any of them, else `mut`.
    let index: BTreeMap<&str, usize> = mem.refs().map(String::as_str).zip(0..).collect();
    let mut uf: UnionFind<usize> = UnionFind::new(index.len());
    for (x, y, ft) in edges(table, mem) {
        if ft.modifier() == Some(Modifier::Mut) && !imm.contains(x) && !imm.contains(y) {
            uf.union(index[x], index[y]);
        }
    }
    let mut first_err = None;
    // Each retry seals at least one more reference, so this terminates.
    for _ in 0..=index.len() {
        let j = match infer_mod(table, &env, e, mode, expected, gen) {
            Ok(j) => j,
            Err(err) => return Err(first_err.unwrap_or(err)),
        };
        if let Some(x) = j.ctx.vars().find(|x| !mem.contains(x)) {
            return Err(CheckError::new(
                ErrorCode::Unbound,
                format!("`{x}` is not a reference in memory"),
            ));
        }
        let mut seal_of: BTreeMap<usize, u64> = BTreeMap::new();
        for (r, &i) in &index {
            if let Some(Modifier::Seal(k)) = j.ctx.ty(r).and_then(Type::modifier) {
                let e = seal_of.entry(uf.find(i)).or_insert(k);
                *e = (*e).min(k);
            }
        }
        let mut mods: ModMap = BTreeMap::new();
        let mut clash = Vec::new();
        for (r, &i) in &index {
            let fixed = j.ctx.ty(r).and_then(Type::modifier);
            let m = match (fixed, seal_of.get(&uf.find(i))) {
                (Some(Modifier::Seal(_)), Some(k)) => Modifier::Seal(*k),
                (Some(Modifier::Mut), Some(k)) => {
                    clash.push((r.to_string(), *k));
                    Modifier::Mut
                }
                (Some(m), _) => m,
                (None, _) if imm.contains(*r) => Modifier::Imm,
                (None, Some(k)) => Modifier::Seal(*k),
                (None, None) => Modifier::Mut,
            };
            mods.insert(r.to_string(), m);
        }
        // The expression sees a `mut` reference inside a sealed group:
        // retry with that reference sealed in the environment.
        if !clash.is_empty() {
            if first_err.is_none() {
                first_err = type_memory_mod(table, mem, &mods, gen).err();
            }
            for (r, k) in clash {
                let t = env[&r].with_modifier(Modifier::Seal(k));
                env.insert(r, t);
            }
            continue;
        }
        return finish(table, mem, j, mods, gen);
    }
    Err(first_err.expect("a clash was recorded"))
}

fn finish(
    table: &ClassTable,
    mem: &Memory,
    j: Judgment,
    mods: ModMap,
    gen: &mut LinkGen,
) -> Result<ModConfJudgment, CheckError> {
    let mt = type_memory_mod(table, mem, &mods, gen)?;
    let mut ectx = j.ctx.clone();
    for r in j.ctx.vars() {
        ectx.set_type(r, mt.ctx.ty(r).expect("reference typed").clone());
    }
    let ctx = ectx.sum(&mt.ctx);
    Ok(ModConfJudgment {
        expr: j,
        mem: mt,
        mods,
        ctx,
    })
}
