use std::collections::{BTreeMap, BTreeSet};

use super::ctx::{CheckError, ErrorCode, TypeCtx};
use crate::algebra::{Coeffect, CoeffectCtx, LinkGen};
use crate::lang::{alpha_fresh_sig, ClassTable, Expr, Type};

/// Types of the free variables of an expression.
pub type Env = BTreeMap<String, Type>;

/// A derivation node. The node's context is the sum, over children, of
/// `factors[i] × children[i].ctx`, with `drop_var` removed from the last
/// child's context first. Leaves carry their context directly.
#[derive(Clone, Debug)]
pub struct Deriv {
    pub rule: &'static str,
    pub expr: String,
    pub ty: Type,
    pub ctx: CoeffectCtx,
    pub factors: Vec<Coeffect>,
    pub drop_var: Option<String>,
    pub children: Vec<Deriv>,
}

impl Deriv {
    pub(crate) fn leaf(rule: &'static str, e: &Expr, ty: Type, ctx: CoeffectCtx) -> Deriv {
        Deriv {
            rule,
            expr: e.to_string(),
            ty,
            ctx,
            factors: vec![],
            drop_var: None,
            children: vec![],
        }
    }

    /// Recompute every inner node's context from its children and compare.
    pub fn replays(&self) -> bool {
        if self.children.is_empty() {
            return true;
        }
        self.children.iter().all(Deriv::replays) && self.recompute() == self.ctx
    }

    fn recompute(&self) -> CoeffectCtx {
        let mut acc = CoeffectCtx::new();
        let last = self.children.len() - 1;
        for (i, (f, child)) in self.factors.iter().zip(&self.children).enumerate() {
            let mut c = child.ctx.clone();
            if i == last {
                if let Some(x) = &self.drop_var {
                    c.remove(x);
                }
            }
            acc = acc.sum(&c.scale(f));
        }
        acc
    }

    /// Rule names in pre-order.
    pub fn rules(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule];
        for c in &self.children {
            out.extend(c.rules());
        }
        out
    }
}

/// A typing judgment `Γ ⊢ e : T` with its derivation.
#[derive(Clone, Debug)]
pub struct Judgment {
    pub ctx: TypeCtx,
    pub ty: Type,
    pub deriv: Deriv,
    /// Variables the expression was checked against.
    pub env_vars: BTreeSet<String>,
}

impl Judgment {
    /// `x` is lent when its coeffect does not contain `res`.
    pub fn is_lent(&self, x: &str) -> Result<bool, CheckError> {
        if !self.env_vars.contains(x) && !self.ctx.contains(x) {
            return Err(CheckError::new(
                ErrorCode::Unbound,
                format!("unknown variable `{x}`"),
            ));
        }
        Ok(!self.ctx.coeff(x).contains_res())
    }

    pub fn is_capsule(&self) -> bool {
        self.ctx.iter().all(|(_, _, c)| !c.contains_res())
    }
}

pub(crate) fn same_type(a: &Type, b: &Type) -> bool {
    a.erase() == b.erase()
}

pub(crate) fn mismatch(what: &str, expected: &Type, found: &Type) -> CheckError {
    CheckError::new(
        ErrorCode::Type,
        format!(
            "{what}: expected `{}`, found `{}`",
            expected.erase(),
            found.erase()
        ),
    )
}

pub(crate) fn class_of<'t>(t: &'t Type, what: &str) -> Result<&'t str, CheckError> {
    t.class_name()
        .ok_or_else(|| CheckError::new(ErrorCode::Type, format!("{what} has primitive type `int`")))
}

pub(crate) fn unbound(x: &str) -> CheckError {
    CheckError::new(ErrorCode::Unbound, format!("unbound variable `{x}`"))
}

pub(crate) fn arity(what: &str, expected: usize, found: usize) -> CheckError {
    CheckError::new(
        ErrorCode::Arity,
        format!("{what} expects {expected} arguments, got {found}"),
    )
}

/// Method type lookup that distinguishes methods still waiting for
/// inferred coeffects.
pub(crate) fn lookup_sig(
    table: &ClassTable,
    c: &str,
    m: &str,
) -> Result<crate::lang::MethodSig, CheckError> {
    let d = table.method(c, m)?;
    if !d.is_annotated() {
        return Err(CheckError::new(
            ErrorCode::Recursion,
            format!("`{c}.{m}` has no coeffects yet; recursive methods must be annotated"),
        ));
    }
    Ok(table.mtype(c, m)?)
}

type Out = (TypeCtx, Type, Deriv);

/// One summand of a linear combination: factor, context, derivation.
type Part = (Coeffect, TypeCtx, Deriv);

pub(crate) fn combine(
    rule: &'static str,
    e: &Expr,
    ty: Type,
    parts: Vec<Part>,
    drop: Option<String>,
) -> Out {
    let mut ctx = TypeCtx::new();
    let last = parts.len().saturating_sub(1);
    let mut factors = Vec::new();
    let mut children = Vec::new();
    for (i, (f, mut g, d)) in parts.into_iter().enumerate() {
        if i == last {
            if let Some(x) = &drop {
                g.remove(x);
            }
        }
        ctx = ctx.sum(&g.scale(&f));
        factors.push(f);
        children.push(d);
    }
    let deriv = Deriv {
        rule,
        expr: e.to_string(),
        ty: ty.clone(),
        ctx: ctx.coeffs().clone(),
        factors,
        drop_var: drop,
        children,
    };
    (ctx, ty, deriv)
}

/// Scale by a fresh singleton, recorded as a unary node named `rule`.
pub(crate) fn fresh_scale(rule: &'static str, e: &Expr, out: Out, gen: &mut LinkGen) -> Out {
    let (g, ty, d) = out;
    let l = gen.fresh_coeffect();
    combine(rule, e, ty, vec![(l, g, d)], None)
}

struct Infer<'a> {
    table: &'a ClassTable,
    gen: &'a mut LinkGen,
}

impl Infer<'_> {
    fn go(&mut self, env: &Env, e: &Expr) -> Result<Out, CheckError> {
        let out = self.syntax(env, e)?;
        Ok(if out.1.is_prim() {
            fresh_scale("t-prim", e, out, self.gen)
        } else {
            out
        })
    }

    fn syntax(&mut self, env: &Env, e: &Expr) -> Result<Out, CheckError> {
        let one = Coeffect::res;
        match e {
            Expr::Var(x) => {
                let t = env.get(x).ok_or_else(|| unbound(x))?.erase();
                let ctx = TypeCtx::singleton(x.clone(), t.clone(), Coeffect::res());
                let d = Deriv::leaf("t-var", e, t.clone(), ctx.coeffs().clone());
                Ok((ctx, t, d))
            }
            Expr::Const(_) => Ok((
                TypeCtx::new(),
                Type::Int,
                Deriv::leaf("t-const", e, Type::Int, CoeffectCtx::new()),
            )),
            Expr::Field(r, f) => {
                let (g, t, d) = self.go(env, r)?;
                let c = class_of(&t, "field receiver")?;
                let (_, fd) = self.table.field(c, f)?;
                let ft = fd.ty.erase();
                Ok(combine("t-field-access", e, ft, vec![(one(), g, d)], None))
            }
            Expr::Assign(r, f, v) => {
                let (g, t, d) = self.go(env, r)?;
                let c = class_of(&t, "assignment receiver")?;
                let ft = self.table.field(c, f)?.1.ty.erase();
                let (gv, tv, dv) = self.go(env, v)?;
                if !same_type(&ft, &tv) {
                    return Err(mismatch(&format!("assignment to `{f}`"), &ft, &tv));
                }
                Ok(combine(
                    "t-field-assign",
                    e,
                    ft,
                    vec![(one(), g, d), (one(), gv, dv)],
                    None,
                ))
            }
            Expr::New(c, args) => {
                let fields = self.table.fields(c)?.to_vec();
                if fields.len() != args.len() {
                    return Err(arity(&format!("`new {c}`"), fields.len(), args.len()));
                }
                let mut parts = Vec::new();
                for (fd, a) in fields.iter().zip(args) {
                    let (g, t, d) = self.go(env, a)?;
                    if !same_type(&fd.ty, &t) {
                        return Err(mismatch(
                            &format!("field `{}` of `new {c}`", fd.name),
                            &fd.ty,
                            &t,
                        ));
                    }
                    parts.push((one(), g, d));
                }
                Ok(combine("t-new", e, Type::class(c.clone()), parts, None))
            }
            Expr::Call(recv, m, args) => {
                let (g0, t0, d0) = self.go(env, recv)?;
                let c = class_of(&t0, "method receiver")?.to_string();
                let sig = alpha_fresh_sig(&lookup_sig(self.table, &c, m)?, self.gen);
                if sig.params.len() != args.len() {
                    return Err(arity(&format!("`{c}.{m}`"), sig.params.len(), args.len()));
                }
                let mut parts = vec![(sig.recv_coeff.union(&self.gen.fresh_coeffect()), g0, d0)];
                for ((pname, pt, pc), a) in sig.params.iter().zip(args) {
                    let (g, t, d) = self.go(env, a)?;
                    if !same_type(pt, &t) {
                        return Err(mismatch(
                            &format!("argument `{pname}` of `{c}.{m}`"),
                            pt,
                            &t,
                        ));
                    }
                    parts.push((pc.union(&self.gen.fresh_coeffect()), g, d));
                }
                Ok(combine("t-invk", e, sig.ret.erase(), parts, None))
            }
            Expr::Block(decl, x, init, body) => {
                let (gi, ti, di) = self.go(env, init)?;
                let bt = match decl {
                    Some(t) if !same_type(t, &ti) => {
                        return Err(mismatch(&format!("initializer of `{x}`"), t, &ti))
                    }
                    Some(t) => t.erase(),
                    None => ti,
                };
                let mut inner = env.clone();
                inner.insert(x.clone(), bt);
                let (gb, tb, db) = self.go(&inner, body)?;
                let xc = gb.coeff(x);
                let l = self.gen.fresh_coeffect();
                Ok(combine(
                    "t-block",
                    e,
                    tb,
                    vec![(xc.union(&l), gi, di), (one(), gb, db)],
                    Some(x.clone()),
                ))
            }
        }
    }
}

/// Infer the sharing judgment of `e` under `env`. Class types in `env` are
/// read without their modifiers.
pub fn infer(
    table: &ClassTable,
    env: &Env,
    e: &Expr,
    gen: &mut LinkGen,
) -> Result<Judgment, CheckError> {
    let (ctx, ty, deriv) = Infer { table, gen }.go(env, e)?;
    Ok(Judgment {
        ctx,
        ty,
        deriv,
        env_vars: env.keys().cloned().collect(),
    })
}

/// Body checker used by [`prepare_table`] and [`check_method_coherence`]:
/// given the declared return type, returns the body's context and type.
pub type BodyInfer<'f> = dyn Fn(&ClassTable, &Env, &Expr, &Type, &mut LinkGen) -> Result<(TypeCtx, Type), CheckError>
    + 'f;

pub(crate) fn method_env(table: &ClassTable, c: &str, m: &str) -> Result<Env, CheckError> {
    let d = table.method(c, m)?;
    let mut env = Env::new();
    env.insert("this".into(), Type::Class(c.to_string(), d.recv_mod));
    for p in &d.params {
        env.insert(p.name.clone(), p.ty.clone());
    }
    Ok(env)
}

/// Install inferred coeffects for every unannotated method, callees first.
/// Unannotated methods that (mutually) recurse are rejected.
pub fn prepare_table_with(
    table: &ClassTable,
    gen: &mut LinkGen,
    body: &BodyInfer,
) -> Result<ClassTable, CheckError> {
    let mut t = table.clone();
    let mut pending: Vec<(String, String)> = table
        .classes()
        .flat_map(|c| {
            c.methods
                .iter()
                .filter(|m| !m.is_annotated())
                .map(move |m| (c.name.clone(), m.name.clone()))
        })
        .collect();
    while !pending.is_empty() {
        let mut still = Vec::new();
        for (c, m) in &pending {
            let env = method_env(&t, c, m)?;
            let (_, b) = t.mbody(c, m)?;
            let ret = t.method(c, m)?.ret.clone();
            match body(&t, &env, &b.clone(), &ret, gen) {
                Ok((ctx, ty)) => {
                    if !same_type(&ret, &ty) {
                        return Err(mismatch(&format!("body of `{c}.{m}`"), &ret, &ty));
                    }
                    let params: Vec<Coeffect> = t
                        .method(c, m)?
                        .params
                        .iter()
                        .map(|p| ctx.coeff(&p.name))
                        .collect();
                    t.set_coeffects(c, m, ctx.coeff("this"), params);
                }
                Err(e) if e.code == ErrorCode::Recursion => still.push((c.clone(), m.clone())),
                Err(e) => return Err(CheckError::new(e.code, format!("in `{c}.{m}`: {}", e.msg))),
            }
        }
        if still.len() == pending.len() {
            let names: Vec<String> = still.iter().map(|(c, m)| format!("{c}.{m}")).collect();
            return Err(CheckError::new(
                ErrorCode::Recursion,
                format!(
                    "recursive methods require coeffect annotations: {}",
                    names.join(", ")
                ),
            ));
        }
        pending = still;
    }
    Ok(t)
}

fn sharing_body(
    t: &ClassTable,
    env: &Env,
    e: &Expr,
    _ret: &Type,
    gen: &mut LinkGen,
) -> Result<(TypeCtx, Type), CheckError> {
    infer(t, env, e, gen).map(|j| (j.ctx, j.ty))
}

pub fn prepare_table(table: &ClassTable, gen: &mut LinkGen) -> Result<ClassTable, CheckError> {
    prepare_table_with(table, gen, &sharing_body)
}

/// Outcome of checking one method against its declared coeffects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MethodReport {
    pub class: String,
    pub method: String,
    pub declared: Vec<Coeffect>,
    pub inferred: Vec<Coeffect>,
    pub problem: Option<CheckError>,
}

/// Declared coeffects (receiver first) must cover the inferred ones:
/// inferred sharing implies declared sharing, and a link to the result
/// must be declared.
pub fn coherent(
    names: &[String],
    declared: &[Coeffect],
    inferred: &[Coeffect],
) -> Result<(), String> {
    let n = names.len();
    for i in 0..n {
        for j in i + 1..n {
            if declared[i] != declared[j] && !declared[i].is_disjoint(&declared[j]) {
                return Err(format!(
                    "declared coeffects of `{}` and `{}` overlap without being equal",
                    names[i], names[j]
                ));
            }
        }
    }
    for i in 0..n {
        if inferred[i].contains_res() && !declared[i].contains_res() {
            return Err(format!(
                "`{}` is linked to the result but its declared coeffect lacks `res`",
                names[i]
            ));
        }
        for j in i..n {
            if inferred[i] == inferred[j]
                && !inferred[i].is_empty()
                && (declared[i] != declared[j] || declared[i].is_empty())
            {
                return Err(if i == j {
                    format!("`{}` is used but declared with an empty coeffect", names[i])
                } else {
                    format!(
                        "`{}` and `{}` share in the body but are declared unrelated",
                        names[i], names[j]
                    )
                });
            }
        }
    }
    Ok(())
}

pub fn check_method_coherence_with(
    table: &ClassTable,
    gen: &mut LinkGen,
    body: &BodyInfer,
) -> Result<Vec<MethodReport>, CheckError> {
    let mut out = Vec::new();
    for cd in table.classes() {
        for md in &cd.methods {
            let Some(recv) = &md.recv_coeff else { continue };
            let env = method_env(table, &cd.name, &md.name)?;
            let mut names = vec!["this".to_string()];
            names.extend(md.params.iter().map(|p| p.name.clone()));
            let mut declared = vec![recv.clone()];
            declared.extend(
                md.params
                    .iter()
                    .map(|p| p.coeff.clone().unwrap_or_default()),
            );
            let (inferred, problem) = match body(table, &env, &md.body, &md.ret, gen) {
                Ok((ctx, ty)) => {
                    let inferred: Vec<Coeffect> = names.iter().map(|x| ctx.coeff(x)).collect();
                    let problem = if !same_type(&md.ret, &ty) {
                        Some(mismatch("method body", &md.ret, &ty))
                    } else {
                        coherent(&names, &declared, &inferred)
                            .err()
                            .map(|m| CheckError::new(ErrorCode::Coherence, m))
                    };
                    (inferred, problem)
                }
                Err(e) => (vec![], Some(e)),
            };
            out.push(MethodReport {
                class: cd.name.clone(),
                method: md.name.clone(),
                declared,
                inferred,
                problem,
            });
        }
    }
    Ok(out)
}

/// Re-infer every annotated method body and compare with its signature.
pub fn check_method_coherence(
    table: &ClassTable,
    gen: &mut LinkGen,
) -> Result<Vec<MethodReport>, CheckError> {
    check_method_coherence_with(table, gen, &sharing_body)
}

/// Prepare the table and reject it unless every method is coherent.
pub fn check_table(table: &ClassTable, gen: &mut LinkGen) -> Result<ClassTable, CheckError> {
    let t = prepare_table(table, gen)?;
    first_problem(check_method_coherence(&t, gen)?)?;
    Ok(t)
}

pub(crate) fn first_problem(reports: Vec<MethodReport>) -> Result<(), CheckError> {
    match reports.into_iter().find(|r| r.problem.is_some()) {
        Some(r) => {
            let e = r.problem.unwrap();
            Err(CheckError::new(
                e.code,
                format!("in `{}.{}`: {}", r.class, r.method, e.msg),
            ))
        }
        None => Ok(()),
    }
}
