use super::lattice::{combine, is_linear, leq, modif, subtype};
use crate::algebra::{Coeffect, LinkGen};
use crate::lang::{alpha_fresh_sig, ClassTable, Expr, Modifier, Type};
use crate::sharing::{
    arity, check_method_coherence_with, class_of, combine as sum_parts, first_problem, fresh_scale,
    lookup_sig, mismatch, prepare_table_with, same_type, unbound, CheckError, Deriv, Env,
    ErrorCode, Judgment, MethodReport, TypeCtx,
};

/// Source programs may not seal anything; runtime expressions may seal
/// `mut` references connected to the result of a promotion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Source,
    Runtime,
}

fn linear_clash(x: &str) -> CheckError {
    CheckError::new(
        ErrorCode::Linear,
        format!("`{x}` has a linear type and occurs in two places"),
    )
}

fn linear_ty(t: &Type) -> bool {
    t.modifier().is_some_and(is_linear)
}

/// `Γ ⊕ Δ`: the sum, rejecting `caps` and sealed variables present in both.
pub fn ctx_sum_linear(g: &TypeCtx, d: &TypeCtx) -> Result<TypeCtx, CheckError> {
    for (x, t, _) in g.iter() {
        if let Some(u) = d.ty(x) {
            if linear_ty(t) || linear_ty(u) {
                return Err(linear_clash(x));
            }
        }
    }
    Ok(g.sum(d))
}

/// `Γ^σ`: variables connected to the result get `T[σ]`.
pub fn seal(g: &TypeCtx, sigma: Modifier) -> Result<TypeCtx, CheckError> {
    let mut out = g.clone();
    for (x, t, c) in g.iter() {
        if c.contains_res() {
            let sealed = modif(t, sigma).ok_or_else(|| {
                CheckError::new(
                    ErrorCode::Combine,
                    format!("`{x}: {t}` is connected to the result and cannot be sealed"),
                )
            })?;
            out.set_type(x, sealed);
        }
    }
    Ok(out)
}

type Out = (TypeCtx, Type, Deriv);
type Part = (Coeffect, TypeCtx, Deriv);

fn check_linear(parts: &[Part], drop: Option<&String>) -> Result<(), CheckError> {
    let last = parts.len().saturating_sub(1);
    let dom = |i: usize| {
        let (_, g, _) = &parts[i];
        g.iter()
            .filter(move |(x, _, _)| !(i == last && Some(*x) == drop))
            .map(|(x, t, _)| (x.clone(), t.clone()))
    };
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            for (x, t) in dom(i) {
                if let Some((_, u)) = dom(j).find(|(y, _)| *y == x) {
                    if linear_ty(&t) || linear_ty(&u) {
                        return Err(linear_clash(&x));
                    }
                }
            }
        }
    }
    Ok(())
}

fn lin_combine(
    rule: &'static str,
    e: &Expr,
    ty: Type,
    parts: Vec<Part>,
    drop: Option<String>,
) -> Result<Out, CheckError> {
    check_linear(&parts, drop.as_ref())?;
    Ok(sum_parts(rule, e, ty, parts, drop))
}

fn unary(rule: &'static str, e: &Expr, ty: Type, out: Out) -> Out {
    let (g, _, d) = out;
    sum_parts(rule, e, ty, vec![(Coeffect::res(), g, d)], None)
}

fn needs_imm_rule(t: &Type) -> bool {
    t.is_prim() || t.modifier() == Some(Modifier::Imm)
}

struct ModInfer<'a> {
    table: &'a ClassTable,
    gen: &'a mut LinkGen,
    mode: Mode,
}

impl ModInfer<'_> {
    fn go(&mut self, env: &Env, e: &Expr) -> Result<Out, CheckError> {
        let out = self.syntax(env, e)?;
        Ok(if needs_imm_rule(&out.1) {
            fresh_scale("t-imm", e, out, self.gen)
        } else {
            out
        })
    }

    /// `t-prom`: `mut` becomes `caps`, `read` becomes `imm`.
    fn promote(&mut self, e: &Expr, out: Out) -> Result<Out, CheckError> {
        let (g, t, d) = out;
        let m = t
            .modifier()
            .filter(|m| leq(Modifier::Mut, *m))
            .ok_or_else(|| {
                CheckError::new(
                    ErrorCode::Promote,
                    format!("only mut or read expressions can be promoted, found `{t}`"),
                )
            })?;
        for (x, tx, c) in g.iter() {
            let Some(mx) = tx.modifier() else { continue };
            if !c.contains_res() {
                continue;
            }
            let blocked = match self.mode {
                Mode::Source => mx == Modifier::Mut || mx == Modifier::Read,
                Mode::Runtime => mx == Modifier::Read,
            };
            if blocked {
                return Err(CheckError::new(
                    ErrorCode::Promote,
                    format!("cannot promote `{e}`: `{x}` ({mx}) is connected to the result"),
                ));
            }
        }
        let sigma = Modifier::Seal(self.gen.fresh_id());
        let sealed = seal(&g, sigma).map_err(|err| CheckError::new(ErrorCode::Promote, err.msg))?;
        let ty = t.with_modifier(combine(m, Modifier::Caps).expect("mut or read with caps"));
        let (_, _, d) = unary("t-prom", e, ty.clone(), (g, t, d));
        Ok((sealed, ty, d))
    }

    /// Check `out` against `expected`, promoting when a `caps` or `imm`
    /// type is demanded of a `mut` or `read` expression.
    fn demand(
        &mut self,
        e: &Expr,
        out: Out,
        expected: &Type,
        what: &str,
    ) -> Result<Out, CheckError> {
        if !same_type(&out.1, expected) {
            return Err(mismatch(what, expected, &out.1));
        }
        if subtype(&out.1, expected) {
            return Ok(if out.1 == *expected {
                out
            } else {
                unary("t-sub", e, expected.clone(), out)
            });
        }
        let found = out.1.clone();
        let wants_promotion = matches!(expected.modifier(), Some(Modifier::Caps | Modifier::Imm))
            && found.modifier().is_some_and(|m| leq(Modifier::Mut, m));
        if !wants_promotion {
            return Err(CheckError::new(
                ErrorCode::Subtype,
                format!("{what}: `{found}` is not a subtype of `{expected}`"),
            ));
        }
        let promoted = self.promote(e, out)?;
        if !subtype(&promoted.1, expected) {
            return Err(CheckError::new(
                ErrorCode::Subtype,
                format!(
                    "{what}: `{found}` promotes to `{}`, not a subtype of `{expected}`",
                    promoted.1
                ),
            ));
        }
        let out = if promoted.1 == *expected {
            promoted
        } else {
            unary("t-sub", e, expected.clone(), promoted)
        };
        Ok(if needs_imm_rule(expected) {
            fresh_scale("t-imm", e, out, self.gen)
        } else {
            out
        })
    }

    fn checked(
        &mut self,
        env: &Env,
        e: &Expr,
        expected: &Type,
        what: &str,
    ) -> Result<Out, CheckError> {
        let out = self.go(env, e)?;
        self.demand(e, out, expected, what)
    }

    fn syntax(&mut self, env: &Env, e: &Expr) -> Result<Out, CheckError> {
        let one = Coeffect::res;
        match e {
            Expr::Var(x) => {
                let t = env.get(x).ok_or_else(|| unbound(x))?.clone();
                let ctx = TypeCtx::singleton(x.clone(), t.clone(), Coeffect::res());
                let d = Deriv::leaf("t-var", e, t.clone(), ctx.coeffs().clone());
                Ok((ctx, t, d))
            }
            Expr::Const(_) => Ok((
                TypeCtx::new(),
                Type::Int,
                Deriv::leaf("t-const", e, Type::Int, Default::default()),
            )),
            Expr::Field(r, f) => {
                let (g, t, d) = self.go(env, r)?;
                let c = class_of(&t, "field receiver")?;
                let ft = &self.table.field(c, f)?.1.ty;
                let m = t.modifier().expect("class type");
                let ty = modif(ft, m).ok_or_else(|| {
                    CheckError::new(
                        ErrorCode::Combine,
                        format!("field `{f}` of a `{m}` receiver has no type"),
                    )
                })?;
                lin_combine("t-field-access", e, ty, vec![(one(), g, d)], None)
            }
            Expr::Assign(r, f, v) => {
                let (g, t, d) = self.go(env, r)?;
                let c = class_of(&t, "assignment receiver")?;
                if !t.modifier().is_some_and(|m| leq(m, Modifier::Mut)) {
                    return Err(CheckError::new(
                        ErrorCode::ReadAssign,
                        format!("cannot assign field `{f}` through `{r}` of type `{t}`"),
                    ));
                }
                let ft = self.table.field(c, f)?.1.ty.clone();
                let (gv, _, dv) = self.checked(env, v, &ft, &format!("assignment to `{f}`"))?;
                lin_combine(
                    "t-field-assign",
                    e,
                    ft,
                    vec![(one(), g, d), (one(), gv, dv)],
                    None,
                )
            }
            Expr::New(c, args) => {
                let fields = self.table.fields(c)?.to_vec();
                if fields.len() != args.len() {
                    return Err(arity(&format!("`new {c}`"), fields.len(), args.len()));
                }
                let mut parts = Vec::new();
                for (fd, a) in fields.iter().zip(args) {
                    let (g, _, d) =
                        self.checked(env, a, &fd.ty, &format!("field `{}` of `new {c}`", fd.name))?;
                    parts.push((one(), g, d));
                }
                lin_combine("t-new", e, Type::class(c.clone()), parts, None)
            }
            Expr::Call(recv, m, args) => {
                let r0 = self.go(env, recv)?;
                let c = class_of(&r0.1, "method receiver")?.to_string();
                let sig = alpha_fresh_sig(&lookup_sig(self.table, &c, m)?, self.gen);
                if sig.params.len() != args.len() {
                    return Err(arity(&format!("`{c}.{m}`"), sig.params.len(), args.len()));
                }
                let recv_ty = Type::Class(c.clone(), sig.recv_mod);
                let (g0, _, d0) =
                    self.demand(recv, r0, &recv_ty, &format!("receiver of `{c}.{m}`"))?;
                let mut parts = vec![(sig.recv_coeff.union(&self.gen.fresh_coeffect()), g0, d0)];
                for ((pname, pt, pc), a) in sig.params.iter().zip(args) {
                    let (g, _, d) =
                        self.checked(env, a, pt, &format!("argument `{pname}` of `{c}.{m}`"))?;
                    parts.push((pc.union(&self.gen.fresh_coeffect()), g, d));
                }
                lin_combine("t-invk", e, sig.ret.clone(), parts, None)
            }
            Expr::Block(decl, x, init, body) => {
                let (gi, ti, di) = match decl {
                    Some(t) => self.checked(env, init, t, &format!("initializer of `{x}`"))?,
                    None => self.go(env, init)?,
                };
                let bt = decl.clone().unwrap_or(ti);
                let mut inner = env.clone();
                inner.insert(x.clone(), bt);
                let (gb, tb, db) = self.go(&inner, body)?;
                if let Some(tx) = gb.ty(x).filter(|tx| **tx != inner[x]) {
                    return Err(CheckError::new(
                        ErrorCode::Promote,
                        format!(
                            "`{x}` is declared `{}` but the body needs it as `{tx}`",
                            inner[x]
                        ),
                    ));
                }
                let xc = gb.coeff(x);
                let l = self.gen.fresh_coeffect();
                lin_combine(
                    "t-block",
                    e,
                    tb,
                    vec![(xc.union(&l), gi, di), (one(), gb, db)],
                    Some(x.clone()),
                )
            }
        }
    }
}

/// Infer the modifier-aware judgment of `e`. With `expected`, the result
/// is checked against it, promoting if needed.
pub fn infer_mod(
    table: &ClassTable,
    env: &Env,
    e: &Expr,
    mode: Mode,
    expected: Option<&Type>,
    gen: &mut LinkGen,
) -> Result<Judgment, CheckError> {
    let mut inf = ModInfer { table, gen, mode };
    let out = inf.go(env, e)?;
    let (ctx, ty, deriv) = match expected {
        Some(t) => inf.demand(e, out, t, "expression")?,
        None => out,
    };
    Ok(Judgment {
        ctx,
        ty,
        deriv,
        env_vars: env.keys().cloned().collect(),
    })
}

fn mod_body(
    t: &ClassTable,
    env: &Env,
    e: &Expr,
    ret: &Type,
    gen: &mut LinkGen,
) -> Result<(TypeCtx, Type), CheckError> {
    infer_mod(t, env, e, Mode::Source, Some(ret), gen).map(|j| (j.ctx, j.ty))
}

pub fn prepare_table_mod(table: &ClassTable, gen: &mut LinkGen) -> Result<ClassTable, CheckError> {
    prepare_table_with(table, gen, &mod_body)
}

pub fn check_method_coherence_mod(
    table: &ClassTable,
    gen: &mut LinkGen,
) -> Result<Vec<MethodReport>, CheckError> {
    check_method_coherence_with(table, gen, &mod_body)
}

/// Prepare the table under the modifier rules and reject it unless every
/// method body checks against its declared type and coeffects.
pub fn check_table_mod(table: &ClassTable, gen: &mut LinkGen) -> Result<ClassTable, CheckError> {
    let t = prepare_table_mod(table, gen)?;
    first_problem(check_method_coherence_mod(&t, gen)?)?;
    Ok(t)
}
