use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::memory::{Memory, Object, Value};
use crate::lang::{all_names, ClassTable, Expr, Type};

pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    FieldAccess,
    FieldAssign,
    New,
    Invk,
    Block,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::FieldAccess => "field-access",
            Rule::FieldAssign => "field-assign",
            Rule::New => "new",
            Rule::Invk => "invk",
            Rule::Block => "block",
        };
        f.write_str(s)
    }
}

/// A value bound by a `block` or `invk` step together with the type its
/// binder was declared with (`None` for sequence binders).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub declared: Option<Type>,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepInfo {
    pub rule: Rule,
    pub bindings: Vec<Binding>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Next(Expr, StepInfo),
    Done(Value),
    Stuck(String),
}

/// Supply of fresh reference names `r0, r1, …`.
#[derive(Clone, Debug, Default)]
pub struct RefGen {
    next: u64,
}

impl RefGen {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn starting_at(offset: u64) -> Self {
        RefGen { next: offset }
    }

    fn fresh(&mut self, mem: &Memory, e: &Expr) -> String {
        let mut names = BTreeSet::new();
        all_names(e, &mut names);
        loop {
            let r = format!("r{}", self.next);
            self.next += 1;
            if !mem.contains(&r) && !names.contains(&r) {
                return r;
            }
        }
    }
}

/// One reduction step. `mem` is updated in place.
pub fn step(table: &ClassTable, e: &Expr, mem: &mut Memory, refs: &mut RefGen) -> Step {
    if let Some(v) = Value::from_expr(e) {
        return Step::Done(v);
    }
    let whole = e.clone();
    match descend(table, e, mem, refs, &whole) {
        Ok((e2, info)) => Step::Next(e2, info),
        Err(reason) => Step::Stuck(reason),
    }
}

type StepOut = Result<(Expr, StepInfo), String>;

fn plain(rule: Rule) -> StepInfo {
    StepInfo {
        rule,
        bindings: Vec::new(),
    }
}

fn ref_of<'a>(v: &'a Expr, what: &str) -> Result<&'a str, String> {
    match v {
        Expr::Var(r) => Ok(r),
        _ => Err(format!("{what} is not a reference: `{v}`")),
    }
}

/// Step the first non-value in `es`, returning the rebuilt list, or `None`
/// if all are values.
fn step_first(
    table: &ClassTable,
    es: &[Expr],
    mem: &mut Memory,
    refs: &mut RefGen,
    whole: &Expr,
) -> Option<Result<(Vec<Expr>, StepInfo), String>> {
    let i = es.iter().position(|a| !a.is_value())?;
    Some(descend(table, &es[i], mem, refs, whole).map(|(a, info)| {
        let mut out = es.to_vec();
        out[i] = a;
        (out, info)
    }))
}

fn descend(
    table: &ClassTable,
    e: &Expr,
    mem: &mut Memory,
    refs: &mut RefGen,
    whole: &Expr,
) -> StepOut {
    match e {
        Expr::Var(_) | Expr::Const(_) => Err(format!("value `{e}` cannot step")),
        Expr::Field(r, f) => {
            if !r.is_value() {
                let (r2, info) = descend(table, r, mem, refs, whole)?;
                return Ok((Expr::Field(Box::new(r2), f.clone()), info));
            }
            let x = ref_of(r, "field receiver")?;
            let obj = mem
                .get(x)
                .ok_or_else(|| format!("dangling reference `{x}`"))?;
            let (i, _) = table.field(&obj.class, f).map_err(|e| e.msg)?;
            Ok((obj.fields[i].to_expr(), plain(Rule::FieldAccess)))
        }
        Expr::Assign(r, f, v) => {
            if !r.is_value() {
                let (r2, info) = descend(table, r, mem, refs, whole)?;
                return Ok((Expr::Assign(Box::new(r2), f.clone(), v.clone()), info));
            }
            if !v.is_value() {
                let (v2, info) = descend(table, v, mem, refs, whole)?;
                return Ok((Expr::Assign(r.clone(), f.clone(), Box::new(v2)), info));
            }
            let x = ref_of(r, "assignment receiver")?;
            let class = mem
                .get(x)
                .ok_or_else(|| format!("dangling reference `{x}`"))?
                .class
                .clone();
            let (i, _) = table.field(&class, f).map_err(|e| e.msg)?;
            let val = Value::from_expr(v).unwrap();
            mem.0.get_mut(x).unwrap().fields[i] = val;
            Ok(((**v).clone(), plain(Rule::FieldAssign)))
        }
        Expr::New(c, args) => {
            if let Some(res) = step_first(table, args, mem, refs, whole) {
                let (args2, info) = res?;
                return Ok((Expr::New(c.clone(), args2), info));
            }
            let n = table.fields(c).map_err(|e| e.msg)?.len();
            if n != args.len() {
                return Err(format!(
                    "`new {c}` expects {n} arguments, got {}",
                    args.len()
                ));
            }
            let r = refs.fresh(mem, whole);
            let vals = args.iter().map(|a| Value::from_expr(a).unwrap()).collect();
            mem.insert(r.clone(), Object::new(c.clone(), vals));
            Ok((Expr::Var(r), plain(Rule::New)))
        }
        Expr::Call(recv, m, args) => {
            if !recv.is_value() {
                let (r2, info) = descend(table, recv, mem, refs, whole)?;
                return Ok((Expr::Call(Box::new(r2), m.clone(), args.clone()), info));
            }
            if let Some(res) = step_first(table, args, mem, refs, whole) {
                let (args2, info) = res?;
                return Ok((Expr::Call(recv.clone(), m.clone(), args2), info));
            }
            let x = ref_of(recv, "method receiver")?;
            let class = mem
                .get(x)
                .ok_or_else(|| format!("dangling reference `{x}`"))?
                .class
                .clone();
            let decl = table.method(&class, m).map_err(|e| e.msg)?;
            if decl.params.len() != args.len() {
                return Err(format!(
                    "`{class}.{m}` expects {} arguments, got {}",
                    decl.params.len(),
                    args.len()
                ));
            }
            let mut sub = BTreeMap::new();
            sub.insert("this".to_string(), (**recv).clone());
            let mut bindings = vec![Binding {
                declared: Some(Type::Class(class.clone(), decl.recv_mod)),
                value: Value::Ref(x.to_string()),
            }];
            for (p, a) in decl.params.iter().zip(args) {
                sub.insert(p.name.clone(), a.clone());
                bindings.push(Binding {
                    declared: Some(p.ty.clone()),
                    value: Value::from_expr(a).unwrap(),
                });
            }
            Ok((
                subst(&decl.body, &sub),
                StepInfo {
                    rule: Rule::Invk,
                    bindings,
                },
            ))
        }
        Expr::Block(t, x, init, body) => {
            if !init.is_value() {
                let (i2, info) = descend(table, init, mem, refs, whole)?;
                return Ok((
                    Expr::Block(t.clone(), x.clone(), Box::new(i2), body.clone()),
                    info,
                ));
            }
            let mut sub = BTreeMap::new();
            sub.insert(x.clone(), (**init).clone());
            let binding = Binding {
                declared: t.clone(),
                value: Value::from_expr(init).unwrap(),
            };
            Ok((
                subst(body, &sub),
                StepInfo {
                    rule: Rule::Block,
                    bindings: vec![binding],
                },
            ))
        }
    }
}

/// Simultaneous capture-avoiding substitution of values for variables.
pub fn subst(e: &Expr, sub: &BTreeMap<String, Expr>) -> Expr {
    if sub.is_empty() {
        return e.clone();
    }
    match e {
        Expr::Var(x) => sub.get(x).cloned().unwrap_or_else(|| e.clone()),
        Expr::Const(_) => e.clone(),
        Expr::Field(r, f) => Expr::Field(Box::new(subst(r, sub)), f.clone()),
        Expr::Assign(r, f, v) => {
            Expr::Assign(Box::new(subst(r, sub)), f.clone(), Box::new(subst(v, sub)))
        }
        Expr::New(c, args) => Expr::New(c.clone(), args.iter().map(|a| subst(a, sub)).collect()),
        Expr::Call(r, m, args) => Expr::Call(
            Box::new(subst(r, sub)),
            m.clone(),
            args.iter().map(|a| subst(a, sub)).collect(),
        ),
        Expr::Block(t, x, init, body) => {
            let init2 = subst(init, sub);
            let mut inner: BTreeMap<String, Expr> = sub.clone();
            inner.remove(x);
            let captures = inner.values().any(|v| v.free_vars().contains(x));
            if !captures {
                return Expr::Block(
                    t.clone(),
                    x.clone(),
                    Box::new(init2),
                    Box::new(subst(body, &inner)),
                );
            }
            let mut avoid = BTreeSet::new();
            all_names(body, &mut avoid);
            for v in inner.values() {
                all_names(v, &mut avoid);
            }
            let fresh = (0..)
                .map(|k| format!("{x}_{k}"))
                .find(|n| !avoid.contains(n))
                .unwrap();
            inner.insert(x.clone(), Expr::Var(fresh.clone()));
            Expr::Block(
                t.clone(),
                fresh,
                Box::new(init2),
                Box::new(subst(body, &inner)),
            )
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Done(Value),
    Stuck(String),
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub rule: Rule,
    pub info: StepInfo,
    pub expr: Expr,
    pub mem: Memory,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub start: Expr,
    pub start_mem: Memory,
    pub steps: Vec<TraceStep>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn final_expr(&self) -> &Expr {
        self.steps.last().map(|s| &s.expr).unwrap_or(&self.start)
    }

    pub fn final_mem(&self) -> &Memory {
        self.steps.last().map(|s| &s.mem).unwrap_or(&self.start_mem)
    }

    /// Configurations in order, starting with the initial one.
    pub fn configs(&self) -> impl Iterator<Item = (&Expr, &Memory)> {
        std::iter::once((&self.start, &self.start_mem))
            .chain(self.steps.iter().map(|s| (&s.expr, &s.mem)))
    }

    /// Line-oriented JSON: one object per step.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            let line = serde_json::json!({
                "step": i + 1,
                "rule": s.rule.to_string(),
                "expr": s.expr.to_string(),
                "memory": s.mem.to_json(),
            });
            out.push_str(&line.to_string());
            out.push('\n');
        }
        out
    }
}

/// Reduce until a value, a stuck configuration, or the step budget.
pub fn reduce_star(
    table: &ClassTable,
    e: &Expr,
    mem: &Memory,
    refs: &mut RefGen,
    budget: usize,
) -> Trace {
    let mut cur = e.clone();
    let mut m = mem.clone();
    let mut steps = Vec::new();
    loop {
        if steps.len() >= budget && !cur.is_value() {
            return Trace {
                start: e.clone(),
                start_mem: mem.clone(),
                steps,
                outcome: Outcome::BudgetExhausted,
            };
        }
        match step(table, &cur, &mut m, refs) {
            Step::Done(v) => {
                return Trace {
                    start: e.clone(),
                    start_mem: mem.clone(),
                    steps,
                    outcome: Outcome::Done(v),
                };
            }
            Step::Stuck(reason) => {
                return Trace {
                    start: e.clone(),
                    start_mem: mem.clone(),
                    steps,
                    outcome: Outcome::Stuck(reason),
                };
            }
            Step::Next(e2, info) => {
                cur = e2;
                steps.push(TraceStep {
                    rule: info.rule,
                    info,
                    expr: cur.clone(),
                    mem: m.clone(),
                });
            }
        }
    }
}
