use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{Subject, System};
use crate::algebra::LinkGen;
use crate::interp::{
    reach, reduce_star, sharing_rel, sharing_rel_filtered, Memory, Object, Outcome, RefGen, Trace,
    TraceStep, Value, DEFAULT_BUDGET,
};
use crate::lang::{ClassTable, Modifier, Type};
use crate::modifiers::{
    check_table_mod, deep_modifiers_hold, imm_closure, leq, mod_sharing, subtype,
    type_configuration_mod, type_memory_mod, ModConfJudgment, ModMap, Mode,
};
use crate::sharing::{
    check_table, restriction_holds, type_configuration, type_memory, CheckError, TypeCtx,
};

/// Where and why a check failed. Step 0 is the initial configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub step: usize,
    pub rule: Option<String>,
    pub msg: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.rule {
            Some(r) => write!(f, "step {} ({r}): {}", self.step, self.msg),
            None => write!(f, "step {}: {}", self.step, self.msg),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass {
        steps: usize,
    },
    Fail(Failure),
    /// The precondition (typing) does not hold.
    NotApplicable {
        reason: String,
    },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }
}

fn fail(step: usize, rule: Option<&TraceStep>, msg: impl Into<String>) -> Verdict {
    Verdict::Fail(Failure {
        step,
        rule: rule.map(|s| s.rule.to_string()),
        msg: msg.into(),
    })
}

fn not_applicable(e: CheckError) -> Verdict {
    Verdict::NotApplicable {
        reason: e.to_string(),
    }
}

fn run(table: &ClassTable, s: &Subject) -> Trace {
    reduce_star(table, &s.main, &s.mem, &mut RefGen::new(), DEFAULT_BUDGET)
}

fn outcome_failure(trace: &Trace) -> Option<Verdict> {
    match &trace.outcome {
        Outcome::Stuck(why) => Some(fail(
            trace.steps.len(),
            trace.steps.last(),
            format!("stuck: {why}"),
        )),
        _ => None,
    }
}

fn sharing_changed(before: &TypeCtx, after: &TypeCtx) -> String {
    format!(
        "sharing not preserved: before {}, after {}",
        before.erase().canonical(),
        after.erase().canonical()
    )
}

/// Memory part of the typing mirrors sharing in memory: two references
/// share exactly when their coeffects coincide.
fn lemma_mismatch(
    mem: &Memory,
    ctx: &TypeCtx,
    related: impl Fn(&str, &str) -> bool,
) -> Option<String> {
    let refs: Vec<&String> = mem.refs().collect();
    for a in &refs {
        for b in &refs {
            if related(a, b) != (ctx.coeff(a) == ctx.coeff(b)) {
                return Some(format!(
                    "`{a}` and `{b}`: sharing {} but coeffects {} and {}",
                    related(a, b),
                    ctx.coeff(a),
                    ctx.coeff(b)
                ));
            }
        }
    }
    None
}

/// Check that a memory typing captures the sharing relation exactly. With
/// `mods`, the modifier rules and the `imm`-filtered relation are used.
pub fn check_memory_lemma(
    table: &ClassTable,
    mem: &Memory,
    mods: Option<&ModMap>,
) -> Result<(), String> {
    let mut gen = LinkGen::new();
    match mods {
        None => {
            let mt = type_memory(table, mem, &mut gen).map_err(|e| e.to_string())?;
            let rel = sharing_rel(mem);
            lemma_mismatch(mem, &mt.ctx, |a, b| rel.related(a, b)).map_or(Ok(()), Err)
        }
        Some(mods) => {
            let mt = type_memory_mod(table, mem, mods, &mut gen).map_err(|e| e.to_string())?;
            let rel = mod_sharing(mem, mods);
            lemma_mismatch(mem, &mt.ctx, |a, b| rel.related(a, b)).map_or(Ok(()), Err)
        }
    }
}

fn mod_config_invariants(c: &ModConfJudgment, mem: &Memory) -> Option<String> {
    if let Err(e) = deep_modifiers_hold(mem, &c.mods) {
        return Some(format!("deep modifiers: {e}"));
    }
    let rel = mod_sharing(mem, &c.mods);
    lemma_mismatch(mem, &c.mem.ctx, |a, b| rel.related(a, b)).map(|m| format!("memory typing: {m}"))
}

/// References bound by a step to a binder declared `imm`.
fn imm_bindings(st: &TraceStep) -> impl Iterator<Item = &String> {
    st.info
        .bindings
        .iter()
        .filter_map(|b| match (&b.declared, &b.value) {
            (Some(t), Value::Ref(r)) if t.modifier() == Some(Modifier::Imm) => Some(r),
            _ => None,
        })
}

/// Run `s` and re-type every configuration reached. Each step must keep
/// the type, satisfy `(Γ+Δ)|Γ = Γ` on erased contexts with respect to both
/// the previous and the initial configuration, and (with modifiers) never
/// lower a reference's modifier. Getting stuck is a failure.
///
/// With modifiers, `expected` is the type the initial configuration is
/// checked against; later configurations are checked against the initial
/// type. References typed `imm` once stay `imm` seeds afterwards.
pub fn verify_subject_reduction(s: &Subject, system: System, expected: Option<&Type>) -> Verdict {
    let mut gen = LinkGen::new();
    match system {
        System::Sharing => {
            let table = match check_table(&s.table, &mut gen) {
                Ok(t) => t,
                Err(e) => return not_applicable(e),
            };
            let c0 = match type_configuration(&table, &s.main, &s.mem, &mut gen) {
                Ok(c) => c,
                Err(e) => return not_applicable(e),
            };
            let trace = run(&table, s);
            let mut prev = c0.ctx.clone();
            for (i, st) in trace.steps.iter().enumerate() {
                let ci = match type_configuration(&table, &st.expr, &st.mem, &mut gen) {
                    Ok(c) => c,
                    Err(e) => return fail(i + 1, Some(st), format!("not typable: {e}")),
                };
                if ci.ty().erase() != c0.ty().erase() {
                    return fail(
                        i + 1,
                        Some(st),
                        format!("type changed from `{}` to `{}`", c0.ty(), ci.ty()),
                    );
                }
                for before in [&prev, &c0.ctx] {
                    if !restriction_holds(before, &ci.ctx) {
                        return fail(i + 1, Some(st), sharing_changed(before, &ci.ctx));
                    }
                }
                prev = ci.ctx;
            }
            outcome_failure(&trace).unwrap_or(Verdict::Pass {
                steps: trace.steps.len(),
            })
        }
        System::Modifiers => {
            let table = match check_table_mod(&s.table, &mut gen) {
                Ok(t) => t,
                Err(e) => return not_applicable(e),
            };
            let mut seeds = s.imm_seeds.clone();
            let c0 = match type_configuration_mod(
                &table,
                &s.main,
                &s.mem,
                &seeds,
                expected,
                Mode::Source,
                &mut gen,
            ) {
                Ok(c) => c,
                Err(e) => return not_applicable(e),
            };
            if let Some(m) = mod_config_invariants(&c0, &s.mem) {
                return fail(0, None, m);
            }
            let t0 = c0.ty().clone();
            let trace = run(&table, s);
            let mut prev = c0.clone();
            for (i, st) in trace.steps.iter().enumerate() {
                seeds.extend(
                    prev.mods
                        .iter()
                        .filter(|(_, m)| **m == Modifier::Imm)
                        .map(|(r, _)| r.clone()),
                );
                seeds.extend(imm_bindings(st).cloned());
                let ci = match type_configuration_mod(
                    &table,
                    &st.expr,
                    &st.mem,
                    &seeds,
                    Some(&t0),
                    Mode::Runtime,
                    &mut gen,
                ) {
                    Ok(c) => c,
                    Err(e) => return fail(i + 1, Some(st), format!("not typable: {e}")),
                };
                if !subtype(ci.ty(), &t0) {
                    return fail(
                        i + 1,
                        Some(st),
                        format!("type `{}` is not a subtype of `{t0}`", ci.ty()),
                    );
                }
                for before in [&prev.ctx, &c0.ctx] {
                    if !restriction_holds(before, &ci.ctx) {
                        return fail(i + 1, Some(st), sharing_changed(before, &ci.ctx));
                    }
                }
                if let Some((r, m)) = prev.mods.iter().find(|(r, m)| !leq(**m, ci.mods[*r])) {
                    return fail(
                        i + 1,
                        Some(st),
                        format!("modifier of `{r}` decreased from {m} to {}", ci.mods[r]),
                    );
                }
                if let Some(m) = mod_config_invariants(&ci, &st.mem) {
                    return fail(i + 1, Some(st), m);
                }
                prev = ci;
            }
            outcome_failure(&trace).unwrap_or(Verdict::Pass {
                steps: trace.steps.len(),
            })
        }
    }
}

/// Run `s` and list the initial references that end up sharing with the
/// result. With modifiers only initially-`mut` references count, and
/// sharing goes through non-`imm` references only. No typing is required.
pub fn capsule_violations(
    table: &ClassTable,
    s: &Subject,
    system: System,
    initial: &ModMap,
) -> Result<Vec<String>, Failure> {
    violations_in(table, s, system, initial, &run(table, s))
}

fn violations_in(
    table: &ClassTable,
    s: &Subject,
    system: System,
    initial: &ModMap,
    trace: &Trace,
) -> Result<Vec<String>, Failure> {
    let y = match &trace.outcome {
        Outcome::Done(Value::Ref(y)) => y.clone(),
        Outcome::Done(Value::Int(_)) => return Ok(vec![]),
        Outcome::Stuck(why) => {
            return Err(Failure {
                step: trace.steps.len(),
                rule: None,
                msg: format!("stuck: {why}"),
            })
        }
        Outcome::BudgetExhausted => return Ok(vec![]),
    };
    let fin = trace.final_mem();
    let out = match system {
        System::Sharing => {
            let rel = sharing_rel(fin);
            s.mem
                .refs()
                .filter(|x| rel.related(x, &y))
                .cloned()
                .collect()
        }
        System::Modifiers => {
            let mut seeds = s.imm_seeds.clone();
            for st in &trace.steps {
                seeds.extend(imm_bindings(st).cloned());
            }
            let imm = imm_closure(table, fin, &seeds);
            let rel = sharing_rel_filtered(fin, |r| !imm.contains(r));
            s.mem
                .refs()
                .filter(|x| initial.get(*x) == Some(&Modifier::Mut) && rel.related(x, &y))
                .cloned()
                .collect()
        }
    };
    Ok(out)
}

/// Capsule check. Sharing: the configuration must type with every variable
/// lent; then no initial reference may share with the result. Modifiers:
/// the configuration must type as `caps`; then no initially-`mut`
/// reference may share with the result.
pub fn verify_capsule(s: &Subject, system: System) -> Verdict {
    let mut gen = LinkGen::new();
    let (table, initial) = match system {
        System::Sharing => {
            let table = match check_table(&s.table, &mut gen) {
                Ok(t) => t,
                Err(e) => return not_applicable(e),
            };
            let c = match type_configuration(&table, &s.main, &s.mem, &mut gen) {
                Ok(c) => c,
                Err(e) => return not_applicable(e),
            };
            if !c.expr.is_capsule() {
                return Verdict::NotApplicable {
                    reason: "not capsule-typed".into(),
                };
            }
            (table, ModMap::new())
        }
        System::Modifiers => {
            let table = match check_table_mod(&s.table, &mut gen) {
                Ok(t) => t,
                Err(e) => return not_applicable(e),
            };
            let plain = match type_configuration_mod(
                &table,
                &s.main,
                &s.mem,
                &s.imm_seeds,
                None,
                Mode::Source,
                &mut gen,
            ) {
                Ok(c) => c,
                Err(e) => return not_applicable(e),
            };
            let Some(class) = plain.ty().class_name() else {
                return Verdict::NotApplicable {
                    reason: "primitive result".into(),
                };
            };
            let caps = Type::Class(class.to_string(), Modifier::Caps);
            match type_configuration_mod(
                &table,
                &s.main,
                &s.mem,
                &s.imm_seeds,
                Some(&caps),
                Mode::Source,
                &mut gen,
            ) {
                Ok(c) => (table, c.mods),
                Err(e) => return not_applicable(e),
            }
        }
    };
    let trace = run(&table, s);
    match violations_in(&table, s, system, &initial, &trace) {
        Err(f) => Verdict::Fail(f),
        Ok(v) if v.is_empty() => Verdict::Pass {
            steps: trace.steps.len(),
        },
        Ok(v) => Verdict::Fail(Failure {
            step: trace.steps.len(),
            rule: None,
            msg: format!(
                "result shares with {}; final memory {}",
                v.join(", "),
                trace.final_mem()
            ),
        }),
    }
}

/// Run `s` and check that the objects reachable from every `imm` reference
/// never change from the step the reference becomes `imm` on. References
/// become `imm` as seeds, as values of `imm` fields, or when bound to a
/// binder declared `imm`. No typing is required.
pub fn immutability_violations(table: &ClassTable, s: &Subject) -> Result<usize, Failure> {
    let trace = run(table, s);
    let mut seeds = s.imm_seeds.clone();
    let mut snaps: BTreeMap<String, BTreeMap<String, Object>> = BTreeMap::new();
    let track = |mem: &Memory,
                 seeds: &BTreeSet<String>,
                 snaps: &mut BTreeMap<String, BTreeMap<String, Object>>| {
        for x in imm_closure(table, mem, seeds) {
            snaps.entry(x.clone()).or_insert_with(|| {
                reach(mem, &x)
                    .into_iter()
                    .map(|o| (o.clone(), mem.get(&o).expect("reachable").clone()))
                    .collect()
            });
        }
    };
    track(&s.mem, &seeds, &mut snaps);
    for (i, st) in trace.steps.iter().enumerate() {
        for (x, snap) in &snaps {
            for (o, obj) in snap {
                if st.mem.get(o) != Some(obj) {
                    return Err(Failure {
                        step: i + 1,
                        rule: Some(st.rule.to_string()),
                        msg: format!(
                            "`{o}`, reachable from imm `{x}`, changed from {obj} to {}",
                            st.mem.get(o).map_or("nothing".into(), |o| o.to_string())
                        ),
                    });
                }
            }
        }
        seeds.extend(imm_bindings(st).cloned());
        track(&st.mem, &seeds, &mut snaps);
    }
    Ok(snaps.len())
}

/// Immutability check under the modifier rules: the configuration must
/// type, then no `imm` reference's reachable objects may change.
pub fn verify_immutability(s: &Subject) -> Verdict {
    let mut gen = LinkGen::new();
    let table = match check_table_mod(&s.table, &mut gen) {
        Ok(t) => t,
        Err(e) => return not_applicable(e),
    };
    if let Err(e) = type_configuration_mod(
        &table,
        &s.main,
        &s.mem,
        &s.imm_seeds,
        None,
        Mode::Source,
        &mut gen,
    ) {
        return not_applicable(e);
    }
    match immutability_violations(&table, s) {
        Ok(_) => Verdict::Pass {
            steps: run(&table, s).steps.len(),
        },
        Err(f) => Verdict::Fail(f),
    }
}
