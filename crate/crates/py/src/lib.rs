//! Python bindings. Every function takes source text and returns a JSON
//! string; errors raise `ValueError` with a `CODE: message` text.

use std::collections::BTreeMap;

use coeffect_core::algebra::{LinkGen, Nat, UsageGrade};
use coeffect_core::harness::{check_subject, Subject, System};
use coeffect_core::interp::{reduce_star, Memory, Outcome, RefGen, DEFAULT_BUDGET};
use coeffect_core::lambda::{linfer, parse_lterm, Grade, LType};
use coeffect_core::lang::{parse, Type};
use coeffect_core::modifiers::{check_table_mod, infer_mod, Mode};
use coeffect_core::sharing::{check_table, infer, judgment_json, SCHEMA};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde_json::json;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Type-check `src`. With `env` (name to type, e.g. `{"x": "C@imm"}`) free
/// variables get those types; otherwise they are references of `mem`.
#[pyfunction]
#[pyo3(signature = (src, system="sharing", env=None, mem=None, expect=None))]
fn check(
    src: &str,
    system: &str,
    env: Option<BTreeMap<String, String>>,
    mem: Option<&str>,
    expect: Option<&str>,
) -> PyResult<String> {
    let system: System = system.parse().map_err(err)?;
    let p = parse(src).map_err(err)?;
    let expected: Option<Type> = expect.map(str::parse).transpose().map_err(err)?;
    let j = match env {
        Some(env) => {
            let env = env
                .into_iter()
                .map(|(x, t)| Ok((x, t.parse::<Type>().map_err(err)?)))
                .collect::<PyResult<_>>()?;
            let mut gen = LinkGen::new();
            match system {
                System::Sharing => {
                    check_table(&p.table, &mut gen).and_then(|t| infer(&t, &env, &p.main, &mut gen))
                }
                System::Modifiers => check_table_mod(&p.table, &mut gen).and_then(|t| {
                    infer_mod(&t, &env, &p.main, Mode::Source, expected.as_ref(), &mut gen)
                }),
            }
        }
        None => {
            let m = Memory::from_json(mem.unwrap_or("{}")).map_err(err)?;
            check_subject(&Subject::new(p, m), system, expected.as_ref())
        }
    }
    .map_err(err)?;
    Ok(judgment_json(&system.to_string(), &j.ctx, &j.ty).to_string())
}

/// Reduce `src` on the JSON memory `mem`; the result lists every step.
#[pyfunction]
#[pyo3(signature = (src, mem="{}", budget=DEFAULT_BUDGET))]
fn run(src: &str, mem: &str, budget: usize) -> PyResult<String> {
    let p = parse(src).map_err(err)?;
    let m = Memory::from_json(mem).map_err(err)?;
    m.check(&p.table).map_err(err)?;
    let t = reduce_star(&p.table, &p.main, &m, &mut RefGen::new(), budget);
    let (outcome, value) = match &t.outcome {
        Outcome::Done(v) => ("done", Some(v.to_string())),
        Outcome::Stuck(why) => ("stuck", Some(why.clone())),
        Outcome::BudgetExhausted => ("budget-exhausted", None),
    };
    let trace: Vec<serde_json::Value> = t
        .to_jsonl()
        .lines()
        .map(serde_json::from_str)
        .collect::<Result<_, _>>()
        .map_err(err)?;
    Ok(json!({
        "schema": SCHEMA,
        "outcome": outcome,
        "value": value,
        "steps": t.steps.len(),
        "trace": trace,
        "memory": t.final_mem().to_json(),
    })
    .to_string())
}

fn grades<R: Grade>(src: &str, cbv: bool) -> PyResult<serde_json::Value> {
    let t = parse_lterm::<R>(src).map_err(err)?;
    let env: BTreeMap<String, LType<R>> =
        t.free_vars().into_iter().map(|x| (x, LType::Int)).collect();
    let (ty, g) = linfer(&t, &env, cbv).map_err(err)?;
    let g: BTreeMap<String, String> = g.into_iter().map(|(x, r)| (x, r.to_string())).collect();
    Ok(json!({ "type": ty.to_string(), "grades": g }))
}

/// Grade a λ-term whose free variables are `int`s.
#[pyfunction]
#[pyo3(signature = (src, semiring="zow", cbv=false))]
fn lambda_grades(src: &str, semiring: &str, cbv: bool) -> PyResult<String> {
    let mut out = match semiring {
        "zow" => grades::<UsageGrade>(src, cbv)?,
        "nat" => grades::<Nat>(src, cbv)?,
        other => return Err(err(format!("unknown semiring `{other}`"))),
    };
    out["schema"] = json!(SCHEMA);
    out["semiring"] = json!(semiring);
    out["cbv"] = json!(cbv);
    Ok(out.to_string())
}

#[pymodule]
fn coeffect_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_grades, m)?)?;
    m.add("SCHEMA", SCHEMA)?;
    Ok(())
}
