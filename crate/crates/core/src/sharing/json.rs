use serde_json::{json, Map, Value};

use super::ctx::TypeCtx;
use crate::lang::Type;

pub const SCHEMA: &str = "1";

/// Canonical JSON for a judgment: variables sorted, coeffect groups as
/// sorted variable lists with a `contains_res` flag.
pub fn judgment_json(system: &str, ctx: &TypeCtx, ty: &Type) -> Value {
    let canon = ctx.canonical();
    let mut vars = Map::new();
    for (x, t, c) in ctx.iter() {
        let mut entry = Map::new();
        entry.insert("type".into(), json!(t.erase().to_string()));
        if let Some(m) = t.modifier() {
            entry.insert("modifier".into(), json!(m.to_string()));
        }
        entry.insert(
            "coeffect".into(),
            json!(c.iter().map(|l| l.to_string()).collect::<Vec<_>>()),
        );
        entry.insert("lent".into(), json!(!c.contains_res()));
        vars.insert(x.clone(), Value::Object(entry));
    }
    let mut out = Map::new();
    out.insert("schema".into(), json!(SCHEMA));
    out.insert("system".into(), json!(system));
    out.insert("type".into(), json!(ty.to_string()));
    out.insert(
        "capsule".into(),
        json!(ctx.iter().all(|(_, _, c)| !c.contains_res())),
    );
    out.insert(
        "groups".into(),
        serde_json::to_value(&canon.groups).expect("groups serialize"),
    );
    out.insert("unlinked".into(), json!(canon.unlinked));
    out.insert("vars".into(), Value::Object(vars));
    Value::Object(out)
}
