use std::collections::BTreeSet;

use super::*;
use crate::algebra::{Coeffect, LinkGen};
use crate::interp::{Memory, Object, Value};
use crate::lang::{parse, parse_expr, ClassTable, Modifier, Type};
use crate::sharing::{check_table, infer, CheckError, Env, ErrorCode, Judgment, TypeCtx};

const BC: &str = "class B {int f;} class C {B f1; B f2;}";

pub(crate) const CLONE_MIX: &str = "class B {int f; B clone[read ^{l}]() {new B(this.f)}}
class A { B f;
  A mix[^{res}](A^{res} a) {this.f = a.f; a}
  A clone[read ^{l}]() {new A(this.f.clone())}
}";

fn ty(c: &str, m: Modifier) -> Type {
    Type::Class(c.into(), m)
}

fn table(src: &str) -> ClassTable {
    check_table_mod(
        &parse(&format!("{src} ; 0")).unwrap().table,
        &mut LinkGen::new(),
    )
    .unwrap()
}

fn run(
    classes: &str,
    env: &[(&str, Type)],
    e: &str,
    expected: Option<&Type>,
) -> Result<Judgment, CheckError> {
    let t = table(classes);
    let env: Env = env
        .iter()
        .map(|(x, t)| (x.to_string(), t.clone()))
        .collect();
    infer_mod(
        &t,
        &env,
        &parse_expr(e).unwrap(),
        Mode::Source,
        expected,
        &mut LinkGen::new(),
    )
}

fn main_of(classes: &str, main: &str) -> Result<Judgment, CheckError> {
    let p = parse(&format!("{classes} ; {main}")).unwrap();
    let t = check_table_mod(&p.table, &mut LinkGen::new())?;
    infer_mod(
        &t,
        &Env::new(),
        &p.main,
        Mode::Source,
        None,
        &mut LinkGen::new(),
    )
}

#[test]
fn block_program_promotes_to_caps() {
    let env = [("x", ty("C", Modifier::Mut)), ("y", ty("B", Modifier::Mut))];
    let e = "{B z = new B(2); x.f1 = y; new C(z,z)}";
    let j = run(BC, &env, e, Some(&ty("C", Modifier::Caps))).unwrap();
    assert_eq!(j.ty, ty("C", Modifier::Caps));
    assert!(j.is_capsule());
    assert_eq!(j.ctx.ty("x"), Some(&ty("C", Modifier::Mut)));
    assert!(j.deriv.rules().contains(&"t-prom"));
    assert!(j.deriv.replays());
    let plain = run(BC, &env, e, None).unwrap();
    assert_eq!(plain.ty, ty("C", Modifier::Mut));
}

#[test]
fn read_receiver_cannot_assign() {
    let err = run(
        CLONE_MIX,
        &[("mycaps", ty("A", Modifier::Read))],
        "mycaps.f.f = 3",
        None,
    )
    .unwrap_err();
    assert_eq!(err.code, ErrorCode::ReadAssign);
    assert!(run(
        CLONE_MIX,
        &[("mycaps", ty("A", Modifier::Caps))],
        "mycaps.f.f = 3",
        None
    )
    .is_ok());
    let imm = run(
        CLONE_MIX,
        &[("i", ty("A", Modifier::Imm))],
        "i.f.f = 3",
        None,
    )
    .unwrap_err();
    assert_eq!(imm.code, ErrorCode::ReadAssign);
}

#[test]
fn clone_mix_variants() {
    let line1 = "A a1 = new A(new B(0));
        caps A mycaps = {A a2 = new A(new B(1)); a1.mix(a2).clone()};
        mycaps.f.f = 3; a1.f.f = 3";
    assert!(main_of(CLONE_MIX, line1).is_ok());
    let imm1 = line1
        .replace("caps A mycaps", "imm A mycaps")
        .replace("mycaps.f.f = 3;", "");
    assert!(main_of(CLONE_MIX, &imm1).is_ok());
    let line2 = line1.replace("a1.mix(a2).clone()}", "a1.mix(a2).clone().mix(a2)}");
    assert_eq!(
        main_of(CLONE_MIX, &line2).unwrap_err().code,
        ErrorCode::Promote
    );
    let read3 = line1.replace("caps A mycaps", "read A mycaps");
    assert_eq!(
        main_of(CLONE_MIX, &read3).unwrap_err().code,
        ErrorCode::ReadAssign
    );
}

#[test]
fn caps_variables_are_linear() {
    let twice = "caps A c = new A(new B(0)); c.f.f = 3; c";
    assert_eq!(
        main_of(CLONE_MIX, twice).unwrap_err().code,
        ErrorCode::Linear
    );
    let alias = "caps A c = new A(new B(0)); imm A i = c; c.f.f = 3";
    assert_eq!(
        main_of(CLONE_MIX, alias).unwrap_err().code,
        ErrorCode::Linear
    );
    let once = "caps A c = new A(new B(0)); c.f.f = 3";
    assert!(main_of(CLONE_MIX, once).is_ok());
    let mut_twice = "A c = new A(new B(0)); c.f.f = 3; c";
    assert!(main_of(CLONE_MIX, mut_twice).is_ok());
}

#[test]
fn imm_field_cuts_result_link() {
    let classes = "class B {int f;} class C {imm B f1; B f2;}";
    let env = [
        ("z1", ty("B", Modifier::Imm)),
        ("z2", ty("B", Modifier::Mut)),
    ];
    let j = run(classes, &env, "new C(z1,z2).f1", None).unwrap();
    assert_eq!(j.ty, ty("B", Modifier::Imm));
    assert!(j.is_lent("z1").unwrap());
    assert!(j.ctx.coeff("z1").is_disjoint(&j.ctx.coeff("z2")));
    let j = run(classes, &env, "new C(z1,z2).f2", None).unwrap();
    assert!(!j.is_lent("z2").unwrap() && j.is_lent("z1").unwrap());
    let mut_z1 = [
        ("z1", ty("B", Modifier::Mut)),
        ("z2", ty("B", Modifier::Mut)),
    ];
    assert_eq!(
        run(classes, &mut_z1, "new C(z1,z2)", None)
            .unwrap_err()
            .code,
        ErrorCode::Promote
    );
    assert!(run(classes, &mut_z1, "new C(new B(1),z2)", None).is_ok());
}

#[test]
fn constructors_are_mut() {
    let j = run(BC, &[], "new B(1)", None).unwrap();
    assert_eq!(j.ty, ty("B", Modifier::Mut));
}

#[test]
fn seal_and_linear_sum() {
    let w = TypeCtx::singleton("w", ty("B", Modifier::Mut), Coeffect::res());
    assert_eq!(
        seal(&w, Modifier::Seal(4)).unwrap().ty("w"),
        Some(&ty("B", Modifier::Seal(4)))
    );
    let lent = TypeCtx::singleton(
        "w",
        ty("B", Modifier::Mut),
        Coeffect::singleton(LinkGen::new().fresh()),
    );
    assert_eq!(seal(&lent, Modifier::Seal(4)).unwrap(), lent);
    let r = TypeCtx::singleton("r", ty("B", Modifier::Read), Coeffect::res());
    assert_eq!(
        seal(&r, Modifier::Seal(0)).unwrap_err().code,
        ErrorCode::Combine
    );

    let c = TypeCtx::singleton("c", ty("C", Modifier::Caps), Coeffect::res());
    assert_eq!(ctx_sum_linear(&c, &c).unwrap_err().code, ErrorCode::Linear);
    let d = TypeCtx::singleton("d", ty("C", Modifier::Caps), Coeffect::res());
    assert_eq!(ctx_sum_linear(&c, &d).unwrap(), c.sum(&d));
    let m = TypeCtx::singleton("m", ty("C", Modifier::Mut), Coeffect::res());
    assert_eq!(ctx_sum_linear(&m, &m).unwrap(), m.sum(&m));
}

fn mods(pairs: &[(&str, Modifier)]) -> ModMap {
    pairs.iter().map(|(r, m)| (r.to_string(), *m)).collect()
}

#[test]
fn memory_with_modifiers() {
    let t = parse("class B {int f;} class A {B f;} class D {imm B f;} ; 0")
        .unwrap()
        .table;
    let mut m = Memory::new();
    m.insert("x", Object::new("B", vec![Value::Int(0)]));
    let mt = type_memory_mod(&t, &m, &mods(&[("x", Modifier::Imm)]), &mut LinkGen::new()).unwrap();
    assert_eq!(mt.ctx.coeff("x").len(), 1);
    assert!(!mt.ctx.coeff("x").contains_res());

    let mut m = Memory::new();
    m.insert("x", Object::new("A", vec![Value::Ref("y".into())]));
    m.insert("y", Object::new("B", vec![Value::Int(0)]));
    let bad = type_memory_mod(
        &t,
        &m,
        &mods(&[("x", Modifier::Imm), ("y", Modifier::Mut)]),
        &mut LinkGen::new(),
    );
    assert_eq!(bad.unwrap_err().code, ErrorCode::Memory);
    let sealed = mods(&[("x", Modifier::Seal(3)), ("y", Modifier::Seal(3))]);
    let mt = type_memory_mod(&t, &m, &sealed, &mut LinkGen::new()).unwrap();
    assert_eq!(mt.ctx.coeff("x"), mt.ctx.coeff("y"));
    assert!(deep_modifiers_hold(&m, &sealed).is_ok());
    let split = mods(&[("x", Modifier::Seal(3)), ("y", Modifier::Seal(4))]);
    assert!(type_memory_mod(&t, &m, &split, &mut LinkGen::new()).is_err());
    assert!(deep_modifiers_hold(&m, &split).is_err());
    let read = mods(&[("x", Modifier::Read), ("y", Modifier::Read)]);
    assert!(type_memory_mod(&t, &m, &read, &mut LinkGen::new()).is_err());
}

#[test]
fn imm_edges_do_not_share() {
    let t = parse("class B {int f;} class A {B f;} class D {imm B f;} ; 0")
        .unwrap()
        .table;
    let mut m = Memory::new();
    m.insert("x", Object::new("D", vec![Value::Ref("y".into())]));
    m.insert("y", Object::new("B", vec![Value::Int(0)]));
    m.insert("u", Object::new("A", vec![Value::Ref("v".into())]));
    m.insert("v", Object::new("B", vec![Value::Int(1)]));
    let ms = mods(&[
        ("x", Modifier::Mut),
        ("y", Modifier::Imm),
        ("u", Modifier::Mut),
        ("v", Modifier::Mut),
    ]);
    let rel = mod_sharing(&m, &ms);
    assert!(!rel.related("x", "y"));
    assert!(rel.related("u", "v"));
    let mt = type_memory_mod(&t, &m, &ms, &mut LinkGen::new()).unwrap();
    for a in ["x", "y", "u", "v"] {
        for b in ["x", "y", "u", "v"] {
            assert_eq!(
                rel.related(a, b),
                mt.ctx.coeff(a) == mt.ctx.coeff(b),
                "{a} {b}"
            );
        }
    }
    assert_eq!(
        imm_closure(&t, &m, &BTreeSet::new()),
        BTreeSet::from(["y".to_string()])
    );
}

fn block_memory() -> Memory {
    let mut m = Memory::new();
    m.insert(
        "x",
        Object::new("C", vec![Value::Ref("x1".into()), Value::Ref("x1".into())]),
    );
    m.insert("x1", Object::new("B", vec![Value::Int(0)]));
    m.insert("y", Object::new("B", vec![Value::Int(1)]));
    m
}

#[test]
fn worked_reduction_seals_fresh_reference() {
    let t = table(BC);
    let caps = ty("C", Modifier::Caps);
    let mut m = block_memory();
    let e0 = parse_expr("{B z = new B(2); x.f1 = y; new C(z,z)}").unwrap();
    let c0 = type_configuration_mod(
        &t,
        &e0,
        &m,
        &BTreeSet::new(),
        Some(&caps),
        Mode::Source,
        &mut LinkGen::new(),
    )
    .unwrap();
    assert!(c0.mods.values().all(|m| *m == Modifier::Mut));

    m.insert("w", Object::new("B", vec![Value::Int(2)]));
    let e1 = parse_expr("{B z = w; x.f1 = y; new C(z,z)}").unwrap();
    let c1 = type_configuration_mod(
        &t,
        &e1,
        &m,
        &BTreeSet::new(),
        Some(&caps),
        Mode::Runtime,
        &mut LinkGen::new(),
    )
    .unwrap();
    assert!(c1.mods["w"].is_seal());
    assert_eq!(c1.mods["x"], Modifier::Mut);
    assert_eq!(c1.ty(), &caps);
    for (r, before) in &c0.mods {
        assert!(leq(*before, c1.mods[r]));
    }
    let e2 = parse_expr("x.f1 = y; new C(w,w)").unwrap();
    let c2 = type_configuration_mod(
        &t,
        &e2,
        &m,
        &BTreeSet::new(),
        Some(&caps),
        Mode::Runtime,
        &mut LinkGen::new(),
    )
    .unwrap();
    assert!(c2.mods["w"].is_seal());

    let src = infer_mod(
        &t,
        &crate::sharing::mem_env(&m),
        &e1,
        Mode::Source,
        Some(&caps),
        &mut LinkGen::new(),
    );
    assert_eq!(src.unwrap_err().code, ErrorCode::Promote);
}

#[test]
fn erasure_matches_sharing_without_modifiers() {
    let p = parse(&format!("{CLONE_MIX} ; 0")).unwrap();
    let env: Env = [("a1", ty("A", Modifier::Mut))]
        .into_iter()
        .map(|(x, t)| (x.to_string(), t))
        .collect();
    for e in [
        "{A a2 = new A(new B(1)); a1.mix(a2).clone()}",
        "{A a2 = new A(new B(1)); a1.mix(a2).clone().mix(a2)}",
    ] {
        let e = parse_expr(e).unwrap();
        let ts = check_table(&p.table, &mut LinkGen::new()).unwrap();
        let s = infer(&ts, &env, &e, &mut LinkGen::new()).unwrap();
        let tm = check_table_mod(&p.table, &mut LinkGen::new()).unwrap();
        let m = infer_mod(&tm, &env, &e, Mode::Source, None, &mut LinkGen::new()).unwrap();
        assert_eq!(s.ctx.canonical(), m.ctx.canonical());
        assert_eq!(s.ty, m.ty.erase());
    }
}

#[test]
fn return_type_demand_promotes_body() {
    let ok = "class B {int f; caps B fresh[read ^{l}]() {new B(this.f)}}";
    assert!(main_of(ok, "new B(1).fresh()").is_ok());
    let bad = "class B {int f; B g; caps B leak[^{res}]() {this.g}}";
    let p = parse(&format!("{bad} ; 0")).unwrap();
    assert_eq!(
        check_table_mod(&p.table, &mut LinkGen::new())
            .unwrap_err()
            .code,
        ErrorCode::Promote
    );
}
