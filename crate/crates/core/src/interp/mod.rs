//! Small-step reference interpreter and the dynamic sharing and
//! reachability relations.

mod eval;
mod memory;
mod relations;

pub use eval::{
    reduce_star, step, subst, Binding, Outcome, RefGen, Rule, Step, StepInfo, Trace, TraceStep,
    DEFAULT_BUDGET,
};
pub use memory::{Memory, Object, Value};
pub use relations::{reach, sharing_rel, sharing_rel_filtered, Partition};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{parse, parse_expr};

    fn block_mem() -> Memory {
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
    fn block_program_runs_to_fresh_capsule() {
        let p = parse(
            "class B {int f;} class C {B f1; B f2;} ; {B z = new B(2); x.f1 = y; new C(z,z)}",
        )
        .unwrap();
        let t = reduce_star(
            &p.table,
            &p.main,
            &block_mem(),
            &mut RefGen::new(),
            DEFAULT_BUDGET,
        );
        let Outcome::Done(Value::Ref(w)) = &t.outcome else {
            panic!("{:?}", t.outcome)
        };
        let mem = t.final_mem();
        assert_eq!(mem.len(), 5);
        assert_eq!(
            mem.get("x").unwrap().fields,
            vec![Value::Ref("y".into()), Value::Ref("x1".into())]
        );
        let wobj = mem.get(w).unwrap();
        assert_eq!(wobj.class, "C");
        let z = wobj.fields[0].as_ref().unwrap();
        assert_eq!(wobj.fields[0], wobj.fields[1]);
        assert_eq!(mem.get(z).unwrap().fields, vec![Value::Int(2)]);
        let rel = sharing_rel(mem);
        assert!(rel.related(w, z));
        assert!(!rel.related(w, "x"));
        assert_eq!(
            reach(mem, w),
            [w.clone(), z.to_string()].into_iter().collect()
        );
        assert!(t.steps.len() >= 3);
    }

    #[test]
    fn field_access_step() {
        let p = parse("class B {int f;} class C {B f1; B f2;} ; 0").unwrap();
        let mut m = block_mem();
        let s = step(
            &p.table,
            &parse_expr("x.f1").unwrap(),
            &mut m,
            &mut RefGen::new(),
        );
        assert_eq!(
            s,
            Step::Next(
                parse_expr("x1").unwrap(),
                StepInfo {
                    rule: Rule::FieldAccess,
                    bindings: vec![]
                }
            )
        );
    }

    #[test]
    fn stuck_and_budget_are_distinct() {
        let p = parse("class A { A f; A loop() {this.loop()} } ; 0").unwrap();
        let mut m = Memory::new();
        m.insert("a", Object::new("A", vec![Value::Ref("a".into())]));
        let t = reduce_star(
            &p.table,
            &parse_expr("a.loop()").unwrap(),
            &m,
            &mut RefGen::new(),
            50,
        );
        assert_eq!(t.outcome, Outcome::BudgetExhausted);
        assert_eq!(t.steps.len(), 50);
        let t = reduce_star(
            &p.table,
            &parse_expr("3.f").unwrap(),
            &m,
            &mut RefGen::new(),
            50,
        );
        assert!(matches!(t.outcome, Outcome::Stuck(_)));
        let t = reduce_star(
            &p.table,
            &parse_expr("a").unwrap(),
            &m,
            &mut RefGen::new(),
            50,
        );
        assert!(t.steps.is_empty());
    }

    #[test]
    fn substitution_avoids_capture() {
        let e = parse_expr("{A y = x; y.f = z; x}").unwrap();
        let sub = [("x".to_string(), parse_expr("y").unwrap())]
            .into_iter()
            .collect();
        let out = subst(&e, &sub);
        assert_eq!(out, parse_expr("{A y_0 = y; y_0.f = z; y}").unwrap());
    }

    #[test]
    fn reach_on_self_loop_pair() {
        let mut m = Memory::new();
        m.insert(
            "x",
            Object::new("C", vec![Value::Ref("y".into()), Value::Ref("y".into())]),
        );
        m.insert("y", Object::new("B", vec![Value::Int(0)]));
        assert_eq!(reach(&m, "x").len(), 2);
    }
}
