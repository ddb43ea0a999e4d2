//! Strategies and law checkers shared by the law proptests and the
//! acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Debug;

use coeffect_core::algebra::{
    Coeffect, CoeffectCtx, FinMap, Link, Module, Nat, Semiring, UsageGrade,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const CASES: u32 = 10_000;

pub fn config() -> ProptestConfig {
    ProptestConfig::with_cases(CASES)
}

pub fn usage() -> impl Strategy<Value = UsageGrade> {
    prop::sample::select(UsageGrade::ALL.to_vec())
}

pub fn nat() -> impl Strategy<Value = Nat> {
    prop_oneof![Just(Nat(0)), Just(Nat(1)), (0u64..10_000).prop_map(Nat)]
}

// A small pool so that random link sets overlap often.
pub fn link() -> impl Strategy<Value = Link> {
    prop_oneof![
        2 => Just(Link::Res),
        3 => prop::sample::select(vec!["a", "b", "c"]).prop_map(|n| Link::Named(n.into())),
        2 => (0u64..3).prop_map(Link::Fresh),
    ]
}

pub fn coeffect() -> impl Strategy<Value = Coeffect> {
    prop::collection::btree_set(link(), 0..4).prop_map(|s| s.into_iter().collect())
}

const VARS: [&str; 5] = ["x", "y", "z", "u", "v"];

pub fn finmap<R: Semiring + Debug>(
    scalar: impl Strategy<Value = R>,
) -> impl Strategy<Value = FinMap<R>> {
    prop::collection::vec((prop::sample::select(VARS.to_vec()), scalar), 0..5)
        .prop_map(|es| es.into_iter().map(|(v, r)| (v.to_string(), r)).collect())
}

pub fn ctx() -> impl Strategy<Value = CoeffectCtx> {
    prop::collection::btree_map(prop::sample::select(VARS.to_vec()), coeffect(), 0..5)
        .prop_map(|m| m.into_iter().map(|(v, c)| (v.to_string(), c)).collect())
}

pub fn semiring_laws<R: Semiring>(a: &R, b: &R, c: &R) -> Result<(), TestCaseError> {
    let (zero, one) = (R::zero(), R::one());
    prop_assert_eq!(a.add(&b.add(c)), a.add(b).add(c));
    prop_assert_eq!(a.add(b), b.add(a));
    prop_assert_eq!(a.add(&zero), a.clone());
    prop_assert_eq!(a.mul(&b.mul(c)), a.mul(b).mul(c));
    prop_assert_eq!(a.mul(&one), a.clone());
    prop_assert_eq!(one.mul(a), a.clone());
    prop_assert_eq!(a.mul(&zero), zero.clone());
    prop_assert_eq!(zero.mul(a), zero.clone());
    prop_assert_eq!(a.mul(&b.add(c)), a.mul(b).add(&a.mul(c)));
    prop_assert_eq!(a.add(b).mul(c), a.mul(c).add(&b.mul(c)));
    // Preorder, compatible with both operations.
    prop_assert!(a.leq(a));
    if a.leq(b) && b.leq(c) {
        prop_assert!(a.leq(c));
    }
    if a.leq(b) {
        prop_assert!(a.add(c).leq(&b.add(c)));
        prop_assert!(a.mul(c).leq(&b.mul(c)));
        prop_assert!(c.mul(a).leq(&c.mul(b)));
    }
    // Join is an upper bound.
    prop_assert!(a.leq(&a.join(b)) && b.leq(&a.join(b)));
    Ok(())
}

pub fn module_laws<R: Semiring, M: Module<R>>(
    m: &M,
    eq: impl Fn(&M::Elem, &M::Elem) -> bool,
    r: &R,
    s: &R,
    a: &M::Elem,
    b: &M::Elem,
    c: &M::Elem,
) -> Result<(), TestCaseError>
where
    M::Elem: Clone + Debug,
{
    let check = |l: M::Elem, r: M::Elem, law: &str| {
        if eq(&l, &r) {
            Ok(())
        } else {
            Err(TestCaseError::fail(format!("{law}: {l:?} vs {r:?}")))
        }
    };
    check(m.add(a, &m.add(b, c)), m.add(&m.add(a, b), c), "add assoc")?;
    check(m.add(a, b), m.add(b, a), "add comm")?;
    check(m.add(a, &m.zero()), a.clone(), "add unit")?;
    check(m.scale(&R::one(), a), a.clone(), "scale unit")?;
    check(m.scale(&R::zero(), a), m.zero(), "scale zero")?;
    check(m.scale(r, &m.zero()), m.zero(), "scale of zero")?;
    check(
        m.scale(&r.mul(s), a),
        m.scale(r, &m.scale(s, a)),
        "scale assoc",
    )?;
    check(
        m.scale(r, &m.add(a, b)),
        m.add(&m.scale(r, a), &m.scale(r, b)),
        "scale over add",
    )?;
    check(
        m.scale(&r.add(s), a),
        m.add(&m.scale(r, a), &m.scale(s, a)),
        "add over scale",
    )?;
    Ok(())
}

/// Naive saturation: merge any two overlapping coeffects until stable.
pub fn brute_closure(c: &CoeffectCtx) -> CoeffectCtx {
    let mut cs: Vec<(String, BTreeSet<Link>)> = c
        .iter()
        .map(|(v, c)| (v.clone(), c.iter().cloned().collect()))
        .collect();
    loop {
        let mut changed = false;
        for i in 0..cs.len() {
            for j in 0..cs.len() {
                if !cs[i].1.is_disjoint(&cs[j].1) && !cs[j].1.is_subset(&cs[i].1) {
                    let add = cs[j].1.clone();
                    cs[i].1.extend(add);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    cs.into_iter()
        .map(|(v, s)| (v, s.into_iter().collect()))
        .collect()
}
