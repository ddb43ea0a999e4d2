mod common;

use coeffect_core::algebra::{
    ClosedCtx, Closure, Coeffect, CoeffectCtx, FinMap, Fixpoint, Module, Structural,
};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config())]

    #[test]
    fn usage_grades_form_a_semiring(a in usage(), b in usage(), c in usage()) {
        semiring_laws(&a, &b, &c)?;
    }

    #[test]
    fn naturals_form_a_semiring(a in nat(), b in nat(), c in nat()) {
        semiring_laws(&a, &b, &c)?;
    }

    #[test]
    fn link_sets_form_a_semiring(a in coeffect(), b in coeffect(), c in coeffect()) {
        semiring_laws(&a, &b, &c)?;
    }

    #[test]
    fn structural_usage_module(
        r in usage(), s in usage(),
        a in finmap(usage()), b in finmap(usage()), c in finmap(usage()),
    ) {
        module_laws(&Structural::new(), |x, y| x == y, &r, &s, &a, &b, &c)?;
    }

    #[test]
    fn structural_nat_module(
        r in nat(), s in nat(),
        a in finmap(nat()), b in finmap(nat()), c in finmap(nat()),
    ) {
        module_laws(&Structural::new(), |x, y| x == y, &r, &s, &a, &b, &c)?;
    }

    #[test]
    fn structural_link_module(
        r in coeffect(), s in coeffect(),
        a in finmap(coeffect()), b in finmap(coeffect()), c in finmap(coeffect()),
    ) {
        module_laws(&Structural::new(), |x, y| x == y, &r, &s, &a, &b, &c)?;
    }

    #[test]
    fn closed_context_module(
        r in coeffect(), s in coeffect(), a in ctx(), b in ctx(), c in ctx(),
    ) {
        let (a, b, c) = (a.closure(), b.closure(), c.closure());
        module_laws(&ClosedCtx, |x: &CoeffectCtx, y| x.support_eq(y), &r, &s, &a, &b, &c)?;
        let fix = Fixpoint::new(Structural::<Coeffect>::new(), Closure);
        let (fa, fb, fc) = (FinMap::from(&a), FinMap::from(&b), FinMap::from(&c));
        module_laws(&fix, |x, y| x == y, &r, &s, &fa, &fb, &fc)?;
    }

    #[test]
    fn fixpoint_construction_is_closed_context_module(
        r in coeffect(), a in ctx(), b in ctx(),
    ) {
        let fix = Fixpoint::new(Structural::<Coeffect>::new(), Closure);
        let (fa, fb) = (FinMap::from(&a), FinMap::from(&b));
        prop_assert_eq!(fix.add(&fa, &fb), FinMap::from(&ClosedCtx.add(&a, &b)));
        prop_assert_eq!(fix.scale(&r, &fa), FinMap::from(&ClosedCtx.scale(&r, &a)));
        prop_assert_eq!(fix.zero(), FinMap::from(&ClosedCtx.zero()));
    }

    #[test]
    fn closure_matches_naive_saturation(a in ctx()) {
        let closed = a.closure();
        prop_assert_eq!(&closed, &brute_closure(&a));
        prop_assert!(closed.is_closed());
        prop_assert_eq!(closed.closure(), closed.clone());
        for (v, c) in a.iter() {
            prop_assert!(c.is_subset(&closed.coeff(v)));
        }
    }
}
