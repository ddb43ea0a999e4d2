//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p coeffect-core --test acceptance -- --nocapture`.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use coeffect_core::algebra::{
    CanonGroup, ClosedCtx, Closure, Coeffect, FinMap, Fixpoint, LinkGen, Module, Nat, Structural,
    UsageGrade,
};
use coeffect_core::harness::{
    capsule_suite, capsule_violations, check_subject, immutability_suite, immutability_violations,
    load_corpus, memory_lemma_suite, subject_reduction_suite, verify_capsule, verify_immutability,
    verify_subject_reduction, CorpusEntry, SuiteOptions, SuiteReport, System, Verdict,
};
use coeffect_core::lambda::{linfer, parse_lterm, Grade, LType};
use coeffect_core::lang::Type;
use coeffect_core::sharing::{check_table, infer, Env, Judgment};
use common::*;
use proptest::strategy::Strategy;
use proptest::test_runner::TestRunner;

/// Seeded random programs and memories per suite.
const RANDOM_CASES: usize = 1000;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus() -> Vec<CorpusEntry> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    load_corpus(&dir).expect("corpus loads")
}

fn entry(name: &str) -> CorpusEntry {
    corpus()
        .into_iter()
        .find(|e| e.name == name)
        .unwrap_or_else(|| panic!("no corpus entry {name}"))
}

fn group(vars: &[&str], res: bool) -> CanonGroup {
    CanonGroup {
        vars: vars.iter().map(|s| s.to_string()).collect(),
        contains_res: res,
    }
}

/// Sharing judgment of the main expression of a corpus program under an
/// environment of plain class types.
fn judge(program: &str, vars: &[(&str, &str)]) -> Result<Judgment, String> {
    let e = entry(program);
    let mut gen = LinkGen::new();
    let t = check_table(&e.subject.table, &mut gen).map_err(|e| e.to_string())?;
    let env: Env = vars
        .iter()
        .map(|(x, c)| (x.to_string(), Type::class(*c)))
        .collect();
    infer(&t, &env, &e.subject.main, &mut gen).map_err(|e| e.to_string())
}

fn expect_groups(j: &Judgment, want: &[CanonGroup]) -> Result<(), String> {
    let got = j.ctx.canonical();
    if got.groups == want {
        Ok(())
    } else {
        Err(format!("groups {got}, expected {want:?}"))
    }
}

fn c1_golden_star() -> Outcome {
    let vars = [("x", "C"), ("y", "B"), ("z1", "B"), ("z2", "B")];
    let j = judge("assign-new", &vars)?;
    expect_groups(&j, &[group(&["x", "y"], false), group(&["z1", "z2"], true)])?;
    if j.ty != Type::class("C") {
        return Err(format!("type {}", j.ty));
    }
    Ok(format!("{} : {}", j.ctx.canonical(), j.ty))
}

fn c2_call_contexts() -> Outcome {
    let vars = [("x", "C"), ("z", "B"), ("y1", "B"), ("y2", "B"), ("y", "B")];
    let a = judge("call-distinct", &vars)?;
    expect_groups(&a, &[group(&["x", "z"], false), group(&["y1", "y2"], true)])?;
    let b = judge("call-shared", &vars)?;
    expect_groups(&b, &[group(&["x", "y", "z"], true)])?;
    Ok(format!(
        "x.m(z,y1,y2): {}; x.m(z,z,y): {}",
        a.ctx.canonical(),
        b.ctx.canonical()
    ))
}

fn c3_capsules() -> Outcome {
    let e1 = judge("mix-e1", &[("a1", "A")])?;
    let e2 = judge("mix-e2", &[("a1", "A")])?;
    if !e1.is_capsule() {
        return Err(format!("e1 not a capsule: {}", e1.ctx.canonical()));
    }
    if e2.is_capsule() {
        return Err("e2 reported as a capsule".into());
    }
    let c = e2.ctx.canonical();
    match c.group_of("a1") {
        Some(g) if g.contains_res => Ok(format!("e1 {}; e2 {}", e1.ctx.canonical(), c)),
        _ => Err(format!("a1 not with res in e2: {c}")),
    }
}

fn c4_modifier_goldens() -> Outcome {
    let cases = [
        ("read-line3", "E_READ_ASSIGN"),
        ("caps-line1", "ok"),
        ("bad-caps", "E_PROMOTE"),
        ("caps-double-use", "E_LINEAR"),
    ];
    let mut seen = Vec::new();
    for (name, want) in cases {
        let got = match check_subject(&entry(name).subject, System::Modifiers, None) {
            Ok(_) => "ok".to_string(),
            Err(e) => e.code.to_string(),
        };
        if got != want {
            return Err(format!("{name}: {got}, expected {want}"));
        }
        seen.push(format!("{name}={got}"));
    }
    Ok(seen.join(", "))
}

fn suite_line(r: &SuiteReport) -> Result<String, String> {
    if r.ok() && r.passed() > 0 {
        Ok(format!(
            "{} {}/{} passed",
            r.name,
            r.passed(),
            r.cases.len()
        ))
    } else {
        let first = r.failures().next().map(|c| {
            format!(
                "{:?}\n{}",
                c.verdict,
                c.counterexample.clone().unwrap_or_default()
            )
        });
        Err(format!(
            "{}: {} failed, {} passed; first: {}",
            r.name,
            r.failed(),
            r.passed(),
            first.unwrap_or_default()
        ))
    }
}

fn opts() -> SuiteOptions {
    SuiteOptions {
        count: RANDOM_CASES,
        ..SuiteOptions::default()
    }
}

fn c5_memory_lemma() -> Outcome {
    let mut lines = Vec::new();
    for system in [System::Sharing, System::Modifiers] {
        let r = memory_lemma_suite(system, &opts());
        if r.passed() != RANDOM_CASES {
            return Err(suite_line(&r)
                .err()
                .unwrap_or_else(|| "skipped cases".into()));
        }
        lines.push(suite_line(&r)?);
    }
    Ok(lines.join("; "))
}

fn c6_subject_reduction() -> Outcome {
    let mut corpus_steps = 0;
    for e in corpus() {
        for system in [System::Sharing, System::Modifiers] {
            let mut expected = vec![None];
            if system == System::Modifiers && e.expected_type.is_some() {
                expected.push(e.expected_type.as_ref());
            }
            for t in expected {
                if check_subject(&e.subject, system, t).is_err() {
                    continue;
                }
                match verify_subject_reduction(&e.subject, system, t) {
                    Verdict::Pass { steps } => corpus_steps += steps,
                    v => return Err(format!("{} {system}: {v:?}", e.name)),
                }
            }
        }
    }
    let mut lines = vec![format!("corpus {corpus_steps} steps")];
    for system in [System::Sharing, System::Modifiers] {
        lines.push(suite_line(&subject_reduction_suite(system, &opts()))?);
    }
    Ok(lines.join("; "))
}

fn c7_runtime_guarantees() -> Outcome {
    let mut lines = Vec::new();
    for e in corpus() {
        if e.expect.violates.is_some() {
            continue;
        }
        for system in [System::Sharing, System::Modifiers] {
            if let v @ Verdict::Fail(_) = verify_capsule(&e.subject, system) {
                return Err(format!("{} capsule {system}: {v:?}", e.name));
            }
        }
        if let v @ Verdict::Fail(_) = verify_immutability(&e.subject) {
            return Err(format!("{} immutability: {v:?}", e.name));
        }
    }
    for system in [System::Sharing, System::Modifiers] {
        lines.push(suite_line(&capsule_suite(system, &opts()))?);
    }
    lines.push(suite_line(&immutability_suite(&opts()))?);

    // e2: not capsule-typed, and running it connects a1 to the result.
    let e2 = entry("mix-e2");
    if check_subject(&e2.subject, System::Sharing, None)
        .map_err(|e| e.to_string())?
        .is_capsule()
        || !matches!(
            verify_capsule(&e2.subject, System::Sharing),
            Verdict::NotApplicable { .. }
        )
    {
        return Err("e2 accepted as a capsule".into());
    }
    let shared = capsule_violations(
        &e2.subject.table,
        &e2.subject,
        System::Sharing,
        &Default::default(),
    )
    .map_err(|f| f.to_string())?;
    if !shared.contains(&"a1".to_string()) {
        return Err(format!(
            "e2 run: a1 not shared with the result ({shared:?})"
        ));
    }
    // Line (4) after line (2): rejected statically, mutates mycaps at runtime.
    let l2 = entry("imm-line2-line4");
    match check_subject(&l2.subject, System::Modifiers, None) {
        Err(e) if e.code.to_string() == "E_PROMOTE" => {}
        other => return Err(format!("line (2) imm variant: {other:?}")),
    }
    let step = match immutability_violations(&l2.subject.table, &l2.subject) {
        Err(f) => f.step,
        Ok(n) => return Err(format!("line (2) run: {n} imm refs, none mutated")),
    };
    // Double use of a caps variable is the linearity control.
    if check_subject(&entry("caps-double-use").subject, System::Modifiers, None).is_ok() {
        return Err("double use of caps accepted".into());
    }
    lines.push(format!(
        "controls: e2 shares a1, line (2) mutates imm at step {step}"
    ));
    Ok(lines.join("; "))
}

fn run_laws<S: Strategy>(
    name: &str,
    strategy: S,
    law: impl Fn(S::Value) -> Result<(), proptest::test_runner::TestCaseError>,
) -> Result<String, String> {
    let mut runner = TestRunner::new(config());
    runner
        .run(&strategy, law)
        .map(|()| format!("{name} x{CASES}"))
        .map_err(|e| format!("{name}: {e}"))
}

fn c8_algebra() -> Outcome {
    let fix = || Fixpoint::new(Structural::<Coeffect>::new(), Closure);
    let eq = |a: &FinMap<Coeffect>, b: &FinMap<Coeffect>| a == b;
    let lines = [
        run_laws("0/1/w", (usage(), usage(), usage()), |(a, b, c)| {
            semiring_laws(&a, &b, &c)
        })?,
        run_laws("nat", (nat(), nat(), nat()), |(a, b, c)| {
            semiring_laws(&a, &b, &c)
        })?,
        run_laws(
            "links",
            (coeffect(), coeffect(), coeffect()),
            |(a, b, c)| semiring_laws(&a, &b, &c),
        )?,
        run_laws(
            "structural 0/1/w",
            (
                usage(),
                usage(),
                finmap(usage()),
                finmap(usage()),
                finmap(usage()),
            ),
            |(r, s, a, b, c)| module_laws(&Structural::new(), |x, y| x == y, &r, &s, &a, &b, &c),
        )?,
        run_laws(
            "structural nat",
            (nat(), nat(), finmap(nat()), finmap(nat()), finmap(nat())),
            |(r, s, a, b, c)| module_laws(&Structural::new(), |x, y| x == y, &r, &s, &a, &b, &c),
        )?,
        run_laws(
            "structural links",
            (
                coeffect(),
                coeffect(),
                finmap(coeffect()),
                finmap(coeffect()),
                finmap(coeffect()),
            ),
            |(r, s, a, b, c)| module_laws(&Structural::new(), eq, &r, &s, &a, &b, &c),
        )?,
        run_laws(
            "closed contexts",
            (coeffect(), coeffect(), ctx(), ctx(), ctx()),
            |(r, s, a, b, c)| {
                let (a, b, c) = (a.closure(), b.closure(), c.closure());
                module_laws(&ClosedCtx, |x, y| x.support_eq(y), &r, &s, &a, &b, &c)?;
                let (fa, fb, fc) = (FinMap::from(&a), FinMap::from(&b), FinMap::from(&c));
                module_laws(&fix(), eq, &r, &s, &fa, &fb, &fc)?;
                proptest::prop_assert_eq!(
                    fix().add(&fa, &fb),
                    FinMap::from(&ClosedCtx.add(&a, &b))
                );
                proptest::prop_assert_eq!(
                    fix().scale(&r, &fa),
                    FinMap::from(&ClosedCtx.scale(&r, &a))
                );
                proptest::prop_assert_eq!(&a, &brute_closure(&a));
                Ok(())
            },
        )?,
    ];
    Ok(lines.join(", "))
}

fn grade_of_y<R: Grade>(cbv: bool) -> Result<R, String> {
    let t = parse_lterm::<R>("(\\x:int. 5) y").map_err(|e| e.to_string())?;
    let env: BTreeMap<String, LType<R>> = [("y".to_string(), LType::Int)].into();
    let (ty, g) = linfer(&t, &env, cbv).map_err(|e| e.to_string())?;
    if ty != LType::Int {
        return Err(format!("type {ty}"));
    }
    Ok(g["y"].clone())
}

fn c9_lambda() -> Outcome {
    use coeffect_core::algebra::Semiring;
    let cbn = grade_of_y::<UsageGrade>(false)?;
    let cbv = grade_of_y::<UsageGrade>(true)?;
    let nat_cbn = grade_of_y::<Nat>(false)?;
    let nat_cbv = grade_of_y::<Nat>(true)?;
    // Under cbv the argument is scaled by (0 ⊔ 1) · 1.
    let want_cbv = UsageGrade::Zero
        .join(&UsageGrade::One)
        .mul(&UsageGrade::One);
    let want_nat = Nat(0).join(&Nat(1)).mul(&Nat(1));
    if cbn == UsageGrade::Zero
        && cbv == want_cbv
        && !cbv.is_zero()
        && nat_cbn == Nat(0)
        && nat_cbv == want_nat
    {
        Ok(format!(
            "0/1/w: y:{cbn} by name, y:{cbv} by value; nat: y:{nat_cbn} by name, y:{nat_cbv} by value"
        ))
    } else {
        Err(format!(
            "cbn {cbn}, cbv {cbv}, nat cbn {nat_cbn}, nat cbv {nat_cbv}"
        ))
    }
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("golden judgment", c1_golden_star),
        ("golden call contexts", c2_call_contexts),
        ("capsule discrimination", c3_capsules),
        ("modifier goldens", c4_modifier_goldens),
        ("memory lemma", c5_memory_lemma),
        ("subject reduction", c6_subject_reduction),
        ("runtime capsule and immutability", c7_runtime_guarantees),
        ("algebra laws", c8_algebra),
        ("lambda demo", c9_lambda),
    ];
    // Written to the stdout handle, not `println!`, so the lines show up
    // without `--nocapture`.
    let mut out = std::io::stdout();
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let line = match check() {
            Ok(detail) => format!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed.push(i + 1);
                format!("FAIL {} {name}: {why}", i + 1)
            }
        };
        writeln!(out, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
