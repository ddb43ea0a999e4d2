use rand::Rng;
use rayon::prelude::*;

use super::gen::{gen_classes, gen_memory, gen_subject, gen_typed_subject, rng_for, GenOptions};
use super::report::{CaseResult, SuiteReport};
use super::shrink::shrink;
use super::verify::{
    check_memory_lemma, verify_capsule, verify_immutability, verify_subject_reduction, Failure,
    Verdict,
};
use super::{Subject, System};
use crate::lang::parse;

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub start_seed: u64,
    pub count: usize,
    pub gen: GenOptions,
    /// Shrink failing subjects before reporting them.
    pub shrink: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            start_seed: 0,
            count: 1000,
            gen: GenOptions::default(),
            shrink: true,
        }
    }
}

impl SuiteOptions {
    fn seeds(&self) -> Vec<u64> {
        (0..self.count as u64)
            .map(|i| self.start_seed + i)
            .collect()
    }
}

fn case(
    seed: u64,
    s: &Subject,
    verdict: Verdict,
    opts: &SuiteOptions,
    check: impl Fn(&Subject) -> Verdict,
) -> CaseResult {
    let mut c = CaseResult::new(format!("seed-{seed}"), verdict);
    if c.verdict.is_fail() {
        let shown = if opts.shrink {
            shrink(s, |t| check(t).is_fail())
        } else {
            s.clone()
        };
        c.counterexample = Some(shown.to_string());
    }
    c
}

fn no_subject(seed: u64, what: &str) -> CaseResult {
    CaseResult::new(
        format!("seed-{seed}"),
        Verdict::NotApplicable {
            reason: format!("no {what} candidate for this seed"),
        },
    )
}

/// Subject reduction over typed random configurations.
pub fn subject_reduction_suite(system: System, opts: &SuiteOptions) -> SuiteReport {
    let cases = opts
        .seeds()
        .into_par_iter()
        .map(|seed| match gen_typed_subject(seed, system, opts.gen) {
            None => no_subject(seed, "typed"),
            Some((s, _)) => {
                let check = |t: &Subject| verify_subject_reduction(t, system, None);
                case(seed, &s, check(&s), opts, check)
            }
        })
        .collect();
    SuiteReport::new(format!("subject-reduction-{system}"), cases)
}

/// Runtime capsule check over random capsule-typed configurations. For
/// each seed, candidates are drawn until one is capsule-typed.
pub fn capsule_suite(system: System, opts: &SuiteOptions) -> SuiteReport {
    let cases = opts
        .seeds()
        .into_par_iter()
        .map(|seed| {
            let found = (0..64u64).find_map(|k| {
                let s = gen_subject(seed.wrapping_add(k << 40), system, opts.gen);
                let v = verify_capsule(&s, system);
                (!matches!(v, Verdict::NotApplicable { .. })).then_some((s, v))
            });
            match found {
                None => no_subject(seed, "capsule-typed"),
                Some((s, v)) => case(seed, &s, v, opts, |t| verify_capsule(t, system)),
            }
        })
        .collect();
    SuiteReport::new(format!("capsule-{system}"), cases)
}

/// Runtime immutability check over typed random configurations with the
/// modifier rules.
pub fn immutability_suite(opts: &SuiteOptions) -> SuiteReport {
    let cases = opts
        .seeds()
        .into_par_iter()
        .map(
            |seed| match gen_typed_subject(seed, System::Modifiers, opts.gen) {
                None => no_subject(seed, "typed"),
                Some((s, _)) => case(seed, &s, verify_immutability(&s), opts, verify_immutability),
            },
        )
        .collect();
    SuiteReport::new("immutability", cases)
}

/// Typing of random memories (cycles allowed) against the sharing relation.
pub fn memory_lemma_suite(system: System, opts: &SuiteOptions) -> SuiteReport {
    let cases = opts
        .seeds()
        .into_par_iter()
        .map(|seed| {
            let mut rng = rng_for(seed);
            let table = gen_classes(&mut rng, system);
            let n = rng.gen_range(1..=8);
            let (mem, mods) = gen_memory(&mut rng, &table, system, n);
            let result = match system {
                System::Sharing => check_memory_lemma(&table, &mem, None),
                System::Modifiers => check_memory_lemma(&table, &mem, Some(&mods)),
            };
            let verdict = match result {
                Ok(()) => Verdict::Pass { steps: 0 },
                Err(msg) => Verdict::Fail(Failure {
                    step: 0,
                    rule: None,
                    msg: format!("{msg}; memory {mem}"),
                }),
            };
            CaseResult::new(format!("seed-{seed}"), verdict)
        })
        .collect();
    SuiteReport::new(format!("memory-lemma-{system}"), cases)
}

/// Generated programs print and parse back to the same program.
pub fn parse_round_trip_suite(system: System, opts: &SuiteOptions) -> SuiteReport {
    let cases = opts
        .seeds()
        .into_par_iter()
        .map(|seed| {
            let p = gen_subject(seed, system, opts.gen).program();
            let text = p.to_string();
            let verdict = match parse(&text) {
                Ok(q) if q == p => Verdict::Pass { steps: 0 },
                Ok(_) => Verdict::Fail(Failure {
                    step: 0,
                    rule: None,
                    msg: format!("reparsed program differs:\n{text}"),
                }),
                Err(e) => Verdict::Fail(Failure {
                    step: 0,
                    rule: None,
                    msg: format!("{e}:\n{text}"),
                }),
            };
            CaseResult::new(format!("seed-{seed}"), verdict)
        })
        .collect();
    SuiteReport::new(format!("parse-round-trip-{system}"), cases)
}
