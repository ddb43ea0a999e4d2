mod diag;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use coeffect_core::algebra::{LinkGen, Nat, UsageGrade};
use coeffect_core::harness::{
    capsule_suite, check_subject, immutability_suite, junit_xml, load_corpus,
    subject_reduction_suite, verify_capsule, verify_immutability, verify_subject_reduction,
    CaseResult, Subject, SuiteOptions, SuiteReport, System, Verdict,
};
use coeffect_core::interp::{reduce_star, Memory, Outcome, RefGen, DEFAULT_BUDGET};
use coeffect_core::lambda::{linfer, parse_lterm, parse_ltype, Grade, LType};
use coeffect_core::lang::{parse, Program, Type};
use coeffect_core::modifiers::{check_table_mod, infer_mod, Mode};
use coeffect_core::sharing::{check_table, infer, judgment_json, Env, Judgment, SCHEMA};
use serde_json::json;

use diag::Diagnostic;

#[derive(Parser)]
#[command(
    name = "coeffect-lab",
    version,
    about = "Sharing coeffects and type modifiers"
)]
struct Cli {
    /// Start seed for generated programs.
    #[arg(long, global = true, env = "COEFFECT_LAB_SEED", default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemArg {
    Sharing,
    Modifiers,
}

impl From<SystemArg> for System {
    fn from(s: SystemArg) -> System {
        match s {
            SystemArg::Sharing => System::Sharing,
            SystemArg::Modifiers => System::Modifiers,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    Sr,
    Capsule,
    Imm,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemiringArg {
    /// 0, 1 and ω.
    Zow,
    /// Natural numbers.
    Nat,
}

#[derive(Subcommand)]
enum Cmd {
    /// Type-check a program and print its judgment.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "sharing")]
        system: SystemArg,
        /// Types of free variables, e.g. `x=C,y=B@imm`. Without it, free
        /// variables are references of the memory.
        #[arg(long, value_delimiter = ',')]
        env: Vec<String>,
        /// Initial memory (JSON); defaults to `<file stem>.mem.json` if present.
        #[arg(long)]
        mem: Option<PathBuf>,
        /// References the memory holds as `imm`.
        #[arg(long, value_delimiter = ',')]
        imm: Vec<String>,
        /// Type to check the expression against, e.g. `caps C`.
        #[arg(long)]
        expect: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run a program on a memory.
    Run {
        file: PathBuf,
        #[arg(long)]
        mem: Option<PathBuf>,
        /// Print each step as a JSON line.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        json: bool,
    },
    /// Check the theorems on a program, a corpus directory, or random programs.
    Verify {
        /// A program, or a directory with a `manifest.json`.
        file: Option<PathBuf>,
        #[arg(long, value_enum)]
        theorem: Vec<Theorem>,
        #[arg(long, value_enum)]
        system: Vec<SystemArg>,
        #[arg(long)]
        mem: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        imm: Vec<String>,
        #[arg(long)]
        expect: Option<String>,
        /// Also check this many random programs, starting at `--seed`.
        #[arg(long, default_value_t = 0)]
        random: usize,
        /// Write a JUnit XML report here.
        #[arg(long)]
        junit: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Grade a λ-term.
    Lambda {
        file: PathBuf,
        #[arg(long, value_enum)]
        semiring: SemiringArg,
        #[arg(long)]
        cbv: bool,
        /// Types of free variables, e.g. `f=int ->[1] int`; others are `int`.
        #[arg(long, value_delimiter = ',')]
        env: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

/// A failed command: diagnostics already printed, exit with 1.
struct Failed;

type CmdResult = Result<std::result::Result<(), Failed>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Check {
            file,
            system,
            env,
            mem,
            imm,
            expect,
            json,
        } => check(&file, system.into(), &env, mem, &imm, expect, json),
        Cmd::Run {
            file,
            mem,
            trace,
            budget,
            json,
        } => run(&file, mem, trace, budget, json),
        Cmd::Verify {
            file,
            theorem,
            system,
            mem,
            imm,
            expect,
            random,
            junit,
            json,
        } => verify(
            file.as_deref(),
            VerifyOpts {
                theorems: theorem,
                systems: system.into_iter().map(System::from).collect(),
                mem,
                imm,
                expect,
                random,
                seed: cli.seed,
                junit,
                json,
            },
        ),
        Cmd::Lambda {
            file,
            semiring,
            cbv,
            env,
            json,
        } => match semiring {
            SemiringArg::Zow => lambda::<UsageGrade>(&file, "zow", cbv, &env, json),
            SemiringArg::Nat => lambda::<Nat>(&file, "nat", cbv, &env, json),
        },
    };
    match r {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(Failed)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn report(file: &Path, d: &Diagnostic, json: bool) -> std::result::Result<(), Failed> {
    eprintln!("{}", d.render(file));
    if json {
        println!("{}", d.to_json(file));
    }
    Err(Failed)
}

fn load_program(file: &Path, json: bool) -> Result<std::result::Result<(String, Program), Failed>> {
    let src = read(file)?;
    Ok(match parse(&src) {
        Ok(p) => Ok((src, p)),
        Err(e) => report(file, &diag::from_lang(&e), json).map(|()| unreachable!()),
    })
}

/// `--mem`, or `<stem>.mem.json` next to the program, or an empty memory.
fn load_memory(file: &Path, mem: Option<PathBuf>) -> Result<Memory> {
    let path = mem.or_else(|| {
        let sibling = file.with_extension("mem.json");
        sibling.exists().then_some(sibling)
    });
    match path {
        None => Ok(Memory::new()),
        Some(p) => Memory::from_json(&read(&p)?).with_context(|| format!("in {}", p.display())),
    }
}

fn parse_env(env: &[String]) -> Result<Env> {
    env.iter()
        .map(|kv| {
            let (x, t) = kv
                .split_once('=')
                .with_context(|| format!("`{kv}`: expected name=Type"))?;
            let t: Type = t.parse().map_err(anyhow::Error::msg)?;
            Ok((x.trim().to_string(), t))
        })
        .collect()
}

fn parse_expected(expect: Option<String>) -> Result<Option<Type>> {
    expect
        .map(|t| t.parse().map_err(anyhow::Error::msg))
        .transpose()
}

fn print_judgment(system: System, j: &Judgment, json: bool) {
    if json {
        println!("{}", judgment_json(&system.to_string(), &j.ctx, &j.ty));
        return;
    }
    println!("type: {}", j.ty);
    println!("groups: {}", j.ctx.canonical());
    for (x, t, c) in j.ctx.iter() {
        let lent = if c.contains_res() { "" } else { " (lent)" };
        println!("  {x}: {t} {c}{lent}");
    }
    println!("capsule: {}", j.is_capsule());
}

fn check(
    file: &Path,
    system: System,
    env: &[String],
    mem: Option<PathBuf>,
    imm: &[String],
    expect: Option<String>,
    json: bool,
) -> CmdResult {
    let (src, p) = match load_program(file, json)? {
        Ok(x) => x,
        Err(f) => return Ok(Err(f)),
    };
    let expected = parse_expected(expect)?;
    let result = if env.is_empty() {
        let mut s = Subject::new(p.clone(), load_memory(file, mem)?);
        s.imm_seeds = imm.iter().cloned().collect();
        check_subject(&s, system, expected.as_ref())
    } else {
        let env = parse_env(env)?;
        let mut gen = LinkGen::new();
        match system {
            System::Sharing => {
                check_table(&p.table, &mut gen).and_then(|t| infer(&t, &env, &p.main, &mut gen))
            }
            System::Modifiers => check_table_mod(&p.table, &mut gen).and_then(|t| {
                infer_mod(&t, &env, &p.main, Mode::Source, expected.as_ref(), &mut gen)
            }),
        }
    };
    Ok(match result {
        Ok(j) => {
            print_judgment(system, &j, json);
            Ok(())
        }
        Err(e) => report(file, &diag::from_check(&src, &p.table, &e), json),
    })
}

fn run(file: &Path, mem: Option<PathBuf>, trace: bool, budget: usize, json: bool) -> CmdResult {
    let (_, p) = match load_program(file, json)? {
        Ok(x) => x,
        Err(f) => return Ok(Err(f)),
    };
    let m = load_memory(file, mem)?;
    m.check(&p.table).map_err(anyhow::Error::msg)?;
    if let Some(x) = p.main.free_vars().into_iter().find(|x| !m.contains(x)) {
        bail!("free variable `{x}` is not a reference of the memory");
    }
    let t = reduce_star(&p.table, &p.main, &m, &mut RefGen::new(), budget);
    if trace {
        print!("{}", t.to_jsonl());
    }
    let (status, value) = match &t.outcome {
        Outcome::Done(v) => ("done", Some(v.to_string())),
        Outcome::Stuck(why) => ("stuck", Some(why.clone())),
        Outcome::BudgetExhausted => ("budget-exhausted", None),
    };
    if json {
        println!(
            "{}",
            json!({
                "schema": SCHEMA,
                "outcome": status,
                "value": value,
                "steps": t.steps.len(),
                "memory": t.final_mem().to_json(),
            })
        );
    } else {
        match &t.outcome {
            Outcome::Done(v) => println!("value: {v}"),
            Outcome::Stuck(why) => println!("stuck: {why}"),
            Outcome::BudgetExhausted => println!("budget of {budget} steps exhausted"),
        }
        println!("steps: {}", t.steps.len());
        println!("memory: {}", t.final_mem());
    }
    Ok(match t.outcome {
        Outcome::Done(_) => Ok(()),
        _ => Err(Failed),
    })
}

struct VerifyOpts {
    theorems: Vec<Theorem>,
    systems: Vec<System>,
    mem: Option<PathBuf>,
    imm: Vec<String>,
    expect: Option<String>,
    random: usize,
    seed: u64,
    junit: Option<PathBuf>,
    json: bool,
}

fn case(name: String, verdict: Verdict) -> CaseResult {
    CaseResult::new(name, verdict)
}

fn verify_subject(
    name: &str,
    s: &Subject,
    expected: Option<&Type>,
    o: &VerifyOpts,
    out: &mut Vec<CaseResult>,
) {
    for th in &o.theorems {
        match th {
            Theorem::Sr => {
                for &sys in &o.systems {
                    let t = expected.filter(|_| sys == System::Modifiers);
                    out.push(case(
                        format!("{name}/sr-{sys}"),
                        verify_subject_reduction(s, sys, t),
                    ));
                }
            }
            Theorem::Capsule => {
                for &sys in &o.systems {
                    out.push(case(
                        format!("{name}/capsule-{sys}"),
                        verify_capsule(s, sys),
                    ));
                }
            }
            Theorem::Imm => out.push(case(format!("{name}/imm"), verify_immutability(s))),
        }
    }
}

fn verify(file: Option<&Path>, mut o: VerifyOpts) -> CmdResult {
    if o.theorems.is_empty() {
        o.theorems = vec![Theorem::Sr, Theorem::Capsule, Theorem::Imm];
    }
    if o.systems.is_empty() {
        o.systems = vec![System::Sharing, System::Modifiers];
    }
    if file.is_none() && o.random == 0 {
        bail!("nothing to verify: give a file, a corpus directory, or --random N");
    }
    let mut reports = Vec::new();
    if let Some(file) = file {
        let mut cases = Vec::new();
        if file.is_dir() {
            for e in load_corpus(file).map_err(anyhow::Error::msg)? {
                verify_subject(
                    &e.name,
                    &e.subject,
                    e.expected_type.as_ref(),
                    &o,
                    &mut cases,
                );
            }
        } else {
            let (_, p) = match load_program(file, o.json)? {
                Ok(x) => x,
                Err(f) => return Ok(Err(f)),
            };
            let mut s = Subject::new(p, load_memory(file, o.mem.clone())?);
            s.imm_seeds = o.imm.iter().cloned().collect::<BTreeSet<_>>();
            let expected = parse_expected(o.expect.clone())?;
            let name = file
                .file_stem()
                .map_or("program".into(), |n| n.to_string_lossy());
            verify_subject(&name, &s, expected.as_ref(), &o, &mut cases);
        }
        reports.push(SuiteReport::new(file.display().to_string(), cases));
    }
    if o.random > 0 {
        let opts = SuiteOptions {
            start_seed: o.seed,
            count: o.random,
            ..SuiteOptions::default()
        };
        for th in &o.theorems {
            match th {
                Theorem::Sr => {
                    for &sys in &o.systems {
                        reports.push(subject_reduction_suite(sys, &opts));
                    }
                }
                Theorem::Capsule => {
                    for &sys in &o.systems {
                        reports.push(capsule_suite(sys, &opts));
                    }
                }
                Theorem::Imm => reports.push(immutability_suite(&opts)),
            }
        }
    }
    if let Some(path) = &o.junit {
        std::fs::write(path, junit_xml(&reports))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    if o.json {
        let all: Vec<_> = reports.iter().map(SuiteReport::to_json).collect();
        println!("{}", json!({ "schema": SCHEMA, "suites": all }));
    } else {
        for r in &reports {
            for c in &r.cases {
                if r.cases.len() <= 50 || c.verdict.is_fail() {
                    print_case(c);
                }
            }
            println!(
                "{}: {} passed, {} failed, {} not applicable",
                r.name,
                r.passed(),
                r.failed(),
                r.skipped()
            );
        }
    }
    Ok(if reports.iter().all(SuiteReport::ok) {
        Ok(())
    } else {
        Err(Failed)
    })
}

fn print_case(c: &CaseResult) {
    match &c.verdict {
        Verdict::Pass { steps } => println!("PASS {} ({steps} steps)", c.name),
        Verdict::NotApplicable { reason } => println!("SKIP {}: {reason}", c.name),
        Verdict::Fail(f) => {
            println!("FAIL {}: {f}", c.name);
            if let Some(cx) = &c.counterexample {
                println!("{cx}");
            }
        }
    }
}

fn lambda<R: Grade + Display>(
    file: &Path,
    name: &str,
    cbv: bool,
    env: &[String],
    json: bool,
) -> CmdResult {
    let src = read(file)?;
    let t = match parse_lterm::<R>(&src) {
        Ok(t) => t,
        Err(e) => {
            let d = Diagnostic {
                code: "E_SYNTAX".into(),
                msg: e.msg.clone(),
                pos: lambda_pos(&src, e.offset),
            };
            return Ok(report(file, &d, json));
        }
    };
    let mut tenv: BTreeMap<String, LType<R>> =
        t.free_vars().into_iter().map(|x| (x, LType::Int)).collect();
    for kv in env {
        let (x, ty) = kv
            .split_once('=')
            .with_context(|| format!("`{kv}`: expected name=type"))?;
        let ty = parse_ltype::<R>(ty).map_err(|e| anyhow::anyhow!("type of `{x}`: {e}"))?;
        tenv.insert(x.trim().to_string(), ty);
    }
    let (ty, grades) = match linfer(&t, &tenv, cbv) {
        Ok(r) => r,
        Err(e) => {
            let d = Diagnostic {
                code: "E_TYPE".into(),
                msg: e.msg,
                pos: lambda_pos(&src, e.offset),
            };
            return Ok(report(file, &d, json));
        }
    };
    if json {
        let gs: BTreeMap<&String, String> =
            grades.iter().map(|(x, g)| (x, g.to_string())).collect();
        println!(
            "{}",
            json!({
                "schema": SCHEMA,
                "semiring": name,
                "cbv": cbv,
                "type": ty.to_string(),
                "grades": gs,
            })
        );
    } else {
        println!("type: {ty}");
        for (x, g) in &grades {
            println!("  {x}: {g}");
        }
    }
    Ok(Ok(()))
}

fn lambda_pos(src: &str, offset: usize) -> coeffect_core::lang::Pos {
    let offset = offset.min(src.len());
    let before = &src[..offset];
    coeffect_core::lang::Pos {
        line: before.matches('\n').count() + 1,
        col: before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1,
    }
}
