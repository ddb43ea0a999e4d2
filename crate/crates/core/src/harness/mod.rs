//! Differential checks: run the interpreter and re-type every configuration
//! it reaches, comparing with the dynamic sharing and reachability
//! relations. Also seeded generators for programs and memories, greedy
//! shrinking, and JUnit/JSON reports.

mod corpus;
mod gen;
mod report;
mod shrink;
mod suite;
mod verify;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::interp::Memory;
use crate::lang::{ClassTable, Expr, Program};

pub use corpus::{load_corpus, CorpusEntry, Expectation};
pub use gen::{
    check_subject, gen_classes, gen_memory, gen_subject, gen_typed_subject, rng_for, subject_types,
    GenOptions,
};
pub use report::{junit_xml, CaseResult, SuiteReport};
pub use shrink::shrink;
pub use suite::{
    capsule_suite, immutability_suite, memory_lemma_suite, parse_round_trip_suite,
    subject_reduction_suite, SuiteOptions,
};
pub use verify::{
    capsule_violations, check_memory_lemma, immutability_violations, verify_capsule,
    verify_immutability, verify_subject_reduction, Failure, Verdict,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Sharing,
    Modifiers,
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            System::Sharing => "sharing",
            System::Modifiers => "modifiers",
        })
    }
}

impl FromStr for System {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sharing" => Ok(System::Sharing),
            "modifiers" => Ok(System::Modifiers),
            _ => Err(format!(
                "unknown system `{s}` (expected sharing or modifiers)"
            )),
        }
    }
}

/// A configuration to check: source class table, main expression, initial
/// memory, and the references the memory holds as `imm`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subject {
    pub table: ClassTable,
    pub main: Expr,
    pub mem: Memory,
    pub imm_seeds: BTreeSet<String>,
}

impl Subject {
    pub fn new(program: Program, mem: Memory) -> Self {
        Subject {
            table: program.table,
            main: program.main,
            mem,
            imm_seeds: BTreeSet::new(),
        }
    }

    pub fn program(&self) -> Program {
        Program {
            table: self.table.clone(),
            main: self.main.clone(),
        }
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.program())?;
        write!(f, "// memory: {}", self.mem.to_json())?;
        if !self.imm_seeds.is_empty() {
            let seeds: Vec<&str> = self.imm_seeds.iter().map(String::as_str).collect();
            write!(f, "\n// imm: {}", seeds.join(", "))?;
        }
        Ok(())
    }
}
