use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::Subject;
use crate::interp::Memory;
use crate::lang::{parse, Type};

/// What a corpus entry is expected to do. Check outcomes are `"ok"` or an
/// error code such as `"E_PROMOTE"`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub sharing: Option<String>,
    pub modifiers: Option<String>,
    /// Capsule flag of the sharing judgment.
    pub capsule: Option<bool>,
    /// Negative control: the run must exhibit this violation
    /// (`"capsule"` or `"immutability"`).
    pub violates: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    name: String,
    program: String,
    memory: Option<String>,
    #[serde(default)]
    imm: Vec<String>,
    /// Type the modifier configuration is checked against, e.g. `caps C`.
    expected_type: Option<String>,
    #[serde(default)]
    expect: Expectation,
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub path: PathBuf,
    pub subject: Subject,
    pub expected_type: Option<Type>,
    pub expect: Expectation,
}

/// Load `manifest.json` from `dir` and the programs and memories it names.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, String> {
    let read = |f: &str| {
        std::fs::read_to_string(dir.join(f)).map_err(|e| format!("{}: {e}", dir.join(f).display()))
    };
    let raw: Vec<RawEntry> =
        serde_json::from_str(&read("manifest.json")?).map_err(|e| format!("manifest.json: {e}"))?;
    raw.into_iter()
        .map(|r| {
            let program = parse(&read(&r.program)?).map_err(|e| format!("{}:{e}", r.program))?;
            let mem = match &r.memory {
                Some(m) => Memory::from_json(&read(m)?).map_err(|e| format!("{m}: {e}"))?,
                None => Memory::new(),
            };
            let mut subject = Subject::new(program, mem);
            subject.imm_seeds = r.imm.iter().cloned().collect::<BTreeSet<_>>();
            Ok(CorpusEntry {
                name: r.name,
                path: dir.join(&r.program),
                subject,
                expected_type: r.expected_type.as_deref().map(str::parse).transpose()?,
                expect: r.expect,
            })
        })
        .collect()
}
