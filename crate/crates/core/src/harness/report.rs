use serde::Serialize;
use serde_json::{json, Value};

use super::Verdict;
use crate::sharing::SCHEMA;

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub verdict: Verdict,
    /// Shrunk counterexample, for failures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

impl CaseResult {
    pub fn new(name: impl Into<String>, verdict: Verdict) -> Self {
        CaseResult {
            name: name.into(),
            verdict,
            counterexample: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: Vec<CaseResult>,
}

impl SuiteReport {
    pub fn new(name: impl Into<String>, cases: Vec<CaseResult>) -> Self {
        SuiteReport {
            name: name.into(),
            cases,
        }
    }

    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.verdict.is_pass()).count()
    }

    pub fn failed(&self) -> usize {
        self.cases.iter().filter(|c| c.verdict.is_fail()).count()
    }

    pub fn skipped(&self) -> usize {
        self.cases.len() - self.passed() - self.failed()
    }

    pub fn ok(&self) -> bool {
        self.failed() == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseResult> {
        self.cases.iter().filter(|c| c.verdict.is_fail())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": SCHEMA,
            "suite": self.name,
            "passed": self.passed(),
            "failed": self.failed(),
            "skipped": self.skipped(),
            "cases": self.cases,
        })
    }

    /// JUnit-style XML with one `testcase` per case.
    pub fn to_junit_xml(&self) -> String {
        junit_xml(std::slice::from_ref(self))
    }

    fn push_testsuite(&self, out: &mut String) {
        let esc = |s: &str| quick_xml::escape::escape(s).into_owned();
        out.push_str(&format!(
            "<testsuite name=\"{}\" tests=\"{}\" failures=\"{}\" skipped=\"{}\">\n",
            esc(&self.name),
            self.cases.len(),
            self.failed(),
            self.skipped()
        ));
        for c in &self.cases {
            out.push_str(&format!(
                "  <testcase classname=\"{}\" name=\"{}\"",
                esc(&self.name),
                esc(&c.name)
            ));
            match &c.verdict {
                Verdict::Pass { .. } => out.push_str("/>\n"),
                Verdict::NotApplicable { reason } => {
                    out.push_str(&format!(
                        ">\n    <skipped message=\"{}\"/>\n  </testcase>\n",
                        esc(reason)
                    ));
                }
                Verdict::Fail(f) => {
                    out.push_str(&format!(
                        ">\n    <failure message=\"{}\">",
                        esc(&f.to_string())
                    ));
                    if let Some(cx) = &c.counterexample {
                        out.push_str(&esc(cx));
                    }
                    out.push_str("</failure>\n  </testcase>\n");
                }
            }
        }
        out.push_str("</testsuite>\n");
    }
}

/// One JUnit document holding several suites.
pub fn junit_xml(reports: &[SuiteReport]) -> String {
    let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<testsuites>\n");
    for r in reports {
        r.push_testsuite(&mut out);
    }
    out.push_str("</testsuites>\n");
    out
}
