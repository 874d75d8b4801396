//! Pass/fail reports emitted by the property suites and certificate checks.

use serde_json::{json, Value};

/// One named check, with a counterexample when it failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    pub counterexample: Option<String>,
}

impl Check {
    pub fn pass(id: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            pass: true,
            counterexample: None,
        }
    }

    pub fn fail(id: impl Into<String>, counterexample: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            pass: false,
            counterexample: Some(counterexample.into()),
        }
    }
}

/// An ordered list of checks produced by one suite run.
#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn new(name: impl Into<String>) -> Self {
        SuiteReport {
            name: name.into(),
            checks: Vec::new(),
        }
    }

    /// Records a check outcome; the counterexample closure is only invoked on
    /// failure.
    pub fn check(&mut self, id: &str, ok: bool, counterexample: impl FnOnce() -> String) {
        if ok {
            self.checks.push(Check::pass(id));
        } else {
            self.checks.push(Check::fail(id, counterexample()));
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn merge(&mut self, other: SuiteReport) {
        self.checks.extend(other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// JSON array of `{id, pass, counterexample}` objects.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.checks
                .iter()
                .map(|c| {
                    json!({
                        "id": c.id,
                        "pass": c.pass,
                        "counterexample": c.counterexample,
                    })
                })
                .collect(),
        )
    }
}
