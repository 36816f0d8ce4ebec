//! Machine-readable check reports.

use serde::{Deserialize, Serialize};

use crate::graded::{Label, Lin};

const KEEP_FAILURES: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub witness: String,
    pub residual: String,
}

/// One named identity or axiom evaluated on many inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    pub failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stamp: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>) -> Check {
        Check { name: name.into(), checked: 0, failed: 0, failures: vec![], stamp: None }
    }

    pub fn with_stamp(mut self, stamp: impl Into<String>) -> Check {
        self.stamp = Some(stamp.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn zero_count(&self) -> usize {
        self.checked - self.failed
    }

    pub fn record<B: Label>(&mut self, witness: impl FnOnce() -> String, residual: &Lin<B>) {
        self.checked += 1;
        if !residual.is_zero() {
            self.fail(witness(), format!("{residual:?}"));
        }
    }

    pub fn record_bool(&mut self, witness: impl FnOnce() -> String, ok: bool, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.fail(witness(), detail());
        }
    }

    pub fn fail(&mut self, witness: String, residual: String) {
        self.failed += 1;
        if self.failures.len() < KEEP_FAILURES {
            self.failures.push(Failure { witness, residual });
        }
    }

    pub fn merge(&mut self, o: Check) {
        self.checked += o.checked;
        self.failed += o.failed;
        for f in o.failures {
            if self.failures.len() < KEEP_FAILURES {
                self.failures.push(f);
            }
        }
    }

    pub fn first_failure(&self) -> Option<&Failure> {
        self.failures.first()
    }
}

/// A list of checks; passes iff every check passes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Report {
        Report::default()
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect()
    }

    pub fn extend(&mut self, o: Report) {
        self.checks.extend(o.checks);
    }
}
