//! Suite reports: named checks with an expected value, an observed value and a comparator.

use std::collections::BTreeSet;

use ffpos_core::FieldInfo;
use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Eq,
    /// Observed is at most expected.
    Le,
    /// Observed is a subset of expected.
    Subset,
    /// Observed is a superset of expected.
    Superset,
    /// Evidence only; always passes.
    Record,
    /// Always passes, but a mismatch is surfaced in the report's `flags`.
    Flag,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub comparator: Comparator,
    pub expected: Value,
    pub observed: Value,
    pub pass: bool,
}

fn json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

impl Check {
    pub fn eq<T: Serialize + PartialEq>(
        name: impl Into<String>,
        expected: T,
        observed: T,
    ) -> Check {
        Check {
            name: name.into(),
            comparator: Comparator::Eq,
            pass: expected == observed,
            expected: json(&expected),
            observed: json(&observed),
        }
    }

    pub fn holds(name: impl Into<String>, observed: bool) -> Check {
        Check::eq(name, true, observed)
    }

    pub fn le(name: impl Into<String>, bound: u64, observed: u64) -> Check {
        Check {
            name: name.into(),
            comparator: Comparator::Le,
            pass: observed <= bound,
            expected: json(&bound),
            observed: json(&observed),
        }
    }

    pub fn subset<T: Serialize + Ord>(
        name: impl Into<String>,
        allowed: &BTreeSet<T>,
        observed: &BTreeSet<T>,
    ) -> Check {
        Check {
            name: name.into(),
            comparator: Comparator::Subset,
            pass: observed.is_subset(allowed),
            expected: json(allowed),
            observed: json(observed),
        }
    }

    pub fn superset<T: Serialize + Ord>(
        name: impl Into<String>,
        required: &BTreeSet<T>,
        observed: &BTreeSet<T>,
    ) -> Check {
        Check {
            name: name.into(),
            comparator: Comparator::Superset,
            pass: observed.is_superset(required),
            expected: json(required),
            observed: json(observed),
        }
    }

    pub fn record<T: Serialize>(name: impl Into<String>, observed: T) -> Check {
        Check {
            name: name.into(),
            comparator: Comparator::Record,
            pass: true,
            expected: Value::Null,
            observed: json(&observed),
        }
    }

    pub fn flag<T: Serialize + PartialEq>(
        name: impl Into<String>,
        expected: T,
        observed: T,
    ) -> Check {
        Check {
            name: name.into(),
            comparator: Comparator::Flag,
            pass: true,
            expected: json(&expected),
            observed: json(&observed),
        }
    }

    pub fn is_flagged(&self) -> bool {
        self.comparator == Comparator::Flag && self.expected != self.observed
    }

    fn prefixed(mut self, prefix: &str) -> Check {
        self.name = format!("{prefix}: {}", self.name);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub anchor: String,
    pub fields: Vec<FieldInfo>,
    pub pass: bool,
    pub flags: Vec<String>,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn new(suite: &str, anchor: &str) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            anchor: anchor.to_string(),
            fields: Vec::new(),
            pass: true,
            flags: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn extend(&mut self, prefix: &str, checks: Vec<Check>) {
        for c in checks {
            let c = c.prefixed(prefix);
            self.pass &= c.pass;
            if c.is_flagged() {
                self.flags.push(c.name.clone());
            }
            self.checks.push(c);
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Canonical JSON: pretty-printed with a trailing newline, no timing data.
    pub fn to_canonical_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}
