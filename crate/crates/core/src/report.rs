//! Named pass/fail diagnostics.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Measured violation (or statistic) for this check.
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record a violation measured against `tolerance`; passes iff `value < tolerance`.
    pub fn push(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            tolerance,
            passed: value < tolerance,
        });
    }

    /// Record a quantity that must stay above `floor`; passes iff `value > floor`.
    pub fn push_min(&mut self, name: impl Into<String>, value: f64, floor: f64) {
        self.checks.push(Check {
            name: name.into(),
            value,
            tolerance: floor,
            passed: value > floor,
        });
    }

    pub fn push_flag(&mut self, name: impl Into<String>, passed: bool) {
        self.checks.push(Check {
            name: name.into(),
            value: if passed { 0.0 } else { 1.0 },
            tolerance: 0.5,
            passed,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Largest measured value among checks whose name starts with `prefix`.
    pub fn max_value(&self, prefix: &str) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.name.starts_with(prefix))
            .fold(0.0, |acc, c| acc.max(c.value))
    }
}
