//! Pass/fail records for checkable invariants.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Amount by which the checked quantity exceeds its limit (≤ 0 when passing),
    /// or the raw residual for norm checks.
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `residual ≤ tolerance`.
    pub fn check_le(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) -> bool {
        let passed = residual <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            passed,
            residual,
            tolerance,
            detail: None,
        });
        passed
    }

    /// Records `lhs ≤ rhs + tolerance`, storing `lhs − rhs` as the residual.
    pub fn check_order(
        &mut self,
        name: impl Into<String>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> bool {
        let residual = lhs - rhs;
        let passed = residual <= tolerance;
        self.checks.push(Check {
            name: name.into(),
            passed,
            residual,
            tolerance,
            detail: Some(format!("{lhs} <= {rhs}")),
        });
        passed
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Certificate) {
        self.checks.extend(other.checks);
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
}
