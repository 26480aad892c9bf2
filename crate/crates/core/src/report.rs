//! Pass/fail records shared by every verification suite.

use serde::{Deserialize, Serialize};

use crate::algebra::BarWord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

/// Outcome of one named identity checked over a family of bar words.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub axiom: String,
    pub formula: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness_degree: Option<usize>,
    pub checked: u64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    /// Runs `holds` on every bar word, stopping at the first failure.
    pub fn over<'a>(
        axiom: &str,
        formula: &str,
        bars: impl IntoIterator<Item = &'a BarWord>,
        mut holds: impl FnMut(&BarWord) -> bool,
    ) -> Check {
        let mut checked = 0;
        for b in bars {
            checked += 1;
            if !holds(b) {
                return Check::failed(axiom, formula, b.to_string(), b.degree(), checked);
            }
        }
        Check::ok(axiom, formula, checked)
    }

    pub fn ok(axiom: &str, formula: &str, checked: u64) -> Check {
        Check {
            axiom: axiom.to_string(),
            formula: formula.to_string(),
            status: Status::Pass,
            witness: None,
            witness_degree: None,
            checked,
        }
    }

    pub fn failed(
        axiom: &str,
        formula: &str,
        witness: String,
        degree: usize,
        checked: u64,
    ) -> Check {
        Check {
            axiom: axiom.to_string(),
            formula: formula.to_string(),
            status: Status::Fail,
            witness: Some(witness),
            witness_degree: Some(degree),
            checked,
        }
    }

    /// Folds several sub-checks of one identity (e.g. over a corpus) into one record.
    pub fn merge(axiom: &str, formula: &str, parts: impl IntoIterator<Item = Check>) -> Check {
        let mut checked = 0;
        for part in parts {
            checked += part.checked;
            if !part.passed() {
                let witness = part.witness.unwrap_or_default();
                return Check::failed(
                    axiom,
                    formula,
                    witness,
                    part.witness_degree.unwrap_or(0),
                    checked,
                );
            }
        }
        Check::ok(axiom, formula, checked)
    }
}

/// All checks of one suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn new(suite: &str, checks: Vec<Check>) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            checks,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, axiom: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}
