use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ground::{apply, GroundAtom, GroundTask};
use super::state::ActionId;

/// An ordered sequence of ground actions of one task.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<ActionId>,
}

impl Plan {
    pub fn new(steps: Vec<ActionId>) -> Self {
        Plan { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One `(action arg ...)` per line.
    pub fn to_text(&self, task: &GroundTask) -> String {
        self.steps
            .iter()
            .map(|&s| task.action(s).label() + "\n")
            .collect()
    }

    /// Reads a plan file. Blank lines and `;` comments are skipped.
    pub fn parse(task: &GroundTask, text: &str) -> Result<Plan, PlanParseError> {
        let mut steps = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split(';').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let inner = line
                .strip_prefix('(')
                .and_then(|l| l.strip_suffix(')'))
                .ok_or_else(|| PlanParseError::Malformed {
                    line: i + 1,
                    text: raw.to_string(),
                })?;
            let mut words = inner.split_whitespace();
            let name = words.next().ok_or_else(|| PlanParseError::Malformed {
                line: i + 1,
                text: raw.to_string(),
            })?;
            let args: Vec<&str> = words.collect();
            let id = task
                .find_action(name, &args)
                .ok_or_else(|| PlanParseError::UnknownAction {
                    line: i + 1,
                    text: line.to_string(),
                })?;
            steps.push(id);
        }
        Ok(Plan { steps })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum PlanParseError {
    #[error("line {line}: expected `(action arg ...)`, found `{text}`")]
    Malformed { line: usize, text: String },
    #[error("line {line}: `{text}` is not a ground action of this task")]
    UnknownAction { line: usize, text: String },
}

/// Outcome of simulating a plan. Step numbers are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ValidationReport {
    Valid,
    FailsAtStep {
        step: usize,
        action: String,
        missing: GroundAtom,
    },
    GoalUnsatisfied {
        missing: Vec<GroundAtom>,
    },
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationReport::Valid)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationReport::Valid => f.write_str("Plan valid"),
            ValidationReport::FailsAtStep {
                step,
                action,
                missing,
            } => write!(
                f,
                "Plan failed at step {step}: {action} has an unsatisfied precondition {missing}"
            ),
            ValidationReport::GoalUnsatisfied { missing } => {
                f.write_str("Plan executed but the goal is not satisfied; missing")?;
                for m in missing {
                    write!(f, " {m}")?;
                }
                Ok(())
            }
        }
    }
}

pub fn validate_plan(task: &GroundTask, plan: &Plan) -> ValidationReport {
    let mut s = task.init.clone();
    for (i, &step) in plan.steps.iter().enumerate() {
        match apply(task, &s, step) {
            Ok(next) => s = next,
            Err(e) => {
                return ValidationReport::FailsAtStep {
                    step: i + 1,
                    action: e.action,
                    missing: e.missing,
                }
            }
        }
    }
    let missing: Vec<GroundAtom> = task
        .goal
        .iter()
        .filter(|&&g| !s.contains(g))
        .map(|&g| task.atom(g).clone())
        .collect();
    if missing.is_empty() {
        ValidationReport::Valid
    } else {
        ValidationReport::GoalUnsatisfied { missing }
    }
}
