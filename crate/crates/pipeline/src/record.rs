use chrono::{DateTime, Utc};
use pdag_core::eval::{score, RunScore, Verdict};
use pdag_core::plan::SolveError;
use pdag_core::pddl::Diagnostic;
use pdag_core::prompt::{AbstractionCategory, ShotMode};
use pdag_core::verify::BisimReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::llm::{ExtractError, ExtractedArtifacts, LlmError, LlmResponse};

pub const SCHEMA_VERSION: u32 = 1;

/// Digest of the inputs that identify a run. Hex, 16 characters.
pub fn run_id(benchmark: &str, shot: ShotMode, run_index: u32, template_version: &str, model: &str) -> String {
    let mut h = Sha256::new();
    for part in [benchmark, &shot.to_string(), &run_index.to_string(), template_version, model] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())[..16].to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Complete,
    Extract,
    Parse,
    Plan,
    Rubric,
    /// Bisimulation against the benchmark's mapping, when it fits the output.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStatus {
    pub stage: Stage,
    pub status: Status,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Ground actions, one per step, in PDDL plan syntax.
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub run_id: String,
    pub benchmark: String,
    pub category: AbstractionCategory,
    pub shot: ShotMode,
    pub run_index: u32,
    pub template_version: String,
    pub model: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub bundle_hash: String,
    pub stages: Vec<StageStatus>,
    pub response: Option<LlmResponse>,
    pub llm_error: Option<LlmError>,
    pub artifacts: Option<ExtractedArtifacts>,
    pub extract_error: Option<ExtractError>,
    pub diagnostics: Vec<Diagnostic>,
    pub plan: Option<PlanResult>,
    pub plan_error: Option<SolveError>,
    pub verdicts: Vec<Verdict>,
    /// Set by a reviewer who spotted a syntax problem.
    pub human_syntax_flag: bool,
    pub score: RunScore,
    pub bisim: Option<BisimReport>,
}

impl RunRecord {
    pub fn stage(&self, stage: Stage) -> Option<&StageStatus> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    /// Whether the model produced an answer at all. Runs without one are
    /// infrastructure failures and stay out of the aggregates.
    pub fn answered(&self) -> bool {
        self.response.is_some()
    }

    pub fn parsed(&self) -> bool {
        self.stage(Stage::Parse).is_some_and(|s| s.status == Status::Ok)
    }

    pub fn pending(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_pending()).count()
    }

    /// Recomputes the score from the current verdicts and flags.
    pub fn rescore(&mut self) {
        self.score = score(&self.verdicts, self.parsed(), self.plan.is_some(), self.human_syntax_flag);
    }

    /// The record as JSON with the wall-clock fields removed.
    pub fn without_timestamps(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("record serializes");
        let o = v.as_object_mut().expect("record is an object");
        o.remove("started_at");
        o.remove("finished_at");
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_id_depends_on_every_input() {
        let base = run_id("b", ShotMode::One, 1, "v1", "m");
        assert_eq!(base, run_id("b", ShotMode::One, 1, "v1", "m"));
        assert_eq!(base.len(), 16);
        for other in [
            run_id("c", ShotMode::One, 1, "v1", "m"),
            run_id("b", ShotMode::Zero, 1, "v1", "m"),
            run_id("b", ShotMode::One, 2, "v1", "m"),
            run_id("b", ShotMode::One, 1, "v2", "m"),
            run_id("b", ShotMode::One, 1, "v1", "n"),
            run_id("b1", ShotMode::One, 1, "v", "1m"),
        ] {
            assert_ne!(base, other);
        }
    }
}
