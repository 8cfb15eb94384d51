//! Running benchmarks end to end: prompt, model, extraction, checks, scoring.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use pdag_core::eval::{aggregate, check_rubric, fail_all, render_report, Aggregate, RunScore};
use pdag_core::pddl::{parse_domain_full, parse_problem_full, Diagnostic};
use pdag_core::plan::{ground, solve, GroundOptions, SearchLimits, Strategy};
use pdag_core::prompt::{assemble, PromptBundle, ShotMode, UnsupportedCombination};
use pdag_core::verify::{check_bisimulation, parse_mapping, soundness_summary, BisimReport, VerifyCaps, VerifyError};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::task::JoinSet;

use crate::llm::fixture::{self, Fixture, RecordedResponse};
use crate::llm::{extract_pddl, ExtractedArtifacts, Gateway, LlmConfig, LlmError, LlmResponse, Usage};
use crate::manifest::Benchmark;
use crate::record::{run_id, PlanResult, RunRecord, Stage, StageStatus, Status, SCHEMA_VERSION};
use crate::store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{benchmark} does not list {shot}-shot prompting")]
    Shot { benchmark: String, shot: ShotMode },
    #[error(transparent)]
    Prompt(#[from] UnsupportedCombination),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn stage(stage: Stage, status: Status, detail: impl Into<String>) -> StageStatus {
    StageStatus { stage, status, detail: detail.into() }
}

fn diagnostic_line(file: &str, d: &Diagnostic) -> Diagnostic {
    Diagnostic { message: format!("{file}: {}", d.message), ..d.clone() }
}

/// Everything after the model call, for one run. Pure apart from the
/// verifier's and planner's own limits.
pub fn evaluate(bench: &Benchmark, reply: Result<LlmResponse, LlmError>) -> Evaluation {
    let mut ev = Evaluation::default();
    let rubric = &bench.rubric;
    let skip_rest = |ev: &mut Evaluation, from: usize| {
        let rest = [Stage::Extract, Stage::Parse, Stage::Plan, Stage::Rubric, Stage::Verify];
        for s in &rest[from..] {
            ev.stages.push(stage(*s, Status::Skipped, ""));
        }
    };

    let response = match reply {
        Ok(r) => r,
        Err(e) => {
            ev.stages.push(stage(Stage::Complete, Status::Failed, e.to_string()));
            ev.llm_error = Some(e);
            skip_rest(&mut ev, 0);
            ev.verdicts = fail_all(rubric, "the model did not answer");
            return ev;
        }
    };
    ev.stages.push(stage(Stage::Complete, Status::Ok, response.transport_tag.clone()));
    let raw = response.raw.clone();
    ev.response = Some(response);

    let art = match extract_pddl(&raw) {
        Ok(a) => a,
        Err(e) => {
            ev.stages.push(stage(Stage::Extract, Status::Failed, e.to_string()));
            ev.extract_error = Some(e);
            skip_rest(&mut ev, 1);
            ev.verdicts = fail_all(rubric, "the reply holds no complete domain and problem");
            return ev;
        }
    };
    ev.stages.push(stage(Stage::Extract, Status::Ok, art.warnings.join("; ")));

    let pd = parse_domain_full(&art.domain_text);
    ev.diagnostics.extend(pd.diagnostics.iter().map(|d| diagnostic_line("domain", d)));
    let parsed = pd.into_result().ok().and_then(|hl| {
        let pp = parse_problem_full(&art.problem_text, &hl);
        ev.diagnostics.extend(pp.diagnostics.iter().map(|d| diagnostic_line("problem", d)));
        pp.into_result().ok().map(|p| (hl, p))
    });
    ev.artifacts = Some(art);
    let Some((hl, hl_problem)) = parsed else {
        let n = ev.diagnostics.iter().filter(|d| d.is_error()).count();
        ev.stages.push(stage(Stage::Parse, Status::Failed, format!("{n} error(s)")));
        skip_rest(&mut ev, 2);
        ev.verdicts = fail_all(rubric, "the high-level output does not parse");
        return ev;
    };
    ev.stages.push(stage(Stage::Parse, Status::Ok, ""));

    let task = ground(&hl, &hl_problem, &GroundOptions::default());
    match &task {
        Err(e) => ev.stages.push(stage(Stage::Plan, Status::Failed, e.to_string())),
        Ok(t) => match solve(t, Strategy::Bfs, &SearchLimits::default()) {
            Ok(p) => {
                ev.stages.push(stage(Stage::Plan, Status::Ok, format!("{} step(s)", p.len())));
                ev.plan = Some(PlanResult { steps: p.to_text(t).lines().map(String::from).collect() });
            }
            Err(e) => {
                ev.stages.push(stage(Stage::Plan, Status::Failed, e.to_string()));
                ev.plan_error = Some(e);
            }
        },
    }

    ev.verdicts = check_rubric(&hl, &hl_problem, &bench.ll, &bench.ll_problem, rubric);
    let pending = ev.verdicts.iter().filter(|v| v.is_pending()).count();
    let detail = if pending > 0 { format!("{pending} item(s) need a reviewer") } else { String::new() };
    ev.stages.push(stage(Stage::Rubric, Status::Ok, detail));

    // The reference mapping only applies when the model kept its vocabulary.
    let verified = match (&bench.mapping, &task) {
        (Some(path), Ok(hl_task)) => std::fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|src| parse_mapping(&src, &hl, &bench.ll).map_err(|_| "the mapping does not fit this output".into()))
            .and_then(|m| {
                let ll_task = ground(&bench.ll, &bench.ll_problem, &GroundOptions::default()).map_err(|e| e.to_string())?;
                check_bisimulation(hl_task, &ll_task, &m, &VerifyCaps::default()).map_err(|e| e.to_string())
            }),
        (None, _) => Err("no mapping".into()),
        (_, Err(_)) => Err("high-level task could not be grounded".into()),
    };
    match verified {
        Ok(r) => {
            ev.stages.push(stage(Stage::Verify, Status::Ok, format!("{:?}", r.verdict).to_lowercase()));
            ev.bisim = Some(r);
        }
        Err(why) => ev.stages.push(stage(Stage::Verify, Status::Skipped, why)),
    }
    ev
}

#[derive(Debug, Clone, Default)]
pub struct Evaluation {
    pub stages: Vec<StageStatus>,
    pub response: Option<LlmResponse>,
    pub llm_error: Option<LlmError>,
    pub artifacts: Option<ExtractedArtifacts>,
    pub extract_error: Option<crate::llm::ExtractError>,
    pub diagnostics: Vec<Diagnostic>,
    pub plan: Option<PlanResult>,
    pub plan_error: Option<pdag_core::plan::SolveError>,
    pub verdicts: Vec<pdag_core::eval::Verdict>,
    pub bisim: Option<BisimReport>,
}

#[allow(clippy::too_many_arguments)]
fn record(
    bench: &Benchmark,
    bundle: &PromptBundle,
    shot: ShotMode,
    run_index: u32,
    model: &str,
    started_at: DateTime<Utc>,
    ev: Evaluation,
) -> RunRecord {
    let mut r = RunRecord {
        schema_version: SCHEMA_VERSION,
        run_id: run_id(bench.id(), shot, run_index, &bundle.template_version, model),
        benchmark: bench.id().to_string(),
        category: bench.entry.category,
        shot,
        run_index,
        template_version: bundle.template_version.clone(),
        model: model.to_string(),
        started_at,
        finished_at: Utc::now(),
        bundle_hash: bundle.hash(),
        stages: ev.stages,
        response: ev.response,
        llm_error: ev.llm_error,
        artifacts: ev.artifacts,
        extract_error: ev.extract_error,
        diagnostics: ev.diagnostics,
        plan: ev.plan,
        plan_error: ev.plan_error,
        verdicts: ev.verdicts,
        human_syntax_flag: false,
        score: RunScore::default(),
        bisim: ev.bisim,
    };
    r.rescore();
    r
}

/// Runs one benchmark `runs` times and persists every record.
///
/// Configuration problems surface before any model call; a failure inside a
/// run is written into that run's record.
pub async fn run_benchmark(
    store: &Store,
    gateway: Arc<Gateway>,
    bench: &Benchmark,
    shot: ShotMode,
    runs: u32,
    force: bool,
) -> Result<Vec<RunRecord>, RunError> {
    if !bench.entry.supported_shots.contains(&shot) {
        return Err(RunError::Shot { benchmark: bench.id().to_string(), shot });
    }
    let bundle = Arc::new(assemble(bench.entry.category, shot, &bench.query())?);
    let model = gateway.config().model.clone();
    if !force {
        for k in 1..=runs {
            let id = run_id(bench.id(), shot, k, &bundle.template_version, &model);
            if store.contains(bench.id(), &id) {
                return Err(StoreError::Exists(id).into());
            }
        }
    }

    let mut calls = JoinSet::new();
    for k in 1..=runs {
        let (g, b) = (gateway.clone(), bundle.clone());
        calls.spawn(async move {
            let started = Utc::now();
            (k, started, g.complete(&b, k).await)
        });
    }
    let mut replies = vec![];
    while let Some(done) = calls.join_next().await {
        replies.push(done.expect("completion task panicked"));
    }
    replies.sort_by_key(|(k, _, _)| *k);

    let mut out = vec![];
    for (k, started, reply) in replies {
        let rec = record(bench, &bundle, shot, k, &model, started, evaluate(bench, reply));
        store.save_run(&rec, force)?;
        out.push(rec);
    }
    Ok(out)
}

/// A reply in the shape the demonstrations use, carrying the reference
/// listings.
pub fn golden_reply(bench: &Benchmark) -> String {
    format!(
        "Reference abstraction for {}.\n\n```pddl\n{}\n```\n\n```pddl\n{}\n```\n",
        bench.id(),
        bench.hl_domain_text.trim(),
        bench.hl_problem_text.trim()
    )
}

/// Writes a replay fixture whose reply is [`golden_reply`]. Every run of the
/// bundle gets the same answer.
pub fn write_golden_fixture(
    bench: &Benchmark,
    shot: ShotMode,
    cfg: &LlmConfig,
    dir: &std::path::Path,
) -> Result<PathBuf, RunError> {
    let bundle = assemble(bench.entry.category, shot, &bench.query())?;
    let f = Fixture {
        schema_version: fixture::SCHEMA_VERSION,
        bundle_hash: bundle.hash(),
        request: crate::llm::ChatRequest {
            model: cfg.model.clone(),
            messages: bundle.messages.clone(),
            temperature: cfg.temperature,
            max_tokens: cfg.max_tokens,
        },
        response: RecordedResponse { raw: golden_reply(bench), usage: Usage::default() },
    };
    let path = fixture::path(dir, &f.bundle_hash, None);
    std::fs::create_dir_all(dir).map_err(|source| StoreError::Io { path: dir.into(), source })?;
    crate::store::write_json(&path, &f, crate::store::WriteMode::Overwrite)
        .map_err(|source| StoreError::Io { path: path.clone(), source })?;
    Ok(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VerifyOutcome {
    Checked { report: BisimReport, summary: String },
    Skipped,
}

#[derive(Debug, Error)]
pub enum VerifyFailure {
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("mapping diagnostics:\n{0}")]
    Mapping(String),
    #[error("grounding: {0}")]
    Ground(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Checks the reference abstraction against the concrete task under the
/// entry's mapping.
pub fn verify(bench: &Benchmark) -> Result<VerifyOutcome, VerifyFailure> {
    let Some(path) = &bench.mapping else {
        return Ok(VerifyOutcome::Skipped);
    };
    let src = std::fs::read_to_string(path)
        .map_err(|e| VerifyFailure::Read { path: path.clone(), message: e.to_string() })?;
    let m = parse_mapping(&src, &bench.hl, &bench.ll)
        .map_err(|d| VerifyFailure::Mapping(d.render(&path.display().to_string())))?;
    let opts = GroundOptions::default();
    let hl = ground(&bench.hl, &bench.hl_problem, &opts).map_err(|e| VerifyFailure::Ground(e.to_string()))?;
    let ll = ground(&bench.ll, &bench.ll_problem, &opts).map_err(|e| VerifyFailure::Ground(e.to_string()))?;
    let report = check_bisimulation(&hl, &ll, &m, &VerifyCaps::default())?;
    let summary = soundness_summary(&report, &path.display().to_string());
    Ok(VerifyOutcome::Checked { report, summary })
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no runs match `{0}`")]
    NoRuns(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOutput {
    pub rows: Vec<(String, Aggregate)>,
    pub table: String,
    pub csv: String,
    /// The table followed by one status line per run.
    pub text: String,
}

fn status_line(r: &RunRecord) -> String {
    let mut s = format!("{} {}-shot run {} [{}]:", r.benchmark, r.shot, r.run_index, r.run_id);
    for st in &r.stages {
        let _ = write!(s, " {}={}", serde_json::to_value(st.stage).unwrap().as_str().unwrap(), match st.status {
            Status::Ok => "ok",
            Status::Failed => "FAILED",
            Status::Skipped => "skipped",
        });
    }
    if r.pending() > 0 {
        let _ = write!(s, " pending={}", r.pending());
    }
    s
}

/// Aggregates stored runs per benchmark (and shot, when a benchmark was run
/// with both) and writes `reports/<name>.txt` and `.csv`.
pub fn report(store: &Store, benchmark: Option<&str>) -> Result<ReportOutput, ReportError> {
    let runs: Vec<RunRecord> = store
        .list_runs()?
        .into_iter()
        .filter(|r| benchmark.is_none_or(|b| r.benchmark == b))
        .collect();
    if runs.is_empty() {
        return Err(ReportError::NoRuns(benchmark.unwrap_or("*").to_string()));
    }
    let mut groups: BTreeMap<(&str, ShotMode), Vec<RunScore>> = BTreeMap::new();
    for r in runs.iter().filter(|r| r.answered()) {
        groups.entry((&r.benchmark, r.shot)).or_default().push(r.score);
    }
    let mut shots: BTreeMap<&str, usize> = BTreeMap::new();
    for (b, _) in groups.keys() {
        *shots.entry(b).or_default() += 1;
    }
    let rows: Vec<(String, Aggregate)> = groups
        .iter()
        .map(|((b, shot), scores)| {
            let name = if shots[b] > 1 { format!("{b}/{shot}") } else { b.to_string() };
            (name, aggregate(scores).expect("groups are non-empty"))
        })
        .collect();
    let rep = render_report(&rows);
    let mut text = rep.table.clone();
    text.push('\n');
    for r in &runs {
        text.push_str(&status_line(r));
        text.push('\n');
    }
    let name = benchmark.unwrap_or("all");
    store.write_report(name, "txt", &text)?;
    store.write_report(name, "csv", &rep.csv)?;
    Ok(ReportOutput { rows, table: rep.table, csv: rep.csv, text })
}
