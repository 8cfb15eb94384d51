//! The benchmark corpus: `manifest.json` plus the files it points at.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use pdag_core::eval::Rubric;
use pdag_core::pddl::{parse_domain, parse_problem, DomainAst, ProblemAst};
use pdag_core::prompt::{supported, AbstractionCategory, QuerySpec, ShotMode};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// One benchmark as written in the manifest. Paths are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkEntry {
    pub id: String,
    pub category: AbstractionCategory,
    pub description: String,
    pub ll_domain: PathBuf,
    pub ll_problem: PathBuf,
    /// Text file holding the purpose of abstraction.
    pub purpose: PathBuf,
    pub reference_hl_domain: PathBuf,
    pub reference_hl_problem: PathBuf,
    pub rubric: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mapping: Option<PathBuf>,
    pub supported_shots: BTreeSet<ShotMode>,
}

/// A benchmark known by name only; no files are shipped for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placeholder {
    pub id: String,
    pub category: AbstractionCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub version: String,
    pub entries: Vec<BenchmarkEntry>,
    #[serde(default)]
    pub placeholders: Vec<Placeholder>,
}

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: {message}")]
    Read { path: PathBuf, message: String },
    #[error("unsupported manifest schema_version {0}")]
    Schema(u32),
    #[error("manifest has no entries")]
    NoEntries,
    #[error("duplicate benchmark id `{0}`")]
    DuplicateId(String),
    #[error("entry `{entry}`: {field} file {path} does not exist")]
    MissingFile { entry: String, field: &'static str, path: PathBuf },
    #[error("entry `{entry}`: {field} does not parse:\n{diagnostics}")]
    Parse { entry: String, field: &'static str, diagnostics: String },
    #[error("entry `{entry}`: rubric: {message}")]
    Rubric { entry: String, message: String },
    #[error("entry `{entry}`: no prompt for {category} with {shot}-shot prompting")]
    Shot { entry: String, category: AbstractionCategory, shot: ShotMode },
    #[error("entry `{entry}`: empty {field}")]
    Empty { entry: String, field: &'static str },
}

/// A validated entry with its files loaded.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub entry: BenchmarkEntry,
    pub ll_domain_text: String,
    pub ll_problem_text: String,
    pub hl_domain_text: String,
    pub hl_problem_text: String,
    pub purpose: String,
    pub ll: DomainAst,
    pub ll_problem: ProblemAst,
    pub hl: DomainAst,
    pub hl_problem: ProblemAst,
    pub rubric: Rubric,
    /// Absolute path of the mapping file, if the entry has one.
    pub mapping: Option<PathBuf>,
}

impl Benchmark {
    pub fn id(&self) -> &str {
        &self.entry.id
    }

    pub fn query(&self) -> QuerySpec {
        QuerySpec {
            description: self.entry.description.clone(),
            domain_text: self.ll_domain_text.clone(),
            problem_text: self.ll_problem_text.clone(),
            purpose: self.purpose.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub benchmarks: Vec<Benchmark>,
}

impl Corpus {
    pub fn get(&self, id: &str) -> Option<&Benchmark> {
        self.benchmarks.iter().find(|b| b.entry.id == id)
    }

    pub fn categories(&self) -> BTreeSet<AbstractionCategory> {
        self.benchmarks.iter().map(|b| b.entry.category).collect()
    }
}

fn read(root: &Path, entry: &str, field: &'static str, rel: &Path) -> Result<String, ManifestError> {
    let path = root.join(rel);
    if !path.is_file() {
        return Err(ManifestError::MissingFile { entry: entry.into(), field, path });
    }
    std::fs::read_to_string(&path).map_err(|e| ManifestError::Read { path, message: e.to_string() })
}

fn load_entry(root: &Path, e: &BenchmarkEntry) -> Result<Benchmark, ManifestError> {
    let id = e.id.as_str();
    for shot in &e.supported_shots {
        if !supported(e.category, *shot) {
            return Err(ManifestError::Shot { entry: id.into(), category: e.category, shot: *shot });
        }
    }
    if e.supported_shots.is_empty() {
        return Err(ManifestError::Empty { entry: id.into(), field: "supported_shots" });
    }
    let parse_err = |field, d: pdag_core::pddl::Diagnostics, rel: &Path| ManifestError::Parse {
        entry: id.into(),
        field,
        diagnostics: d.render(&rel.display().to_string()),
    };
    let ll_domain_text = read(root, id, "ll_domain", &e.ll_domain)?;
    let ll_problem_text = read(root, id, "ll_problem", &e.ll_problem)?;
    let hl_domain_text = read(root, id, "reference_hl_domain", &e.reference_hl_domain)?;
    let hl_problem_text = read(root, id, "reference_hl_problem", &e.reference_hl_problem)?;
    let purpose = read(root, id, "purpose", &e.purpose)?.trim().to_string();
    if purpose.is_empty() {
        return Err(ManifestError::Empty { entry: id.into(), field: "purpose" });
    }
    let rubric_text = read(root, id, "rubric", &e.rubric)?;
    let mapping = match &e.mapping {
        Some(rel) => {
            read(root, id, "mapping", rel)?;
            Some(root.join(rel))
        }
        None => None,
    };

    let ll = parse_domain(&ll_domain_text).map_err(|d| parse_err("ll_domain", d, &e.ll_domain))?;
    let ll_problem = parse_problem(&ll_problem_text, &ll).map_err(|d| parse_err("ll_problem", d, &e.ll_problem))?;
    let hl = parse_domain(&hl_domain_text).map_err(|d| parse_err("reference_hl_domain", d, &e.reference_hl_domain))?;
    let hl_problem = parse_problem(&hl_problem_text, &hl)
        .map_err(|d| parse_err("reference_hl_problem", d, &e.reference_hl_problem))?;
    let rubric_err = |message: String| ManifestError::Rubric { entry: id.into(), message };
    let rubric = Rubric::from_json(&rubric_text).map_err(|x| rubric_err(x.to_string()))?;
    if rubric.benchmark != e.id {
        return Err(rubric_err(format!("written for `{}`", rubric.benchmark)));
    }
    rubric.check_against(&ll, &ll_problem).map_err(|errs| {
        rubric_err(errs.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))
    })?;

    Ok(Benchmark {
        entry: e.clone(),
        ll_domain_text,
        ll_problem_text,
        hl_domain_text,
        hl_problem_text,
        purpose,
        ll,
        ll_problem,
        hl,
        hl_problem,
        rubric,
        mapping,
    })
}

/// Reads and validates a manifest and everything it references.
pub fn load_manifest(path: &Path) -> Result<Corpus, ManifestError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ManifestError::Read { path: path.into(), message: e.to_string() })?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| ManifestError::Read { path: path.into(), message: e.to_string() })?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(ManifestError::Schema(manifest.schema_version));
    }
    if manifest.entries.is_empty() {
        return Err(ManifestError::NoEntries);
    }
    let mut seen = HashSet::new();
    for id in manifest.entries.iter().map(|e| &e.id).chain(manifest.placeholders.iter().map(|p| &p.id)) {
        if !seen.insert(id.as_str()) {
            return Err(ManifestError::DuplicateId(id.clone()));
        }
    }
    let root = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let benchmarks = manifest.entries.iter().map(|e| load_entry(&root, e)).collect::<Result<_, _>>()?;
    Ok(Corpus { root, manifest, benchmarks })
}
