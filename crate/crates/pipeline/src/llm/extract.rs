//! Pulls the high-level domain and problem out of a free-form model reply.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedArtifacts {
    pub domain_text: String,
    pub problem_text: String,
    /// Everything that is neither the domain nor the problem, fence lines removed.
    pub rationale_text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExtractError {
    #[error("the reply contains no `(define (domain ...)` expression")]
    MissingDomain,
    #[error("the reply contains no `(define (problem ...)` expression")]
    MissingProblem,
    #[error("the {what} expression starting at byte {offset} is not closed")]
    UnbalancedExpression { what: String, offset: usize },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    Domain,
    Problem,
}

impl Kind {
    fn keyword(self) -> &'static str {
        match self {
            Kind::Domain => "domain",
            Kind::Problem => "problem",
        }
    }
}

/// Byte ranges of fenced blocks. Each entry is (whole block including the
/// fence lines, content between them). An unterminated fence runs to the end.
fn fences(raw: &str) -> Vec<(Range<usize>, Range<usize>)> {
    let mut out = vec![];
    let mut open: Option<(usize, usize)> = None;
    let mut pos = 0;
    for line in raw.split_inclusive('\n') {
        let start = pos;
        pos += line.len();
        if !line.trim_start().starts_with("```") {
            continue;
        }
        match open.take() {
            None => open = Some((start, pos)),
            Some((block, content)) => out.push((block..pos, content..start)),
        }
    }
    if let Some((block, content)) = open {
        out.push((block..raw.len(), content..raw.len()));
    }
    out
}

fn skip_ws(b: &[u8], mut i: usize) -> usize {
    while i < b.len() && b[i].is_ascii_whitespace() {
        i += 1;
    }
    i
}

fn eat_word(b: &[u8], i: usize, word: &str) -> Option<usize> {
    let end = i + word.len();
    (end <= b.len() && b[i..end].eq_ignore_ascii_case(word.as_bytes())).then_some(end)
}

/// Does a `(define (<kind>` header start at byte `i`?
fn header_at(b: &[u8], i: usize, kind: Kind) -> bool {
    let step = || -> Option<()> {
        if b.get(i) != Some(&b'(') {
            return None;
        }
        let j = eat_word(b, skip_ws(b, i + 1), "define")?;
        let j = skip_ws(b, j);
        if b.get(j) != Some(&b'(') {
            return None;
        }
        let j = eat_word(b, skip_ws(b, j + 1), kind.keyword())?;
        match b.get(j) {
            Some(c) if c.is_ascii_whitespace() || *c == b')' => Some(()),
            _ => None,
        }
    };
    step().is_some()
}

/// Index one past the parenthesis that closes the one at `start`, scanning no
/// further than `limit`. Comments run from `;` to the end of the line.
fn close_of(b: &[u8], start: usize, limit: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut i = start;
    while i < limit {
        match b[i] {
            b';' => {
                while i < limit && b[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}

struct Found {
    span: Range<usize>,
    others: usize,
}

fn find(raw: &str, kind: Kind, fences: &[(Range<usize>, Range<usize>)], skip: Option<&Range<usize>>) -> Result<Option<Found>, ExtractError> {
    let b = raw.as_bytes();
    let starts: Vec<usize> = (0..b.len())
        .filter(|&i| skip.is_none_or(|s| !s.contains(&i)) && header_at(b, i, kind))
        .collect();
    let Some(&first) = starts.first() else {
        return Ok(None);
    };
    // A block inside a fence may not run past the closing fence.
    let limit = fences
        .iter()
        .find(|(_, content)| content.contains(&first))
        .map_or(b.len(), |(_, content)| content.end);
    let end = close_of(b, first, limit).ok_or_else(|| ExtractError::UnbalancedExpression {
        what: kind.keyword().to_string(),
        offset: first,
    })?;
    let others = starts.iter().filter(|&&s| s >= end).count();
    Ok(Some(Found { span: first..end, others }))
}

fn rationale(raw: &str, cut: [&Range<usize>; 2]) -> String {
    let mut cut = cut;
    cut.sort_by_key(|r| r.start);
    let mut rest = String::new();
    let mut pos = 0;
    for r in cut {
        rest.push_str(&raw[pos..r.start]);
        pos = r.end;
    }
    rest.push_str(&raw[pos..]);

    let mut out = String::new();
    let mut blank = 0;
    for line in rest.lines() {
        let line = line.trim_end();
        if line.trim_start().starts_with("```") {
            continue;
        }
        if line.trim().is_empty() {
            blank += 1;
            continue;
        }
        if !out.is_empty() {
            out.push_str(if blank > 0 { "\n\n" } else { "\n" });
        }
        blank = 0;
        out.push_str(line);
    }
    out
}

/// Finds the first balanced `(define (domain` and `(define (problem`
/// expressions, inside or outside code fences.
///
/// ```
/// use pdag_pipeline::llm::extract_pddl;
///
/// let reply = "Here you go.\n```pddl\n(define (domain d) (:requirements :strips))\n```\n\
///              and\n(define (problem p) (:domain d))\nDone.";
/// let x = extract_pddl(reply).unwrap();
/// assert_eq!(x.domain_text, "(define (domain d) (:requirements :strips))");
/// assert_eq!(x.problem_text, "(define (problem p) (:domain d))");
/// assert_eq!(x.rationale_text, "Here you go.\n\nand\n\nDone.");
/// ```
pub fn extract_pddl(raw: &str) -> Result<ExtractedArtifacts, ExtractError> {
    let fences = fences(raw);
    let domain = find(raw, Kind::Domain, &fences, None)?.ok_or(ExtractError::MissingDomain)?;
    let problem = find(raw, Kind::Problem, &fences, Some(&domain.span))?.ok_or(ExtractError::MissingProblem)?;
    let mut warnings = vec![];
    for (found, kind) in [(&domain, Kind::Domain), (&problem, Kind::Problem)] {
        if found.others > 0 {
            warnings.push(format!(
                "{} further {} definition(s) ignored; the first one was used",
                found.others,
                kind.keyword()
            ));
        }
    }
    Ok(ExtractedArtifacts {
        domain_text: raw[domain.span.clone()].to_string(),
        problem_text: raw[problem.span.clone()].to_string(),
        rationale_text: rationale(raw, [&domain.span, &problem.span]),
        warnings,
    })
}
