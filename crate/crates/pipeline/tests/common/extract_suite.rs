use std::path::Path;

use pdag_core::pddl::{parse_domain, parse_problem};
use pdag_pipeline::llm::{extract_pddl, ExtractError};

/// Naive reference scanner: blank out comments, squeeze out whitespace,
/// look for the literal header and count parentheses to the end of the text.
mod naive {
    #[derive(Debug, PartialEq, Eq)]
    pub enum Outcome {
        Found { domain: (usize, usize), problem: (usize, usize) },
        MissingDomain,
        MissingProblem,
        Unbalanced(usize),
    }

    fn squeeze(raw: &str) -> Vec<(char, usize)> {
        let mut out = vec![];
        let mut in_comment = false;
        for (i, c) in raw.char_indices() {
            if c == '\n' {
                in_comment = false;
            }
            if c == ';' {
                in_comment = true;
            }
            if !in_comment && !c.is_whitespace() {
                out.push((c.to_ascii_lowercase(), i));
            }
        }
        out
    }

    fn find(sq: &[(char, usize)], header: &str, skip: Option<(usize, usize)>) -> Result<Option<(usize, usize)>, usize> {
        let h: Vec<char> = header.chars().collect();
        for k in 0..sq.len() {
            let start = sq[k].1;
            if skip.is_some_and(|(a, b)| start >= a && start < b) {
                continue;
            }
            if sq.len() - k < h.len() || (0..h.len()).any(|j| sq[k + j].0 != h[j]) {
                continue;
            }
            let mut depth = 0i64;
            for &(c, i) in &sq[k..] {
                if c == '(' {
                    depth += 1;
                } else if c == ')' {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(Some((start, i + 1)));
                    }
                }
            }
            return Err(start);
        }
        Ok(None)
    }

    pub fn scan(raw: &str) -> Outcome {
        let sq = squeeze(raw);
        let domain = match find(&sq, "(define(domain", None) {
            Err(at) => return Outcome::Unbalanced(at),
            Ok(None) => return Outcome::MissingDomain,
            Ok(Some(s)) => s,
        };
        match find(&sq, "(define(problem", Some(domain)) {
            Err(at) => Outcome::Unbalanced(at),
            Ok(None) => Outcome::MissingProblem,
            Ok(Some(problem)) => Outcome::Found { domain, problem },
        }
    }
}

#[derive(Debug)]
pub enum Expect {
    Ok { domain: &'static str, problem: &'static str, warnings: usize },
    MissingDomain,
    MissingProblem,
    Unbalanced(&'static str),
}

pub const SUITE: [(&str, Expect); 10] = [
    ("01-fenced-pair", Expect::Ok { domain: "shop_HL", problem: "shop_HL_p1", warnings: 0 }),
    ("02-single-fence-both", Expect::Ok { domain: "lights_HL", problem: "lights_p", warnings: 0 }),
    ("03-unfenced", Expect::Ok { domain: "plain", problem: "plain_p", warnings: 0 }),
    ("04-interleaved", Expect::Ok { domain: "pay_HL", problem: "pay_p", warnings: 0 }),
    ("05-missing-domain", Expect::MissingDomain),
    ("06-missing-problem", Expect::MissingProblem),
    ("07-unbalanced-domain", Expect::Unbalanced("domain")),
    ("08-unbalanced-problem", Expect::Unbalanced("problem")),
    ("09-two-domains", Expect::Ok { domain: "first", problem: "pr", warnings: 1 }),
    ("10-spacing-and-case", Expect::Ok { domain: "Mixed", problem: "mixed_p", warnings: 0 }),
];

pub fn fixture(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/extract").join(format!("{name}.txt"));
    std::fs::read_to_string(p).unwrap()
}

/// Checks one fixture against its expected classification.
pub fn classify(name: &str, expect: &Expect) -> Result<(), String> {
    let raw = fixture(name);
    let got = extract_pddl(&raw);
    match (expect, &got) {
        (Expect::Ok { domain, problem, warnings }, Ok(x)) => {
            let d = parse_domain(&x.domain_text).map_err(|e| format!("{name}: {e:?}"))?;
            let p = parse_problem(&x.problem_text, &d).map_err(|e| format!("{name}: {e:?}"))?;
            let ok = d.name.spelling() == *domain
                && p.name.spelling() == *problem
                && x.warnings.len() == *warnings
                && !x.rationale_text.contains("```")
                && (*warnings > 0 || !x.rationale_text.to_lowercase().contains("(define"));
            ok.then_some(()).ok_or_else(|| format!("{name}: got {x:?}"))
        }
        (Expect::MissingDomain, Err(ExtractError::MissingDomain))
        | (Expect::MissingProblem, Err(ExtractError::MissingProblem)) => Ok(()),
        (Expect::Unbalanced(what), Err(ExtractError::UnbalancedExpression { what: w, offset })) => {
            (w == what && raw.get(*offset..*offset + 7) == Some("(define"))
                .then_some(())
                .ok_or_else(|| format!("{name}: {w} at {offset}"))
        }
        _ => Err(format!("{name}: expected {expect:?}, got {got:?}")),
    }
}

/// Compares the extracted spans with the naive scanner.
pub fn agrees_with_oracle(name: &str) -> Result<(), String> {
    let raw = fixture(name);
    match (naive::scan(&raw), extract_pddl(&raw)) {
        (naive::Outcome::Found { domain, problem }, Ok(x))
            if x.domain_text == raw[domain.0..domain.1] && x.problem_text == raw[problem.0..problem.1] =>
        {
            Ok(())
        }
        (naive::Outcome::MissingDomain, Err(ExtractError::MissingDomain))
        | (naive::Outcome::MissingProblem, Err(ExtractError::MissingProblem)) => Ok(()),
        (naive::Outcome::Unbalanced(at), Err(ExtractError::UnbalancedExpression { offset, .. })) if at == offset => Ok(()),
        (n, g) => Err(format!("{name}: oracle {n:?}, extractor {g:?}")),
    }
}
