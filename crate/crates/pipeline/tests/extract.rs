mod common;

use common::extract_suite::{agrees_with_oracle, classify, fixture, SUITE};
use pdag_pipeline::llm::extract_pddl;

#[test]
fn suite_is_classified_correctly() {
    for (name, expect) in &SUITE {
        classify(name, expect).unwrap();
    }
}

#[test]
fn spans_match_the_naive_scanner() {
    for (name, _) in &SUITE {
        agrees_with_oracle(name).unwrap();
    }
}

#[test]
fn fenced_pair_keeps_the_prose() {
    let x = extract_pddl(&fixture("01-fenced-pair")).unwrap();
    assert!(x.rationale_text.starts_with("Abstraction rationale:"));
    assert!(x.rationale_text.ends_with("The goal keeps the original item."));
    assert!(x.domain_text.starts_with("(define (domain") && x.domain_text.ends_with(')'));
}
