use std::path::{Path, PathBuf};
use std::time::Instant;

use pdag_core::pddl::{
    codes, parse_domain, parse_domain_full, parse_problem, parse_problem_full, print_domain,
    print_problem, DomainAst,
};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus().join(rel)).unwrap()
}

const BENCHMARKS: &[&str] = &[
    "travelArrange01",
    "cloudApps01",
    "travelArrange02",
    "travelArrange03",
    "education01",
];

fn domain(rel: &str) -> DomainAst {
    parse_domain(&read(rel)).unwrap_or_else(|d| panic!("{rel}:\n{}", d.render(rel)))
}

#[test]
fn every_corpus_file_round_trips() {
    let start = Instant::now();
    for b in BENCHMARKS {
        for side in ["ll", "hl"] {
            let drel = format!("{b}/{side}_domain.pddl");
            let prel = format!("{b}/{side}_problem.pddl");
            let d = domain(&drel);
            let p = parse_problem(&read(&prel), &d)
                .unwrap_or_else(|e| panic!("{prel}:\n{}", e.render(&prel)));

            let d2 = parse_domain(&print_domain(&d)).unwrap();
            assert_eq!(d, d2, "{drel}");
            assert_eq!(print_domain(&d2), print_domain(&d));
            let p2 = parse_problem(&print_problem(&p), &d2).unwrap();
            assert_eq!(p, p2, "{prel}");
            assert_eq!(print_problem(&p2), print_problem(&p));
        }
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn travel_arrange01_shape() {
    let d = domain("travelArrange01/ll_domain.pddl");
    assert_eq!(d.types.len(), 6);
    assert_eq!(d.predicates.len(), 10);
    assert_eq!(d.actions.len(), 4);
    let p = parse_problem(&read("travelArrange01/ll_problem.pddl"), &d).unwrap();
    let count = |ty: &str| p.objects.iter().filter(|o| o.ty.canonical() == ty.to_lowercase()).count();
    assert_eq!(
        [count("room"), count("seat"), count("hotel"), count("airbnb"), count("flight"), count("trainRide")],
        [4, 4, 1, 1, 1, 1]
    );
    assert_eq!(p.init.len(), 8);
    assert_eq!(p.goal.len(), 2);
}

#[test]
fn mixed_case_spellings_survive_printing() {
    let src = read("education01/ll_domain.pddl");
    let d = parse_domain(&src).unwrap();
    let printed = print_domain(&d);
    // The declared spelling is used for the schema and the use-site spelling for atoms.
    assert!(printed.contains("(pendingWorkShopRequest ?w - workshop ?d - department)"));
    assert!(printed.contains("(pendingWorkshopRequest ?w ?d)"));
    for id in ["approvedWorkshop", "approvedWorkShop", "webConferenceSoftware"] {
        assert!(src.contains(id) && printed.contains(id), "{id}");
    }
    let p = parse_problem(&read("education01/ll_problem.pddl"), &d).unwrap();
    assert_eq!(p.goal[0].args[0].spelling(), "genAi");
    assert!(print_problem(&p).contains("(feedbackCollected genAi)"));
}

#[test]
fn faulty_travel_arrange02_original_is_reported() {
    let src = read("faults/travelArrange02_LL.pddl");
    let parsed = parse_domain_full(&src);
    assert!(parsed.value.is_none());
    let unbalanced: Vec<_> = parsed
        .diagnostics
        .iter()
        .filter(|d| d.code == codes::UNBALANCED)
        .collect();
    assert_eq!(unbalanced.len(), 2, "{:#?}", parsed.diagnostics);
    // Innermost first: the change_RoomType action, then the define.
    let action_line = src.lines().position(|l| l.contains("(:action  change_RoomType")).unwrap() + 1;
    assert_eq!(unbalanced[0].span.line as usize, action_line);
    assert_eq!(unbalanced[0].span.column, 1);
    assert_eq!(unbalanced[1].span.line, 1);
    assert!(parsed.diagnostics.iter().any(|d| d.code == codes::SYNTAX && d.message.contains(":effect")));
    for d in &parsed.diagnostics {
        assert!(d.span.within(&src));
    }
}

#[test]
fn other_listing_faults_are_reported() {
    let e = parse_domain(&read("faults/travelArrange02_HL.pddl")).unwrap_err();
    assert!(e.has_code(codes::SYNTAX));

    let d = domain("travelArrange02/hl_domain.pddl");
    let e = parse_problem(&read("faults/travelArrange02Problem1_HL.pddl"), &d).unwrap_err();
    assert!(e.has_code(codes::UNKNOWN_TYPE));
    assert!(e.has_code(codes::UNKNOWN_PREDICATE));

    let d = domain("travelArrange03/hl_domain.pddl");
    let parsed = parse_problem_full(&read("faults/travelArrange03Problem1_LL.pddl"), &d);
    assert!(parsed.diagnostics.iter().any(|d| d.code == codes::DOMAIN_MISMATCH && !d.is_error()));
    assert!(parsed.diagnostics.iter().any(|d| d.code == codes::UNKNOWN_TYPE));
}
