mod common;

use common::naive_bisim::{naive_bisim, Side};
use pdag_core::pddl::{parse_domain, parse_problem, DomainAst, ProblemAst};
use pdag_core::plan::{ground, GroundOptions};
use pdag_core::prompt::*;
use pdag_core::verify::{check_bisimulation, parse_mapping, VerifyCaps};

use AbstractionCategory::*;
use ShotMode::*;

// Distinguishing rule text per shipped system prompt, copied from the
// published figures.
const FIXTURES: &[(AbstractionCategory, ShotMode, &[&str])] = &[
    (
        AltActions,
        Zero,
        &["Minimize the number of types, predicates, and actions", "two types 'hotel' and 'airbnb' can be combined into 'accommodation'"],
    ),
    (
        AltActions,
        One,
        &["Minimize the number of types, predicates, and actions", "Provide the solution for ## Case 2 ##"],
    ),
    (SeqActions, One, &["Do not create new types;", "retain logical succession", "Provide the solution for ## Case 2 ##"]),
    (
        ParamAbstraction,
        Zero,
        &["You must not create any new actions, types, predicates, parameters nor objects."],
    ),
    (
        AltSeqActions,
        One,
        &["keywords like 'when', 'or', 'either' are forbidden", "Provide the solution for ## Case 2 ##"],
    ),
];

#[test]
fn system_prompts_carry_their_rules() {
    for (c, s, needles) in FIXTURES {
        let text = build_system_prompt(*c, *s).unwrap();
        for n in *needles {
            assert!(text.contains(n), "{c} {s}: missing {n:?}");
        }
    }
    assert!(!build_system_prompt(AltActions, Zero).unwrap().contains("## Case"));
    assert!(!build_system_prompt(SeqActions, One)
        .unwrap()
        .contains("Minimize the number of types"));
}

#[test]
fn templates_are_plain_text() {
    for t in TEMPLATES.iter() {
        assert!(!t.text.is_empty(), "{}", t.name);
        assert!(!t.text.contains('\\'), "{} has a stray backslash", t.name);
        assert!(!t.text.contains('\r'), "{}", t.name);
        let slots: Vec<&str> = t.text.match_indices("{{").map(|(i, _)| &t.text[i..]).collect();
        for s in slots {
            assert!(
                ["{{description}}", "{{domain}}", "{{problem}}", "{{purpose}}"]
                    .iter()
                    .any(|ok| s.starts_with(ok)),
                "{}: unexpected slot",
                t.name
            );
        }
        if !t.name.starts_with("user/") {
            assert!(!t.text.contains("{{"), "{}", t.name);
        }
    }
}

#[test]
fn corpus_query_renders_in_one_shot_layout() {
    let spec = QuerySpec {
        description: "Cloud file editing.".into(),
        domain_text: common::read("cloudApps01/ll_domain.pddl"),
        problem_text: common::read("cloudApps01/ll_problem.pddl"),
        purpose: "abstract over signing in".into(),
    };
    spec.check().unwrap();
    let b = assemble(SeqActions, One, &spec).unwrap();
    let q = &b.messages[3].content;
    assert!(q.starts_with("## Case 2 ##:\n## Description ##\n\nCloud file editing.\n\n## Low-Level Domain ##\n\n(define (domain cloudApps01_LL)"));
    assert!(q.ends_with("(changedFileContent file1))   \n)\n\nSolution:\n"));
    assert!(!b.messages[1].content.contains("cloudApps"));
}

fn defines(s: &str) -> Vec<&str> {
    let mut out = vec![];
    let mut from = 0;
    while let Some(i) = s[from..].find("(define") {
        let start = from + i;
        let mut depth = 0;
        for (k, c) in s[start..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => continue,
            }
            if depth == 0 {
                out.push(&s[start..start + k + 1]);
                from = start + k + 1;
                break;
            }
        }
    }
    out
}

fn demo_sides(c: AbstractionCategory) -> ((DomainAst, ProblemAst), (DomainAst, ProblemAst)) {
    let (u, a) = build_demo(c).unwrap();
    let side = |text: &str| {
        let f = defines(text);
        let d = parse_domain(f[0]).unwrap();
        let p = parse_problem(f[1], &d).unwrap();
        (d, p)
    };
    (side(&a.content), side(&u.content))
}

const DEMO_MAPPINGS: &[(AbstractionCategory, &str)] = &[
    (
        AltActions,
        "types:
  accommodation = hotel | airbnb
  transportation = flight | trainRide
  room = room
  seat = seat
fluents:
  booked_accommodation(?r, ?a) = booked_hotel(?r, ?a) or booked_airbnb(?r, ?a)
  available_room(?r, ?a) = available_room_hotel(?r, ?a) or available_room_airbnb(?r, ?a)
  doneBookingAccommodation = bookedHotelOrAirbnb
  available_seat(?s, ?t) = available_seat_flight(?s, ?t) or available_seat_trainRide(?s, ?t)
  booked_transportation(?s, ?t) = booked_flight(?s, ?t) or booked_trainRide(?s, ?t)
  doneBookingTransportation = bookedFlightOrTrainRide
actions:
  book_accommodation(?a, ?r) = book_hotel(?a, ?r) | book_airbnb(?a, ?r)
  book_transportation(?t, ?s) = book_flight(?t, ?s) | book_trainRide(?t, ?s)
",
    ),
    (
        SeqActions,
        "types:
  beans = beans
  grinder = grinder
  cup = cup
fluents:
  whole(?b) = whole(?b)
  hasGrinder(?g) = hasGrinder(?g)
  empty(?c) = empty(?c)
  brewed(?c) = brewed(?c)
actions:
  make_coffee(?b, ?g, ?c) = grind_beans(?b, ?g) ; brew(?b, ?c)
",
    ),
    (
        AltSeqActions,
        "types:
  file = file
  userName = userName
  passWord = passWord
  editor = wordEditor | textEditor
fluents:
  valid_credentials(?u, ?p) = valid_userName(?u) and authenticUserPassword(?u, ?p)
  logged_in(?u) = signedIn(?u)
  hasEditPermission(?u, ?f) = hasEditPermission(?u, ?f)
  closed_file(?f) = closed_file(?f)
  available_editor(?e) = available_wordEditor(?e) or available_textEditor(?e)
  edited_file(?f) = changedFileContent(?f)
actions:
  login(?u, ?p) = enter_UserName(?u) ; enter_passWord(?u, ?p)
  edit_file(?f, ?e, ?u) = (openInWordEditor(?f, ?e, ?u) | openInTextEditor(?f, ?e, ?u)) ; changeFileContent(?f)
",
    ),
];

#[test]
fn demo_abstractions_are_bisimilar_to_their_concrete_domains() {
    for (c, src) in DEMO_MAPPINGS {
        let (hl, ll) = demo_sides(*c);
        let m = parse_mapping(src, &hl.0, &ll.0).unwrap_or_else(|d| panic!("{c}: {}", d.render("demo.map")));
        let h = ground(&hl.0, &hl.1, &GroundOptions::default()).unwrap();
        let l = ground(&ll.0, &ll.1, &GroundOptions::default()).unwrap();
        let r = check_bisimulation(&h, &l, &m, &VerifyCaps::default()).unwrap();
        let oracle = naive_bisim(&m, &Side::new(&hl.0, &hl.1), &Side::new(&ll.0, &ll.1));
        assert!(r.is_bisimilar(), "{c}: {:?}", r.counterexample);
        assert!(oracle.bisimilar, "{c}");
        assert_eq!(r.relation_size, oracle.relation.len(), "{c}");
    }
}
