//! Acceptance run: one PASS or FAIL line per criterion, exit status 1 if any fails.

mod common;

#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use oracle::naive_bisim::{naive_bisim, Side};
use oracle::{load, naive_actions, naive_first_failure, naive_init, naive_shortest, read};
use pdag_core::eval::{aggregate, render_report, RunScore, SyntaxFlags, COLUMNS};
use pdag_core::pddl::{
    codes, parse_domain, parse_domain_full, parse_problem, print_domain, print_problem, DomainAst, ProblemAst,
};
use pdag_core::plan::{ground, solve, validate_plan, GroundOptions, GroundTask, Plan, SearchLimits, Strategy, ValidationReport};
use pdag_core::prompt::{assemble, supported, AbstractionCategory, QuerySpec, ShotMode};
use pdag_core::verify::{
    check_bisimulation, parse_mapping, replay_counterexample, Condition, RefinementMapping, Verdict, VerifyCaps,
};
use pdag_pipeline::runner::run_benchmark;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const BENCHES: [&str; 5] = ["travelArrange01", "cloudApps01", "travelArrange02", "travelArrange03", "education01"];

fn task(d: &DomainAst, p: &ProblemAst) -> Result<GroundTask, String> {
    ground(d, p, &GroundOptions::default()).map_err(|e| e.to_string())
}

fn corpus_round_trip() -> Check {
    let t = Instant::now();
    let mut files = 0;
    for b in BENCHES {
        for side in ["ll", "hl"] {
            let d = parse_domain(&read(&format!("{b}/{side}_domain.pddl"))).map_err(|e| format!("{b} {side}: {e:?}"))?;
            let p = parse_problem(&read(&format!("{b}/{side}_problem.pddl")), &d)
                .map_err(|e| format!("{b} {side}: {e:?}"))?;
            let d2 = parse_domain(&print_domain(&d)).map_err(|e| format!("{b} {side} reprint: {e:?}"))?;
            let p2 = parse_problem(&print_problem(&p), &d2).map_err(|e| format!("{b} {side} reprint: {e:?}"))?;
            ensure!(d == d2 && p == p2, "{b} {side}: printing changes the structure");
            files += 2;
        }
    }
    ensure!(t.elapsed() < Duration::from_secs(1), "took {:?}", t.elapsed());
    ensure!(files == 20, "{files} files");
    Ok(())
}

fn known_faults() -> Check {
    let src = read("faults/travelArrange02_LL.pddl");
    let parsed = parse_domain_full(&src);
    ensure!(parsed.value.is_none(), "faulty listing was accepted");
    let unbalanced: Vec<_> = parsed.diagnostics.iter().filter(|d| d.code == codes::UNBALANCED).collect();
    ensure!(!unbalanced.is_empty(), "no unbalanced-parens diagnostic");
    let line = src.lines().position(|l| l.contains("(:action  change_RoomType")).unwrap() + 1;
    ensure!(unbalanced[0].span.line as usize == line && unbalanced[0].span.column == 1, "span {:?}", unbalanced[0].span);
    ensure!(parsed.diagnostics.iter().all(|d| d.span.within(&src)), "span outside the source");

    let head = "(define (domain u) (:requirements :strips :typing) (:types a b - object) (:predicates (p ?x - object) (q ?x - object))";
    for (what, body) in [
        ("or", "(:action x :parameters (?v - a) :precondition (or (p ?v) (q ?v)) :effect (p ?v)))"),
        ("when", "(:action x :parameters (?v - a) :precondition (p ?v) :effect (when (p ?v) (q ?v))))"),
        ("either", "(:action x :parameters (?v - (either a b)) :precondition (p ?v) :effect (q ?v)))"),
    ] {
        let e = parse_domain(&format!("{head} {body}")).err().ok_or(format!("`{what}` was accepted"))?;
        ensure!(e.has_code(codes::UNSUPPORTED), "`{what}`: {e:?}");
    }
    Ok(())
}

fn planner_oracles() -> Check {
    for (b, side, len) in [("travelArrange01", "ll", 2), ("travelArrange01", "hl", 2), ("cloudApps01", "ll", 4), ("cloudApps01", "hl", 2)] {
        let (d, p) = load(b, side);
        let t = task(&d, &p)?;
        let start = Instant::now();
        let plan = solve(&t, Strategy::Bfs, &SearchLimits::default()).map_err(|e| format!("{b} {side}: {e}"))?;
        ensure!(start.elapsed() < Duration::from_secs(1), "{b} {side}: {:?}", start.elapsed());
        ensure!(plan.len() == len, "{b} {side}: length {}", plan.len());
        ensure!(naive_shortest(&d, &p) == Some(len), "{b} {side}: oracle disagrees");
        ensure!(validate_plan(&t, &plan).is_valid(), "{b} {side}: plan does not validate");
    }
    Ok(())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = vec![];
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn validator() -> Check {
    let mut failing = 0;
    for b in BENCHES {
        for side in ["ll", "hl"] {
            let (d, p) = load(b, side);
            let t = task(&d, &p)?;
            let Ok(plan) = solve(&t, Strategy::Bfs, &SearchLimits::default()) else { continue };
            let (acts, init) = (naive_actions(&d, &p), naive_init(&p));
            for perm in permutations(plan.len()) {
                let steps: Vec<_> = perm.iter().map(|&i| plan.steps[i]).collect();
                let names: Vec<String> = steps.iter().map(|&s| t.action(s).label().to_lowercase()).collect();
                let report = validate_plan(&t, &Plan::new(steps));
                match (naive_first_failure(&acts, &init, &names), report) {
                    (Some((step, missing)), ValidationReport::FailsAtStep { step: s, missing: m, .. }) => {
                        ensure!(s == step && m.to_string().to_lowercase() == missing, "{b} {side} {names:?}");
                        failing += 1;
                    }
                    (None, ValidationReport::FailsAtStep { .. }) => return Err(format!("{b} {side} {names:?}: spurious failure")),
                    (Some(_), r) => return Err(format!("{b} {side} {names:?}: {r:?}")),
                    (None, _) => {}
                }
            }
        }
    }
    ensure!(failing > 0, "no dependent plan was permuted");
    Ok(())
}

fn bisim_case(name: &str, edit: impl Fn(&mut RefinementMapping)) -> Result<(pdag_core::verify::BisimReport, bool), String> {
    let (hd, hp) = load(name, "hl");
    let (ld, lp) = load(name, "ll");
    let mut m = parse_mapping(&read(&format!("{name}/mapping.map")), &hd, &ld).map_err(|e| format!("{e:?}"))?;
    edit(&mut m);
    let (h, l) = (task(&hd, &hp)?, task(&ld, &lp)?);
    let start = Instant::now();
    let report = check_bisimulation(&h, &l, &m, &VerifyCaps::default()).map_err(|e| format!("{name}: {e}"))?;
    ensure!(start.elapsed() < Duration::from_secs(10), "{name}: {:?}", start.elapsed());
    ensure!(report.hl_states <= 500 && report.ll_states <= 500, "{name}: LTS too large for the oracle");
    let oracle = naive_bisim(&m, &Side::new(&hd, &hp), &Side::new(&ld, &lp));
    ensure!(oracle.bisimilar == report.is_bisimilar(), "{name}: the fixpoint oracle disagrees");
    ensure!(oracle.relation.len() == report.relation_size, "{name}: relation sizes differ");
    let replays = report.counterexample.is_none()
        || replay_counterexample(&report, &h, &l, &m, &VerifyCaps::default()).map_err(|e| e.to_string())?;
    Ok((report, replays))
}

fn bisimulation() -> Check {
    let (r, _) = bisim_case("travelArrange01", |_| {})?;
    ensure!(r.verdict == Verdict::Bisimilar, "travelArrange01: {:?}", r.verdict);

    let (r, replays) = bisim_case("travelArrange01", |m| {
        m.remove_choice_branch("book_accommodation", 1);
    })?;
    ensure!(r.verdict == Verdict::NotBisimilar, "pruned mapping still bisimilar");
    let cx = r.counterexample.as_ref().ok_or("no counterexample")?;
    ensure!(cx.condition == Condition::Forth && replays, "counterexample {cx:?}");

    let (r, _) = bisim_case("cloudApps01", |_| {})?;
    let why = r.counterexample.as_ref().map(|c| format!("{:?} {}", c.condition, c.witness)).unwrap_or_default();
    ensure!(r.verdict == Verdict::Bisimilar, "cloudApps01 reference is {:?} ({why}); the oracle agrees", r.verdict);
    Ok(())
}

fn prompt_fidelity() -> Check {
    use AbstractionCategory::*;
    use ShotMode::{One, Zero};
    let q = QuerySpec {
        description: "d".into(),
        domain_text: "(define (domain x))".into(),
        problem_text: "(define (problem y))".into(),
        purpose: "p".into(),
    };
    // Which system prompts carry each anchor in the published prompt set.
    let anchors: [(&str, &[(AbstractionCategory, ShotMode)]); 3] = [
        (
            "You are an expert in PDDL",
            &[(AltActions, Zero), (AltActions, One), (SeqActions, One), (ParamAbstraction, Zero), (AltSeqActions, One)],
        ),
        ("Minimize the number of types, predicates", &[(AltActions, Zero), (AltActions, One), (AltSeqActions, One)]),
        ("keywords like 'when', 'or', 'either' are forbidden", &[(AltSeqActions, One)]),
    ];
    let mut unsupported = 0;
    for c in AbstractionCategory::ALL {
        for shot in [Zero, One] {
            match assemble(c, shot, &q) {
                Ok(b) => {
                    ensure!(supported(c, shot), "{c} {shot} assembled but is unsupported");
                    let sys = &b.messages[0].content;
                    for (anchor, carriers) in &anchors {
                        let want = carriers.contains(&(c, shot));
                        ensure!(sys.contains(anchor) == want, "{c} {shot}: `{anchor}` present={}", !want);
                    }
                    let want = if shot == Zero { 2 } else { 4 };
                    ensure!(b.messages.len() == want, "{c} {shot}: {} messages", b.messages.len());
                }
                Err(_) => {
                    ensure!(!supported(c, shot), "{c} {shot} failed to assemble");
                    unsupported += 1;
                }
            }
        }
    }
    ensure!(unsupported == 3, "{unsupported} unsupported combinations");
    Ok(())
}

fn extraction() -> Check {
    use common::extract_suite::{agrees_with_oracle, classify, SUITE};
    ensure!(SUITE.len() == 10, "{} fixtures", SUITE.len());
    for (name, expect) in &SUITE {
        classify(name, expect)?;
        agrees_with_oracle(name)?;
    }
    Ok(())
}

fn metrics() -> Check {
    let run = |cn: f64| RunScore { cn, auc: 1.0, syntax_flags: SyntaxFlags::default() };
    let a = aggregate(&[0.80, 0.70, 0.80, 0.70, 0.75].map(run)).ok_or("empty aggregate")?;
    ensure!((a.cn_avg - 75.0).abs() < 1e-9, "avg {}", a.cn_avg);
    ensure!((a.cn_sd - 4.47).abs() < 0.01, "sd {}", a.cn_sd);

    let a = aggregate(&[1.0; 5].map(run)).ok_or("empty aggregate")?;
    let r = render_report(&[("HouseHold01".to_string(), a)]);
    let lines: Vec<Vec<&str>> = r.table.lines().map(|l| l.split_whitespace().collect()).collect();
    ensure!(COLUMNS[1..] == ["CN", "CN-SD", "AUC", "AUC-SD", "HDE", "FD", "VAL"], "columns {COLUMNS:?}");
    ensure!(lines[0] == COLUMNS, "header {:?}", lines[0]);
    ensure!(lines[1] == ["HouseHold01", "100.00", "0.00", "100.00", "0.00", "0", "0", "0"], "row {:?}", lines[1]);
    Ok(())
}

fn end_to_end() -> Check {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let corpus = common::corpus();
    let golden: Vec<(&str, ShotMode)> = corpus.benchmarks.iter().map(|b| (b.id(), b.entry.category.default_shot())).collect();
    let mut executions = vec![];
    for _ in 0..2 {
        let (dir, store, gw) = common::golden(&corpus, &golden);
        let mut records = vec![];
        for (id, shot) in &golden {
            let b = corpus.get(id).unwrap();
            records.extend(rt.block_on(run_benchmark(&store, gw.clone(), b, *shot, 5, false)).map_err(|e| format!("{id}: {e}"))?);
        }
        executions.push((dir, records));
    }
    let (a, b) = (&executions[0].1, &executions[1].1);
    ensure!(a.len() == 5 * golden.len() && a.len() == b.len(), "{} vs {} records", a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (serde_json::to_vec(&x.without_timestamps()).unwrap(), serde_json::to_vec(&y.without_timestamps()).unwrap());
        ensure!(x == y, "records differ beyond their timestamps");
    }
    let below: BTreeSet<String> = a
        .iter()
        .filter(|r| r.score.cn < 1.0 || r.score.auc < 1.0)
        .map(|r| {
            let pending: Vec<_> = r.verdicts.iter().filter(|v| v.outcome != pdag_core::eval::Outcome::Pass).map(|v| v.item_id.as_str()).collect();
            format!("{} cn={:.2} auc={:.2} {pending:?}", r.benchmark, r.score.cn, r.score.auc)
        })
        .collect();
    ensure!(below.is_empty(), "deterministic, but not every golden run scores 100%: {below:?}");
    Ok(())
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Check); 9] = [
        ("corpus round-trip", corpus_round_trip),
        ("known-fault regression", known_faults),
        ("planner oracles", planner_oracles),
        ("validator", validator),
        ("bisimulation", bisimulation),
        ("prompt fidelity", prompt_fidelity),
        ("extraction", extraction),
        ("metrics", metrics),
        ("end-to-end determinism", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("PASS {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    let took = start.elapsed();
    if took < Duration::from_secs(120) {
        println!("PASS offline suite under two minutes ({:.1}s, replay transport)", took.as_secs_f64());
    } else {
        failed += 1;
        println!("FAIL offline suite under two minutes ({:.1}s)", took.as_secs_f64());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
