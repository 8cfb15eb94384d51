//! Naive reference implementations used as test oracles. They work directly on
//! the ASTs with string atoms and share no code with the library's grounding,
//! search or verification.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::path::{Path, PathBuf};

use pdag_core::pddl::{parse_domain, parse_problem, Atom, DomainAst, ProblemAst};

pub type NState = BTreeSet<String>;

pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus().join(rel)).unwrap()
}

pub fn load(bench: &str, side: &str) -> (DomainAst, ProblemAst) {
    let d = parse_domain(&read(&format!("{bench}/{side}_domain.pddl"))).unwrap();
    let p = parse_problem(&read(&format!("{bench}/{side}_problem.pddl")), &d).unwrap();
    (d, p)
}

pub fn key(pred: &str, args: &[String]) -> String {
    let mut s = format!("({}", pred.to_lowercase());
    for a in args {
        s.push(' ');
        s.push_str(&a.to_lowercase());
    }
    s + ")"
}

pub fn is_sub(d: &DomainAst, t: &str, sup: &str) -> bool {
    let mut cur = t.to_lowercase();
    let sup = sup.to_lowercase();
    for _ in 0..64 {
        if cur == sup || sup == "object" {
            return true;
        }
        match d
            .types
            .decls()
            .iter()
            .find(|(n, _)| n.canonical() == cur)
        {
            Some((_, p)) => cur = p.canonical().to_string(),
            None => return false,
        }
    }
    false
}

/// A ground action as name, precondition keys, add keys and delete keys.
#[derive(Clone, Debug)]
pub struct NAction {
    pub name: String,
    pub pre: Vec<String>,
    pub add: Vec<String>,
    pub del: Vec<String>,
}

fn subst(a: &Atom, b: &HashMap<String, String>) -> String {
    let args: Vec<String> = a.args.iter().map(|x| b[x.canonical()].clone()).collect();
    key(a.predicate.canonical(), &args)
}

pub fn naive_actions(d: &DomainAst, p: &ProblemAst) -> Vec<NAction> {
    let mut out = Vec::new();
    for a in &d.actions {
        let cands: Vec<Vec<String>> = a
            .params
            .iter()
            .map(|x| {
                p.objects
                    .iter()
                    .filter(|o| is_sub(d, o.ty.canonical(), x.ty.canonical()))
                    .map(|o| o.name.canonical().to_string())
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; cands.len()];
        if cands.iter().any(|c| c.is_empty()) {
            continue;
        }
        loop {
            let b: HashMap<String, String> = a
                .params
                .iter()
                .zip(&idx)
                .enumerate()
                .map(|(k, (x, &i))| (x.name.canonical().to_string(), cands[k][i].clone()))
                .collect();
            let args: Vec<String> = a.params.iter().map(|x| b[x.name.canonical()].clone()).collect();
            let add: Vec<String> = a.add_effects.iter().map(|x| subst(x, &b)).collect();
            out.push(NAction {
                name: key(a.name.canonical(), &args),
                pre: a.precondition.iter().map(|x| subst(x, &b)).collect(),
                del: a
                    .del_effects
                    .iter()
                    .map(|x| subst(x, &b))
                    .filter(|x| !add.contains(x))
                    .collect(),
                add,
            });
            // Odometer over candidate indices, last position fastest.
            let mut done = true;
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < cands[k].len() {
                    done = false;
                    break;
                }
                idx[k] = 0;
            }
            if done {
                break;
            }
        }
    }
    out
}

pub fn naive_init(p: &ProblemAst) -> NState {
    p.init
        .iter()
        .map(|a| key(a.predicate.canonical(), &a.args.iter().map(|x| x.canonical().to_string()).collect::<Vec<_>>()))
        .collect()
}

pub fn naive_goal(p: &ProblemAst) -> Vec<String> {
    p.goal
        .iter()
        .map(|a| key(a.predicate.canonical(), &a.args.iter().map(|x| x.canonical().to_string()).collect::<Vec<_>>()))
        .collect()
}

pub fn naive_apply(s: &NState, a: &NAction) -> Option<NState> {
    if !a.pre.iter().all(|x| s.contains(x)) {
        return None;
    }
    let mut n = s.clone();
    for d in &a.del {
        n.remove(d);
    }
    for x in &a.add {
        n.insert(x.clone());
    }
    Some(n)
}

/// All reachable states.
pub fn naive_reachable(d: &DomainAst, p: &ProblemAst) -> BTreeSet<NState> {
    let acts = naive_actions(d, p);
    let mut seen = BTreeSet::from([naive_init(p)]);
    let mut queue = VecDeque::from([naive_init(p)]);
    while let Some(s) = queue.pop_front() {
        for a in &acts {
            if let Some(n) = naive_apply(&s, a) {
                if seen.insert(n.clone()) {
                    queue.push_back(n);
                }
            }
        }
    }
    seen
}

/// Length of a shortest plan, by exhaustive breadth-first search.
pub fn naive_shortest(d: &DomainAst, p: &ProblemAst) -> Option<usize> {
    let acts = naive_actions(d, p);
    let goal = naive_goal(p);
    let init = naive_init(p);
    let mut dist = HashMap::from([(init.clone(), 0usize)]);
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        let ds = dist[&s];
        if goal.iter().all(|g| s.contains(g)) {
            return Some(ds);
        }
        for a in &acts {
            if let Some(n) = naive_apply(&s, a) {
                if !dist.contains_key(&n) {
                    dist.insert(n.clone(), ds + 1);
                    queue.push_back(n);
                }
            }
        }
    }
    None
}

/// Simulates named steps. Returns the first failing 1-based step and the first
/// missing precondition key.
pub fn naive_first_failure(acts: &[NAction], init: &NState, steps: &[String]) -> Option<(usize, String)> {
    let mut s = init.clone();
    for (i, name) in steps.iter().enumerate() {
        let a = acts.iter().find(|a| &a.name == name).expect("known action");
        if let Some(m) = a.pre.iter().find(|x| !s.contains(*x)) {
            return Some((i + 1, m.clone()));
        }
        s = naive_apply(&s, a).unwrap();
    }
    None
}

pub mod naive_bisim;
