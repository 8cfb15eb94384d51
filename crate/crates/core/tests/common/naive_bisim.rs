//! Unoptimised m-bisimulation: interprets the mapping AST directly over string
//! states and shrinks the full product of reachable states to a fixpoint.

use std::collections::{BTreeSet, HashMap};

use pdag_core::pddl::{DomainAst, ProblemAst};
use pdag_core::verify::{Formula, Program, RefinementMapping};

use super::{is_sub, key, naive_actions, naive_apply, naive_init, naive_reachable, NAction, NState};

pub struct Side<'a> {
    pub d: &'a DomainAst,
    pub p: &'a ProblemAst,
    pub acts: Vec<NAction>,
    pub states: Vec<NState>,
    pub init: NState,
}

impl<'a> Side<'a> {
    pub fn new(d: &'a DomainAst, p: &'a ProblemAst) -> Self {
        Side {
            d,
            p,
            acts: naive_actions(d, p),
            states: naive_reachable(d, p).into_iter().collect(),
            init: naive_init(p),
        }
    }
}

type Env = HashMap<String, String>;

fn term(env: &Env, t: &str) -> String {
    let t = t.to_lowercase();
    if t.starts_with('?') {
        env[&t].clone()
    } else {
        t
    }
}

fn bind(params: &[pdag_core::pddl::Ident], args: &[String]) -> Env {
    params
        .iter()
        .map(|p| p.canonical().to_string())
        .zip(args.iter().cloned())
        .collect()
}

pub fn eval(f: &Formula, env: &Env, s: &NState) -> bool {
    match f {
        Formula::Const(b) => *b,
        Formula::Atom { predicate, args } => {
            let args: Vec<String> = args.iter().map(|a| term(env, a.canonical())).collect();
            s.contains(&key(predicate.canonical(), &args))
        }
        Formula::Not(x) => !eval(x, env, s),
        Formula::And(xs) => xs.iter().all(|x| eval(x, env, s)),
        Formula::Or(xs) => xs.iter().any(|x| eval(x, env, s)),
    }
}

pub fn run(p: &Program, env: &mut Env, ll: &Side, from: &NState) -> BTreeSet<NState> {
    match p {
        Program::Act { schema, args } => {
            let args: Vec<String> = args.iter().map(|a| term(env, a.canonical())).collect();
            let name = key(schema.canonical(), &args);
            ll.acts
                .iter()
                .filter(|a| a.name == name)
                .filter_map(|a| naive_apply(from, a))
                .collect()
        }
        Program::Seq(ps) => {
            let mut cur = BTreeSet::from([from.clone()]);
            for q in ps {
                cur = cur.iter().flat_map(|s| run(q, env, ll, s)).collect();
            }
            cur
        }
        Program::Choice(ps) => ps.iter().flat_map(|q| run(q, env, ll, from)).collect(),
        Program::Pick { var, ty, body } => {
            let mut out = BTreeSet::new();
            for o in &ll.p.objects {
                if is_sub(ll.d, o.ty.canonical(), ty.canonical()) {
                    env.insert(var.canonical().to_string(), o.name.canonical().to_string());
                    out.extend(run(body, env, ll, from));
                }
            }
            env.remove(var.canonical());
            out
        }
    }
}

/// Splits a key `(name a b)` into its parts.
pub fn split(k: &str) -> (String, Vec<String>) {
    let mut w = k.trim_matches(|c| c == '(' || c == ')').split_whitespace().map(str::to_string);
    let name = w.next().unwrap();
    (name, w.collect())
}

/// Every ground HL atom over the HL objects, respecting types.
fn hl_atoms(d: &DomainAst, p: &ProblemAst) -> Vec<String> {
    let mut out = Vec::new();
    for pr in &d.predicates {
        let mut tuples: Vec<Vec<String>> = vec![vec![]];
        for x in &pr.params {
            let objs: Vec<String> = p
                .objects
                .iter()
                .filter(|o| is_sub(d, o.ty.canonical(), x.ty.canonical()))
                .map(|o| o.name.canonical().to_string())
                .collect();
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    objs.iter().map(move |o| {
                        let mut t = t.clone();
                        t.push(o.clone());
                        t
                    })
                })
                .collect();
        }
        for t in tuples {
            out.push(key(pr.name.canonical(), &t));
        }
    }
    out
}

pub fn image(m: &RefinementMapping, hl_atoms: &[String], l: &NState) -> NState {
    hl_atoms
        .iter()
        .filter(|a| {
            let (pred, args) = split(a);
            let e = m.fluents.iter().find(|f| f.hl.canonical() == pred).unwrap();
            eval(&e.formula, &bind(&e.params, &args), l)
        })
        .cloned()
        .collect()
}

pub fn refine(m: &RefinementMapping, hl_act: &NAction, ll: &Side, from: &NState) -> BTreeSet<NState> {
    let (name, args) = split(&hl_act.name);
    let e = m.actions.iter().find(|a| a.hl.canonical() == name).unwrap();
    run(&e.program, &mut bind(&e.params, &args), ll, from)
}

pub struct Outcome {
    pub bisimilar: bool,
    pub relation: BTreeSet<(NState, NState)>,
}

pub fn naive_bisim(m: &RefinementMapping, hl: &Side, ll: &Side) -> Outcome {
    let atoms = hl_atoms(hl.d, hl.p);
    let hid = |s: &NState| hl.states.iter().position(|x| x == s);
    let lid: HashMap<&NState, usize> = ll.states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    // Pairs as (hl index, ll index) over the full product.
    let images: Vec<NState> = ll.states.iter().map(|l| image(m, &atoms, l)).collect();
    let mut b: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (hi, h) in hl.states.iter().enumerate() {
        for (li, img) in images.iter().enumerate() {
            if img == h {
                b.insert((hi, li));
            }
        }
    }
    // hl successor index per (hl state, action), refinement ends per (action, ll state).
    let hsucc: Vec<Vec<Option<usize>>> = hl
        .states
        .iter()
        .map(|h| hl.acts.iter().map(|a| naive_apply(h, a).map(|n| hid(&n).unwrap())).collect())
        .collect();
    let mut memo: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    loop {
        let mut next = b.clone();
        for &(h, l) in &b {
            let mut ok = true;
            for (ai, a) in hl.acts.iter().enumerate() {
                let ends = memo
                    .entry((ai, l))
                    .or_insert_with(|| refine(m, a, ll, &ll.states[l]).iter().map(|s| lid[s]).collect())
                    .clone();
                let h2 = hsucc[h][ai];
                // forth
                if let Some(h2) = h2 {
                    if !ends.iter().any(|&l2| b.contains(&(h2, l2))) {
                        ok = false;
                    }
                }
                // back
                for &l2 in &ends {
                    match h2 {
                        Some(h2) if b.contains(&(h2, l2)) => {}
                        _ => ok = false,
                    }
                }
            }
            if !ok {
                next.remove(&(h, l));
            }
        }
        if next == b {
            break;
        }
        b = next;
    }
    let (h0, l0) = (hid(&hl.init).unwrap(), lid[&ll.init]);
    Outcome {
        bisimilar: b.contains(&(h0, l0)),
        relation: b
            .into_iter()
            .map(|(h, l)| (hl.states[h].clone(), ll.states[l].clone()))
            .collect(),
    }
}
