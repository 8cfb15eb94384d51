use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mapping::{Formula, Program, RefinementMapping, Term};
use crate::pddl::Ident;
use crate::plan::{reachable_lts, ActionId, AtomId, GroundAction, GroundTask, Lts, State, DEFAULT_STATE_CAP};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyCaps {
    pub hl_states: usize,
    pub ll_states: usize,
}

impl Default for VerifyCaps {
    fn default() -> Self {
        VerifyCaps {
            hl_states: DEFAULT_STATE_CAP,
            ll_states: DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("{side} task has more than {cap} reachable states")]
    LimitExceeded { side: &'static str, cap: usize },
    #[error("no mapping for high-level {kind} `{name}`")]
    Unmapped { kind: &'static str, name: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bisimilar,
    NotBisimilar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    FluentAgreement,
    Forth,
    Back,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::FluentAgreement => "fluent-agreement",
            Condition::Forth => "forth",
            Condition::Back => "back",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub condition: Condition,
    /// HL ground action for forth/back, HL atom for fluent agreement.
    pub witness: String,
    pub hl_state: usize,
    pub ll_state: usize,
    pub hl_atoms: Vec<String>,
    pub ll_atoms: Vec<String>,
    /// Forth: the HL successor that no refinement could match.
    pub hl_target: Option<usize>,
    /// Back: the LL end state the HL side could not match.
    pub ll_target: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BisimReport {
    pub verdict: Verdict,
    pub relation_size: usize,
    /// The greatest relation, as `(hl_state, ll_state)` pairs.
    pub relation: Vec<(usize, usize)>,
    pub hl_states: usize,
    pub ll_states: usize,
    pub counterexample: Option<Counterexample>,
}

impl BisimReport {
    pub fn is_bisimilar(&self) -> bool {
        self.verdict == Verdict::Bisimilar
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum CFormula {
    Const(bool),
    Atom(AtomId),
    Not(Box<CFormula>),
    And(Vec<CFormula>),
    Or(Vec<CFormula>),
}

impl CFormula {
    fn eval(&self, s: &State) -> bool {
        match self {
            CFormula::Const(b) => *b,
            CFormula::Atom(a) => s.contains(*a),
            CFormula::Not(x) => !x.eval(s),
            CFormula::And(xs) => xs.iter().all(|x| x.eval(s)),
            CFormula::Or(xs) => xs.iter().any(|x| x.eval(s)),
        }
    }
}

/// A refinement program instantiated over ground LL actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundProgram {
    Act(ActionId),
    /// A call that does not ground (unknown object or ill-typed argument).
    Fail,
    Seq(Vec<GroundProgram>),
    Choice(Vec<GroundProgram>),
}

impl GroundProgram {
    /// End states of every execution from `s`.
    pub fn exec(&self, lts: &Lts, s: usize) -> BTreeSet<usize> {
        let mut from = BTreeSet::from([s]);
        self.exec_set(lts, &mut from);
        from
    }

    fn exec_set(&self, lts: &Lts, states: &mut BTreeSet<usize>) {
        match self {
            GroundProgram::Act(a) => {
                *states = states.iter().filter_map(|&s| lts.step(s, *a)).collect();
            }
            GroundProgram::Fail => states.clear(),
            GroundProgram::Seq(ps) => {
                for p in ps {
                    if states.is_empty() {
                        break;
                    }
                    p.exec_set(lts, states);
                }
            }
            GroundProgram::Choice(ps) => {
                let mut out = BTreeSet::new();
                for p in ps {
                    let mut branch = states.clone();
                    p.exec_set(lts, &mut branch);
                    out.extend(branch);
                }
                *states = out;
            }
        }
    }
}

type Env = HashMap<Ident, Ident>;

fn resolve(env: &Env, t: &Term) -> Option<Ident> {
    if t.is_variable() {
        env.get(t).cloned()
    } else {
        Some(t.clone())
    }
}

fn compile_formula(f: &Formula, env: &Env, ll: &GroundTask) -> CFormula {
    match f {
        Formula::Const(b) => CFormula::Const(*b),
        Formula::Atom { predicate, args } => {
            let args: Option<Vec<String>> = args
                .iter()
                .map(|a| resolve(env, a).map(|x| x.spelling().to_string()))
                .collect();
            let id = args.and_then(|args| {
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                ll.find_atom(predicate.spelling(), &args)
            });
            // Atoms outside the grounded universe never hold.
            id.map_or(CFormula::Const(false), CFormula::Atom)
        }
        Formula::Not(x) => CFormula::Not(Box::new(compile_formula(x, env, ll))),
        Formula::And(xs) => CFormula::And(xs.iter().map(|x| compile_formula(x, env, ll)).collect()),
        Formula::Or(xs) => CFormula::Or(xs.iter().map(|x| compile_formula(x, env, ll)).collect()),
    }
}

fn compile_program(p: &Program, env: &mut Env, ll: &GroundTask) -> GroundProgram {
    match p {
        Program::Act { schema, args } => {
            let args: Option<Vec<String>> = args
                .iter()
                .map(|a| resolve(env, a).map(|x| x.spelling().to_string()))
                .collect();
            args.and_then(|args| {
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                ll.find_action(schema.spelling(), &args)
            })
            .map_or(GroundProgram::Fail, GroundProgram::Act)
        }
        Program::Seq(ps) => GroundProgram::Seq(ps.iter().map(|q| compile_program(q, env, ll)).collect()),
        Program::Choice(ps) => GroundProgram::Choice(ps.iter().map(|q| compile_program(q, env, ll)).collect()),
        Program::Pick { var, ty, body } => {
            let objects: Vec<Ident> = ll
                .objects
                .iter()
                .filter(|o| ll.types.is_subtype(&o.ty, ty))
                .map(|o| o.name.clone())
                .collect();
            let saved = env.get(var).cloned();
            let branches = objects
                .into_iter()
                .map(|o| {
                    env.insert(var.clone(), o);
                    compile_program(body, env, ll)
                })
                .collect();
            match saved {
                Some(v) => env.insert(var.clone(), v),
                None => env.remove(var),
            };
            GroundProgram::Choice(branches)
        }
    }
}

fn bind(params: &[Ident], args: &[Ident]) -> Env {
    params.iter().cloned().zip(args.iter().cloned()).collect()
}

/// Instantiates the program mapped to a ground HL action.
pub fn instantiate(m: &RefinementMapping, ll: &GroundTask, hl_action: &GroundAction) -> Result<GroundProgram, VerifyError> {
    let entry = m.action(&hl_action.schema).ok_or_else(|| VerifyError::Unmapped {
        kind: "action",
        name: hl_action.schema.to_string(),
    })?;
    let mut env = bind(&entry.params, &hl_action.args);
    Ok(compile_program(&entry.program, &mut env, ll))
}

/// All `(s, s')` such that some execution of the refinement of `hl_action`
/// runs from `s` to `s'` in `ll_lts`.
pub fn macro_steps(
    ll_task: &GroundTask,
    ll_lts: &Lts,
    m: &RefinementMapping,
    hl_action: &GroundAction,
) -> Result<BTreeSet<(usize, usize)>, VerifyError> {
    let prog = instantiate(m, ll_task, hl_action)?;
    Ok((0..ll_lts.len())
        .flat_map(|s| prog.exec(ll_lts, s).into_iter().map(move |t| (s, t)))
        .collect())
}

/// Both transition systems with the mapping compiled against them.
pub struct Instance<'a> {
    pub hl: &'a GroundTask,
    pub ll: &'a GroundTask,
    pub hl_lts: Lts,
    pub ll_lts: Lts,
    fluents: Vec<CFormula>,
    programs: Vec<GroundProgram>,
    exec_cache: HashMap<(ActionId, usize), BTreeSet<usize>>,
}

impl<'a> Instance<'a> {
    pub fn new(hl: &'a GroundTask, ll: &'a GroundTask, m: &RefinementMapping, caps: &VerifyCaps) -> Result<Self, VerifyError> {
        let hl_lts = reachable_lts(hl, caps.hl_states).map_err(|e| VerifyError::LimitExceeded { side: "high-level", cap: e.cap })?;
        let ll_lts = reachable_lts(ll, caps.ll_states).map_err(|e| VerifyError::LimitExceeded { side: "low-level", cap: e.cap })?;
        let fluents = hl
            .atoms
            .iter()
            .map(|atom| {
                let entry = m.fluent(&atom.predicate).ok_or_else(|| VerifyError::Unmapped {
                    kind: "predicate",
                    name: atom.predicate.to_string(),
                })?;
                Ok(compile_formula(&entry.formula, &bind(&entry.params, &atom.args), ll))
            })
            .collect::<Result<Vec<_>, VerifyError>>()?;
        let programs = hl
            .actions
            .iter()
            .map(|a| instantiate(m, ll, a))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Instance {
            hl,
            ll,
            hl_lts,
            ll_lts,
            fluents,
            programs,
            exec_cache: HashMap::new(),
        })
    }

    /// HL state described by LL state `l`.
    pub fn image(&self, l: usize) -> State {
        let s = &self.ll_lts.states[l];
        let mut out = self.hl.empty_state();
        for (i, f) in self.fluents.iter().enumerate() {
            if f.eval(s) {
                out.insert(i);
            }
        }
        out
    }

    pub fn program(&self, hl_action: ActionId) -> &GroundProgram {
        &self.programs[hl_action]
    }

    pub fn exec(&mut self, hl_action: ActionId, l: usize) -> &BTreeSet<usize> {
        let (programs, lts) = (&self.programs, &self.ll_lts);
        self.exec_cache
            .entry((hl_action, l))
            .or_insert_with(|| programs[hl_action].exec(lts, l))
    }

    /// First HL atom on which `h` and `l` disagree.
    fn disagreement(&self, h: usize, l: usize) -> Option<AtomId> {
        let img = self.image(l);
        let hs = &self.hl_lts.states[h];
        (0..self.hl.atoms.len()).find(|&a| img.contains(a) != hs.contains(a))
    }

    /// A forth violation at `(h, l)` under `rel`: an HL step with no matching
    /// refinement execution. Returns the action and its HL target.
    fn forth_violation(&mut self, rel: &[Option<usize>], h: usize, l: usize) -> Option<(ActionId, usize)> {
        let out = self.hl_lts.successors(h).to_vec();
        out.into_iter()
            .find(|&(a, h2)| !self.exec(a, l).iter().any(|&l2| rel[l2] == Some(h2)))
    }

    /// A back violation at `(h, l)`: a refinement execution the HL side
    /// cannot match. Returns the action and the LL end state.
    fn back_violation(&mut self, rel: &[Option<usize>], h: usize, l: usize) -> Option<(ActionId, usize)> {
        for a in 0..self.hl.actions.len() {
            let step = self.hl_lts.step(h, a);
            let ends = self.exec(a, l).clone();
            if let Some(&l2) = ends.iter().find(|&&l2| step.is_none() || rel[l2] != step) {
                return Some((a, l2));
            }
        }
        None
    }

    fn counterexample(&self, condition: Condition, witness: String, h: usize, l: usize) -> Counterexample {
        Counterexample {
            condition,
            witness,
            hl_state: h,
            ll_state: l,
            hl_atoms: self.hl.describe(&self.hl_lts.states[h]),
            ll_atoms: self.ll.describe(&self.ll_lts.states[l]),
            hl_target: None,
            ll_target: None,
        }
    }

    /// Greatest m-bisimulation between the two reachable systems.
    pub fn check(&mut self) -> BisimReport {
        let (h0, l0) = (self.hl_lts.initial, self.ll_lts.initial);
        let mut cex = None;
        // Each LL state relates to at most one HL state: the one its image equals.
        let mut rel: Vec<Option<usize>> = (0..self.ll_lts.len())
            .map(|l| self.hl_lts.state_index(&self.image(l)))
            .collect();
        if rel[l0] != Some(h0) {
            let witness = self
                .disagreement(h0, l0)
                .map(|a| self.hl.atom(a).to_string())
                .unwrap_or_default();
            cex = Some(self.counterexample(Condition::FluentAgreement, witness, h0, l0));
        }
        loop {
            let mut changed = false;
            for condition in [Condition::Forth, Condition::Back] {
                for l in 0..rel.len() {
                    let Some(h) = rel[l] else { continue };
                    let violation = match condition {
                        Condition::Forth => self.forth_violation(&rel, h, l),
                        _ => self.back_violation(&rel, h, l),
                    };
                    let Some((a, target)) = violation else { continue };
                    rel[l] = None;
                    changed = true;
                    if (h, l) == (h0, l0) && cex.is_none() {
                        let mut c = self.counterexample(condition, self.hl.action(a).label(), h, l);
                        match condition {
                            Condition::Forth => c.hl_target = Some(target),
                            _ => c.ll_target = Some(target),
                        }
                        cex = Some(c);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let relation: Vec<(usize, usize)> = rel
            .iter()
            .enumerate()
            .filter_map(|(l, h)| h.map(|h| (h, l)))
            .collect();
        debug_assert!(self.is_bisimulation(&relation));
        let bisimilar = rel[l0] == Some(h0);
        BisimReport {
            verdict: if bisimilar { Verdict::Bisimilar } else { Verdict::NotBisimilar },
            relation_size: relation.len(),
            relation,
            hl_states: self.hl_lts.len(),
            ll_states: self.ll_lts.len(),
            counterexample: if bisimilar { None } else { cex },
        }
    }

    /// True when every pair satisfies all three conditions relative to `pairs`.
    pub fn is_bisimulation(&mut self, pairs: &[(usize, usize)]) -> bool {
        let Some(rel) = self.as_function(pairs) else {
            return false;
        };
        pairs.iter().all(|&(h, l)| {
            self.disagreement(h, l).is_none()
                && self.forth_violation(&rel, h, l).is_none()
                && self.back_violation(&rel, h, l).is_none()
        })
    }

    fn as_function(&self, pairs: &[(usize, usize)]) -> Option<Vec<Option<usize>>> {
        let mut rel = vec![None; self.ll_lts.len()];
        for &(h, l) in pairs {
            if rel.get(l)?.is_some() && rel[l] != Some(h) {
                // Fluent agreement forces a single HL partner per LL state.
                return None;
            }
            rel[l] = Some(h);
        }
        Some(rel)
    }

    /// Re-evaluates the failing condition of a counterexample against the
    /// report's final relation. True when the violation reproduces.
    pub fn replay(&mut self, report: &BisimReport) -> bool {
        let Some(c) = &report.counterexample else {
            return false;
        };
        let Some(rel) = self.as_function(&report.relation) else {
            return false;
        };
        let (h, l) = (c.hl_state, c.ll_state);
        if h >= self.hl_lts.len() || l >= self.ll_lts.len() {
            return false;
        }
        let Some(a) = self.hl.actions.iter().position(|x| x.label() == c.witness) else {
            return c.condition == Condition::FluentAgreement
                && self
                    .disagreement(h, l)
                    .is_some_and(|a| self.hl.atom(a).to_string() == c.witness);
        };
        match c.condition {
            Condition::FluentAgreement => false,
            Condition::Forth => match (self.hl_lts.step(h, a), c.hl_target) {
                (Some(h2), Some(t)) if h2 == t => !self.exec(a, l).iter().any(|&l2| rel[l2] == Some(h2)),
                _ => false,
            },
            Condition::Back => {
                let step = self.hl_lts.step(h, a);
                match c.ll_target {
                    Some(l2) => self.exec(a, l).contains(&l2) && (step.is_none() || rel[l2] != step),
                    None => false,
                }
            }
        }
    }
}

pub fn check_bisimulation(
    hl: &GroundTask,
    ll: &GroundTask,
    m: &RefinementMapping,
    caps: &VerifyCaps,
) -> Result<BisimReport, VerifyError> {
    Ok(Instance::new(hl, ll, m, caps)?.check())
}

pub fn replay_counterexample(
    report: &BisimReport,
    hl: &GroundTask,
    ll: &GroundTask,
    m: &RefinementMapping,
    caps: &VerifyCaps,
) -> Result<bool, VerifyError> {
    Ok(Instance::new(hl, ll, m, caps)?.replay(report))
}

/// Plain-text reading of a report for the two instances it was computed on.
pub fn soundness_summary(report: &BisimReport, mapping_path: &str) -> String {
    let mut out = format!(
        "mapping: {mapping_path}\nreachable states: {} high-level, {} low-level\nrelation size: {}\n",
        report.hl_states, report.ll_states, report.relation_size
    );
    match (&report.verdict, &report.counterexample) {
        (Verdict::Bisimilar, _) => out.push_str(
            "verdict: bisimilar at the initial states.\n\
             The abstract instance is a sound abstraction of the concrete instance under this mapping, \
             and since both initial states are fully specified it is also a complete abstraction.\n\
             This is a check of these two ground instances only, not entailment over all models of the domains.\n",
        ),
        (Verdict::NotBisimilar, Some(c)) => {
            out.push_str(&format!(
                "verdict: not bisimilar; the {} condition fails at high-level state {} / low-level state {} with witness {}.\n",
                c.condition, c.hl_state, c.ll_state, c.witness
            ));
            out.push_str("Neither a sound nor a complete abstraction is established for these instances.\n");
        }
        (Verdict::NotBisimilar, None) => out.push_str("verdict: not bisimilar.\n"),
    }
    out
}
