use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::state::{ActionId, AtomId, State};
use crate::pddl::{Atom, DomainAst, Ident, ProblemAst, TypeHierarchy, Typed};

/// A variable-free atom. Arguments are object names.
pub type GroundAtom = Atom;

pub const DEFAULT_ACTION_CAP: usize = 1_000_000;

#[derive(Clone, Debug)]
pub struct GroundOptions {
    pub max_actions: usize,
    /// Drop actions whose preconditions are not relaxed-reachable from init.
    pub prune_unreachable: bool,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_actions: DEFAULT_ACTION_CAP,
            prune_unreachable: false,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GroundError {
    #[error("grounding would produce {count} actions, above the cap of {cap}")]
    TooManyActions { count: u128, cap: usize },
    #[error("atom {0} is not well-typed against the domain")]
    IllTypedAtom(Atom),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundAction {
    pub schema: Ident,
    pub args: Vec<Ident>,
    pub pre: Vec<AtomId>,
    pub add: Vec<AtomId>,
    pub del: Vec<AtomId>,
}

impl GroundAction {
    /// `(name arg ...)`, the plan-file form.
    pub fn label(&self) -> String {
        let mut s = format!("({}", self.schema);
        for a in &self.args {
            s.push(' ');
            s.push_str(a.spelling());
        }
        s.push(')');
        s
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// A propositional STRIPS task.
#[derive(Clone, Debug)]
pub struct GroundTask {
    pub atoms: Vec<GroundAtom>,
    atom_index: HashMap<GroundAtom, AtomId>,
    pub actions: Vec<GroundAction>,
    action_index: HashMap<(Ident, Vec<Ident>), ActionId>,
    pub init: State,
    pub goal: Vec<AtomId>,
    pub objects: Vec<Typed>,
    pub types: TypeHierarchy,
}

impl GroundTask {
    pub fn atom_id(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.atom_index.get(atom).copied()
    }

    pub fn atom(&self, id: AtomId) -> &GroundAtom {
        &self.atoms[id]
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id]
    }

    /// Looks up a ground action by schema name and arguments, case-insensitively.
    pub fn find_action(&self, schema: &str, args: &[&str]) -> Option<ActionId> {
        let key = (
            Ident::new(schema),
            args.iter().map(|a| Ident::new(*a)).collect::<Vec<_>>(),
        );
        self.action_index.get(&key).copied()
    }

    pub fn find_atom(&self, predicate: &str, args: &[&str]) -> Option<AtomId> {
        self.atom_id(&Atom::new(
            predicate,
            args.iter().map(|a| Ident::new(*a)).collect(),
        ))
    }

    pub fn is_goal(&self, s: &State) -> bool {
        s.contains_all(&self.goal)
    }

    pub fn empty_state(&self) -> State {
        State::empty(self.atoms.len())
    }

    /// Atoms in `s`, rendered, in id order.
    pub fn describe(&self, s: &State) -> Vec<String> {
        s.atoms().map(|a| self.atoms[a].to_string()).collect()
    }

    /// Atoms never deleted by any action.
    pub fn static_atoms(&self) -> Vec<AtomId> {
        let mut deleted = vec![false; self.atoms.len()];
        for a in &self.actions {
            for &d in &a.del {
                deleted[d] = true;
            }
        }
        (0..self.atoms.len()).filter(|&i| !deleted[i]).collect()
    }
}

/// Objects grouped for each declared type (and `object`), declaration order.
fn objects_by_type(domain: &DomainAst, problem: &ProblemAst) -> HashMap<Ident, Vec<Ident>> {
    let mut map: HashMap<Ident, Vec<Ident>> = HashMap::new();
    let all_types = std::iter::once(Ident::object()).chain(domain.types.names().cloned());
    for t in all_types {
        let objs = problem
            .objects_of(&domain.types, &t)
            .map(|o| o.name.clone())
            .collect();
        map.insert(t, objs);
    }
    map
}

/// Calls `f` with every combination of candidates, first position outermost.
fn for_each_binding(choices: &[&[Ident]], f: &mut dyn FnMut(&[Ident])) {
    fn go(choices: &[&[Ident]], cur: &mut Vec<Ident>, f: &mut dyn FnMut(&[Ident])) {
        match choices.split_first() {
            None => f(cur),
            Some((first, rest)) => {
                for c in first.iter() {
                    cur.push(c.clone());
                    go(rest, cur, f);
                    cur.pop();
                }
            }
        }
    }
    go(choices, &mut Vec::new(), f)
}

fn choices<'a>(params: &[Typed], by_type: &'a HashMap<Ident, Vec<Ident>>) -> Vec<&'a [Ident]> {
    params
        .iter()
        .map(|p| by_type.get(&p.ty).map(Vec::as_slice).unwrap_or(&[]))
        .collect()
}

/// Instantiates every schema with every type-consistent object tuple.
pub fn ground(
    domain: &DomainAst,
    problem: &ProblemAst,
    opts: &GroundOptions,
) -> Result<GroundTask, GroundError> {
    let by_type = objects_by_type(domain, problem);

    let mut total: u128 = 0;
    for a in &domain.actions {
        total += choices(&a.params, &by_type)
            .iter()
            .map(|c| c.len() as u128)
            .product::<u128>();
    }
    if total > opts.max_actions as u128 {
        return Err(GroundError::TooManyActions {
            count: total,
            cap: opts.max_actions,
        });
    }

    let mut atoms = Vec::new();
    let mut atom_index = HashMap::new();
    for p in &domain.predicates {
        for_each_binding(&choices(&p.params, &by_type), &mut |args| {
            let atom = Atom::new(p.name.clone(), args.to_vec());
            atom_index.insert(atom.clone(), atoms.len());
            atoms.push(atom);
        });
    }

    let resolve = |atom: &Atom| -> Result<AtomId, GroundError> {
        // Rebuild with the schema's spelling so that rendering is uniform.
        let schema = domain
            .predicate(&atom.predicate)
            .ok_or_else(|| GroundError::IllTypedAtom(atom.clone()))?;
        let key = Atom::new(schema.name.clone(), atom.args.clone());
        atom_index
            .get(&key)
            .copied()
            .ok_or_else(|| GroundError::IllTypedAtom(atom.clone()))
    };

    let mut actions = Vec::new();
    let mut err = None;
    for a in &domain.actions {
        for_each_binding(&choices(&a.params, &by_type), &mut |args| {
            if err.is_some() {
                return;
            }
            let bind: HashMap<&Ident, &Ident> = a.params.iter().map(|p| &p.name).zip(args).collect();
            let inst = |atoms: &[Atom]| -> Result<Vec<AtomId>, GroundError> {
                let mut out: Vec<AtomId> = Vec::new();
                for at in atoms {
                    let g = Atom::new(
                        at.predicate.clone(),
                        at.args.iter().map(|v| bind[v].clone()).collect(),
                    );
                    let id = resolve(&g)?;
                    if !out.contains(&id) {
                        out.push(id);
                    }
                }
                Ok(out)
            };
            let built = (|| {
                let pre = inst(&a.precondition)?;
                let add = inst(&a.add_effects)?;
                let mut del = inst(&a.del_effects)?;
                // Add wins when an instantiation collapses an add and a delete.
                del.retain(|d| !add.contains(d));
                Ok(GroundAction {
                    schema: a.name.clone(),
                    args: args.to_vec(),
                    pre,
                    add,
                    del,
                })
            })();
            match built {
                Ok(g) => actions.push(g),
                Err(e) => err = Some(e),
            }
        });
    }
    if let Some(e) = err {
        return Err(e);
    }

    let init_ids = problem
        .init
        .iter()
        .map(resolve)
        .collect::<Result<Vec<_>, _>>()?;
    let init = State::from_atoms(atoms.len(), init_ids);
    let goal = problem
        .goal
        .iter()
        .map(resolve)
        .collect::<Result<Vec<_>, _>>()?;

    if opts.prune_unreachable {
        let reach = relaxed_reachable(atoms.len(), &init, &actions);
        actions.retain(|a| a.pre.iter().all(|&p| reach[p]));
    }

    let action_index = actions
        .iter()
        .enumerate()
        .map(|(i, a)| ((a.schema.clone(), a.args.clone()), i))
        .collect();

    Ok(GroundTask {
        atoms,
        atom_index,
        actions,
        action_index,
        init,
        goal,
        objects: problem.objects.clone(),
        types: domain.types.clone(),
    })
}

fn relaxed_reachable(universe: usize, init: &State, actions: &[GroundAction]) -> Vec<bool> {
    let mut reach = vec![false; universe];
    for a in init.atoms() {
        reach[a] = true;
    }
    loop {
        let mut changed = false;
        for a in actions {
            if a.pre.iter().all(|&p| reach[p]) {
                for &e in &a.add {
                    if !reach[e] {
                        reach[e] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return reach;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{action} is not applicable: {missing} does not hold")]
pub struct NotApplicable {
    pub action: String,
    pub missing: GroundAtom,
}

/// Applies `a` to `s`: deletes first, then adds.
pub fn apply(task: &GroundTask, s: &State, a: ActionId) -> Result<State, NotApplicable> {
    let act = &task.actions[a];
    if let Some(&m) = act.pre.iter().find(|&&p| !s.contains(p)) {
        return Err(NotApplicable {
            action: act.label(),
            missing: task.atoms[m].clone(),
        });
    }
    Ok(successor(s, act))
}

/// Applies without checking preconditions.
pub(crate) fn successor(s: &State, act: &GroundAction) -> State {
    let mut next = s.clone();
    for &d in &act.del {
        next.remove(d);
    }
    for &e in &act.add {
        next.insert(e);
    }
    next
}

pub fn applicable(task: &GroundTask, s: &State, a: ActionId) -> bool {
    s.contains_all(&task.actions[a].pre)
}
