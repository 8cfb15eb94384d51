use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use super::ground::{successor, GroundTask};
use super::state::{ActionId, State};

pub const DEFAULT_STATE_CAP: usize = 50_000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("more than {cap} reachable states")]
pub struct StateLimitExceeded {
    pub cap: usize,
}

/// Reachable transition system of a ground task. State 0 is the initial state;
/// states are numbered in breadth-first discovery order with successors taken
/// in action order.
#[derive(Clone, Debug)]
pub struct Lts {
    pub states: Vec<State>,
    pub transitions: Vec<(usize, ActionId, usize)>,
    pub initial: usize,
    /// Outgoing `(action, target)` pairs per state, in action order.
    out: Vec<Vec<(ActionId, usize)>>,
    index: HashMap<State, usize>,
}

impl Lts {
    pub fn successors(&self, s: usize) -> &[(ActionId, usize)] {
        &self.out[s]
    }

    pub fn state_index(&self, s: &State) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Target of `a` from `s`, if `a` is applicable there.
    pub fn step(&self, s: usize, a: ActionId) -> Option<usize> {
        self.out[s]
            .binary_search_by_key(&a, |&(act, _)| act)
            .ok()
            .map(|i| self.out[s][i].1)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn reachable_lts(task: &GroundTask, state_cap: usize) -> Result<Lts, StateLimitExceeded> {
    let mut states = vec![task.init.clone()];
    let mut index = HashMap::from([(task.init.clone(), 0usize)]);
    let mut out: Vec<Vec<(ActionId, usize)>> = vec![Vec::new()];
    let mut transitions = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        let s = states[n].clone();
        for (i, act) in task.actions.iter().enumerate() {
            if !s.contains_all(&act.pre) {
                continue;
            }
            let next = successor(&s, act);
            let target = match index.get(&next) {
                Some(&t) => t,
                None => {
                    if states.len() >= state_cap {
                        return Err(StateLimitExceeded { cap: state_cap });
                    }
                    let t = states.len();
                    index.insert(next.clone(), t);
                    states.push(next);
                    out.push(Vec::new());
                    queue.push_back(t);
                    t
                }
            };
            out[n].push((i, target));
            transitions.push((n, i, target));
        }
    }
    Ok(Lts {
        states,
        transitions,
        initial: 0,
        out,
        index,
    })
}
