use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ground::{successor, GroundTask};
use super::state::{ActionId, State};
use super::validate::{validate_plan, Plan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Breadth-first search; plans are shortest.
    Bfs,
    /// Greedy best-first search on the additive heuristic.
    GreedyHadd,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bfs" => Ok(Strategy::Bfs),
            "greedy" | "greedy_hadd" | "greedy-hadd" => Ok(Strategy::GreedyHadd),
            other => Err(format!("unknown strategy `{other}` (expected bfs or greedy)")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchLimits {
    pub max_expansions: usize,
    pub time: Duration,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_expansions: 1_000_000,
            time: Duration::from_secs(10),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolveError {
    #[error("the goal is unreachable ({expanded} states exhausted)")]
    Unsolvable { expanded: usize },
    #[error("search limit reached after {expanded} expansions")]
    LimitExceeded { expanded: usize },
    #[error("internal error: search produced an invalid plan ({0})")]
    InvalidPlan(String),
}

struct Limiter {
    limits: SearchLimits,
    start: Instant,
    expanded: usize,
}

impl Limiter {
    fn new(limits: &SearchLimits) -> Self {
        Limiter {
            limits: limits.clone(),
            start: Instant::now(),
            expanded: 0,
        }
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.expanded += 1;
        if self.expanded > self.limits.max_expansions
            || (self.expanded.is_multiple_of(256) && self.start.elapsed() > self.limits.time)
        {
            return Err(SolveError::LimitExceeded {
                expanded: self.expanded,
            });
        }
        Ok(())
    }
}

/// Finds a plan. Every returned plan has been checked by [`validate_plan`].
pub fn solve(task: &GroundTask, strategy: Strategy, limits: &SearchLimits) -> Result<Plan, SolveError> {
    let plan = match strategy {
        Strategy::Bfs => bfs(task, limits)?,
        Strategy::GreedyHadd => greedy(task, limits)?,
    };
    let report = validate_plan(task, &plan);
    if !report.is_valid() {
        return Err(SolveError::InvalidPlan(report.to_string()));
    }
    Ok(plan)
}

fn extract(parents: &[(usize, ActionId)], mut node: usize) -> Plan {
    let mut steps = Vec::new();
    while node != 0 {
        let (p, a) = parents[node];
        steps.push(a);
        node = p;
    }
    steps.reverse();
    Plan::new(steps)
}

fn bfs(task: &GroundTask, limits: &SearchLimits) -> Result<Plan, SolveError> {
    if task.is_goal(&task.init) {
        return Ok(Plan::default());
    }
    let mut limiter = Limiter::new(limits);
    let mut seen: HashMap<State, usize> = HashMap::new();
    let mut nodes = vec![task.init.clone()];
    let mut parents = vec![(0, 0)];
    seen.insert(task.init.clone(), 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(n) = queue.pop_front() {
        limiter.tick()?;
        let s = nodes[n].clone();
        for (i, act) in task.actions.iter().enumerate() {
            if !s.contains_all(&act.pre) {
                continue;
            }
            let next = successor(&s, act);
            if seen.contains_key(&next) {
                continue;
            }
            let id = nodes.len();
            seen.insert(next.clone(), id);
            parents.push((n, i));
            if task.is_goal(&next) {
                return Ok(extract(&parents, id));
            }
            nodes.push(next);
            queue.push_back(id);
        }
    }
    Err(SolveError::Unsolvable {
        expanded: limiter.expanded,
    })
}

/// Additive heuristic under unit action costs. `None` when some goal atom is
/// relaxed-unreachable.
pub fn h_add(task: &GroundTask, s: &State) -> Option<u64> {
    const INF: u64 = u64::MAX;
    let mut cost = vec![INF; task.atoms.len()];
    for a in s.atoms() {
        cost[a] = 0;
    }
    loop {
        let mut changed = false;
        for act in &task.actions {
            let mut c: u64 = 1;
            let mut reachable = true;
            for &p in &act.pre {
                if cost[p] == INF {
                    reachable = false;
                    break;
                }
                c = c.saturating_add(cost[p]);
            }
            if !reachable {
                continue;
            }
            for &e in &act.add {
                if c < cost[e] {
                    cost[e] = c;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    task.goal.iter().try_fold(0u64, |acc, &g| {
        (cost[g] != INF).then(|| acc.saturating_add(cost[g]))
    })
}

fn greedy(task: &GroundTask, limits: &SearchLimits) -> Result<Plan, SolveError> {
    if task.is_goal(&task.init) {
        return Ok(Plan::default());
    }
    let mut limiter = Limiter::new(limits);
    let Some(h0) = h_add(task, &task.init) else {
        return Err(SolveError::Unsolvable { expanded: 0 });
    };
    let mut seen: HashMap<State, usize> = HashMap::new();
    let mut nodes = vec![task.init.clone()];
    let mut parents = vec![(0, 0)];
    seen.insert(task.init.clone(), 0);
    // Ties go to the earliest generated node, which follows action order.
    let mut open = BinaryHeap::from([Reverse((h0, 0usize))]);
    while let Some(Reverse((_, n))) = open.pop() {
        limiter.tick()?;
        let s = nodes[n].clone();
        if task.is_goal(&s) {
            return Ok(extract(&parents, n));
        }
        for (i, act) in task.actions.iter().enumerate() {
            if !s.contains_all(&act.pre) {
                continue;
            }
            let next = successor(&s, act);
            if seen.contains_key(&next) {
                continue;
            }
            let id = nodes.len();
            seen.insert(next.clone(), id);
            parents.push((n, i));
            if let Some(h) = h_add(task, &next) {
                open.push(Reverse((h, id)));
            }
            nodes.push(next);
        }
    }
    Err(SolveError::Unsolvable {
        expanded: limiter.expanded,
    })
}
