//! Structural rubric checks.
//!
//! Merge, remove and drop items never look at high-level symbol names. They
//! work through the type image: each low-level type is sent to the least
//! common high-level supertype of its objects' high-level types, which is
//! well defined because objects keep their names across the abstraction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::rubric::{ItemKind, ItemSide, Rubric, RubricItem};
use crate::pddl::{ActionSchema, DomainAst, Ident, ProblemAst, Typed};
use crate::plan::{ground, solve, GroundOptions, SearchLimits, SolveError, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail,
    NeedsHuman,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "lowercase")]
pub enum ResolvedBy {
    Auto,
    Human { reviewer: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub item_id: String,
    pub side: ItemSide,
    pub outcome: Outcome,
    pub evidence: String,
    pub resolved_by: ResolvedBy,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("item `{0}` was already resolved by {1}")]
    AlreadyResolved(String, String),
    #[error("a human verdict must be pass or fail")]
    Undecided,
}

impl Verdict {
    fn auto(item: &RubricItem, outcome: Outcome, evidence: String) -> Verdict {
        Verdict {
            item_id: item.id.clone(),
            side: item.side,
            outcome,
            evidence,
            resolved_by: ResolvedBy::Auto,
        }
    }

    /// Whether a human still has to decide this item.
    pub fn is_pending(&self) -> bool {
        self.outcome == Outcome::NeedsHuman && self.resolved_by == ResolvedBy::Auto
    }

    /// Records a reviewer's outcome over the automatic one. Allowed once per
    /// verdict; automatic Pass and Fail outcomes may be overridden too.
    pub fn resolve(&mut self, outcome: Outcome, reviewer: &str) -> Result<(), ResolveError> {
        if outcome == Outcome::NeedsHuman {
            return Err(ResolveError::Undecided);
        }
        if let ResolvedBy::Human { reviewer } = &self.resolved_by {
            return Err(ResolveError::AlreadyResolved(self.item_id.clone(), reviewer.clone()));
        }
        self.outcome = outcome;
        self.resolved_by = ResolvedBy::Human { reviewer: reviewer.to_string() };
        Ok(())
    }
}

/// Verdicts for a run whose output could not be checked at all.
pub fn fail_all(rubric: &Rubric, reason: &str) -> Vec<Verdict> {
    rubric
        .items
        .iter()
        .map(|i| Verdict::auto(i, Outcome::Fail, reason.to_string()))
        .collect()
}

/// Where a low-level type ends up in the high-level task.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Image {
    To(Ident),
    /// Every object of the type is gone.
    Removed,
    /// The type has no objects to follow.
    Unknown,
}

struct Ctx<'a> {
    hl: &'a DomainAst,
    hl_p: &'a ProblemAst,
    ll: &'a DomainAst,
    ll_p: &'a ProblemAst,
}

fn show(names: &[Ident]) -> String {
    let v: Vec<&str> = names.iter().map(|n| n.spelling()).collect();
    format!("[{}]", v.join(", "))
}

fn sorted(mut v: Vec<Ident>) -> Vec<Ident> {
    v.sort();
    v
}

fn param_types(ps: &[Typed]) -> Vec<Ident> {
    sorted(ps.iter().map(|p| p.ty.clone()).collect())
}

/// Per-type maximum multiplicity over several multisets.
fn max_union(sigs: &[Vec<Ident>]) -> Vec<Ident> {
    let mut best: BTreeMap<&Ident, usize> = BTreeMap::new();
    for s in sigs {
        let mut here: BTreeMap<&Ident, usize> = BTreeMap::new();
        for t in s {
            *here.entry(t).or_default() += 1;
        }
        for (t, n) in here {
            let e = best.entry(t).or_default();
            *e = (*e).max(n);
        }
    }
    best.into_iter()
        .flat_map(|(t, n)| std::iter::repeat_n(t.clone(), n))
        .collect()
}

impl Ctx<'_> {
    fn hl_objects_of(&self, t: &Ident) -> BTreeSet<Ident> {
        self.hl_p
            .objects
            .iter()
            .filter(|o| self.hl.types.is_subtype(&o.ty, t))
            .map(|o| o.name.clone())
            .collect()
    }

    fn ll_objects_of(&self, t: &Ident) -> Vec<&Typed> {
        self.ll_p.objects.iter().filter(|o| self.ll.types.is_subtype(&o.ty, t)).collect()
    }

    fn hl_type_of(&self, obj: &Ident) -> Option<&Ident> {
        self.hl_p.object(obj).map(|o| &o.ty)
    }

    fn lca(&self, types: &[&Ident]) -> Ident {
        let mut cur = types[0].clone();
        for _ in 0..=self.hl.types.len() {
            if types.iter().all(|t| self.hl.types.is_subtype(t, &cur)) {
                return cur;
            }
            match self.hl.types.parent(&cur) {
                Some(p) => cur = p.clone(),
                None => break,
            }
        }
        Ident::object()
    }

    fn image(&self, t: &Ident) -> Image {
        if t.canonical() == "object" {
            return Image::To(Ident::object());
        }
        let objs = self.ll_objects_of(t);
        if objs.is_empty() {
            return Image::Unknown;
        }
        let present: Vec<&Ident> = objs.iter().filter_map(|o| self.hl_type_of(&o.name)).collect();
        if present.is_empty() {
            Image::Removed
        } else {
            Image::To(self.lca(&present))
        }
    }

    /// Image of a parameter list for merge items. Removed types drop out.
    fn merge_sig(&self, ps: &[Typed]) -> Result<Vec<Ident>, String> {
        let mut out = vec![];
        for p in ps {
            match self.image(&p.ty) {
                Image::To(t) => out.push(t),
                Image::Removed => {}
                Image::Unknown => {
                    return Err(format!("type `{}` has no objects, so its image is unknown", p.ty))
                }
            }
        }
        Ok(sorted(out))
    }

    /// Image of a parameter list for remove/drop items; `None` when some type
    /// has no image, in which case nothing in the high-level task can match.
    fn exact_sig(&self, ps: &[Typed]) -> Option<Vec<Ident>> {
        ps.iter()
            .map(|p| match self.image(&p.ty) {
                Image::To(t) => Some(t),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(sorted)
    }

    /// Parameter types in order, through the image where one exists.
    fn ordered_image(&self, ps: &[Typed]) -> Vec<Ident> {
        ps.iter()
            .map(|p| match self.image(&p.ty) {
                Image::To(t) => t,
                _ => p.ty.clone(),
            })
            .collect()
    }

    fn ll_extension(&self, pred: &Ident) -> BTreeSet<Vec<Ident>> {
        self.ll_p.init.iter().filter(|a| &a.predicate == pred).map(|a| a.args.clone()).collect()
    }

    fn hl_extension(&self, pred: &Ident) -> BTreeSet<Vec<Ident>> {
        self.hl_p.init.iter().filter(|a| &a.predicate == pred).map(|a| a.args.clone()).collect()
    }

    fn merge(
        &self,
        sigs: Result<Vec<Vec<Ident>>, String>,
        hl: Vec<(&Ident, Vec<Ident>)>,
        copied: impl Fn(&Ident) -> bool,
        expected: usize,
        what: &str,
    ) -> (Outcome, String) {
        let sigs = match sigs {
            Ok(s) => s,
            Err(e) => return (Outcome::NeedsHuman, e),
        };
        let target = max_union(&sigs);
        let (copies, cands): (Vec<Ident>, Vec<Ident>) = hl
            .into_iter()
            .filter(|(_, s)| *s == target)
            .map(|(n, _)| n.clone())
            .partition(|n| copied(n));
        let mut msg = format!(
            "{} high-level {what} with parameter types {}: {}; expected {expected}",
            cands.len(),
            show(&target),
            show(&cands)
        );
        if !copies.is_empty() {
            let _ = write!(msg, "; ignored as unchanged copies: {}", show(&copies));
        }
        let outcome = match cands.len() {
            n if n == expected => Outcome::Pass,
            n if n > expected => Outcome::NeedsHuman,
            _ => Outcome::Fail,
        };
        (outcome, msg)
    }

    /// Atoms of an action as (section, argument types), sorted. `None` when an
    /// argument type has no image.
    fn ll_skeleton(&self, a: &ActionSchema) -> Option<Vec<(u8, Vec<Ident>)>> {
        skeleton(a, |arg| match a.param(arg) {
            Some(p) => match self.image(&p.ty) {
                Image::To(t) => Some(t),
                _ => None,
            },
            None => self.hl_type_of(arg).cloned(),
        })
    }

    fn hl_skeleton(&self, a: &ActionSchema) -> Option<Vec<(u8, Vec<Ident>)>> {
        skeleton(a, |arg| match a.param(arg) {
            Some(p) => Some(p.ty.clone()),
            None => self.hl_type_of(arg).cloned(),
        })
    }

    fn same_structure(&self, h: &ActionSchema, l: &ActionSchema) -> bool {
        let hs = self.hl_skeleton(h);
        hs.is_some()
            && self.exact_sig(&l.params) == Some(param_types(&h.params))
            && self.ll_skeleton(l) == hs
    }

    /// Whether candidate `name` should not count for a merge of `sources`:
    /// it is a non-source action carried over unchanged, or some other
    /// high-level action still replicates a source, so the sources were not
    /// absorbed. Structure is compared up to renaming.
    fn copied_action(&self, name: &Ident, sources: &[Ident]) -> bool {
        let c = self.hl.action(name).expect("listed action");
        let (src, other): (Vec<&ActionSchema>, Vec<&ActionSchema>) =
            self.ll.actions.iter().partition(|l| sources.contains(&l.name));
        other.iter().any(|l| self.same_structure(c, l))
            || src.iter().any(|l| {
                self.hl.actions.iter().any(|h| &h.name != name && self.same_structure(h, l))
            })
    }

    /// A high-level predicate with the same argument types and the same
    /// non-empty initial extension as some low-level predicate.
    fn copied_predicate(&self, name: &Ident) -> bool {
        let h = self.hl.predicate(name).expect("listed predicate");
        let ext = self.hl_extension(name);
        if ext.is_empty() {
            return false;
        }
        let hsig = param_types(&h.params);
        self.ll.predicates.iter().any(|l| {
            self.exact_sig(&l.params).as_ref() == Some(&hsig) && self.ll_extension(&l.name) == ext
        })
    }

    fn merge_types(&self, sources: &[Ident], expected: usize) -> (Outcome, String) {
        let source_objs: BTreeSet<Ident> = sources
            .iter()
            .flat_map(|s| self.ll_objects_of(s))
            .map(|o| o.name.clone())
            .collect();
        if source_objs.is_empty() {
            return (Outcome::NeedsHuman, format!("no objects of types {}", show(sources)));
        }
        let missing: Vec<Ident> = source_objs.iter().filter(|o| self.hl_type_of(o).is_none()).cloned().collect();
        if !missing.is_empty() {
            return (Outcome::Fail, format!("objects missing from the high-level problem: {}", show(&missing)));
        }
        let mut tops = BTreeSet::new();
        for o in &source_objs {
            let mut top = self.hl_type_of(o).unwrap().clone();
            let inst = self.hl_objects_of(&top);
            if !inst.is_subset(&source_objs) {
                let extra: Vec<Ident> = inst.difference(&source_objs).cloned().collect();
                return (
                    Outcome::Fail,
                    format!("high-level type `{top}` also holds {}", show(&extra)),
                );
            }
            while let Some(p) = self.hl.types.parent(&top) {
                if p.canonical() == "object" || !self.hl_objects_of(p).is_subset(&source_objs) {
                    break;
                }
                top = p.clone();
            }
            tops.insert(top);
        }
        let tops: Vec<Ident> = tops.into_iter().collect();
        let msg = format!("objects of {} end up under {}; expected {expected}", show(sources), show(&tops));
        if tops.len() == expected {
            (Outcome::Pass, msg)
        } else {
            (Outcome::Fail, msg)
        }
    }

    fn remove_type(&self, name: &Ident) -> (Outcome, String) {
        let objs = self.ll_objects_of(name);
        if objs.is_empty() {
            return (Outcome::NeedsHuman, format!("type `{name}` has no objects to follow"));
        }
        let kept: Vec<String> = objs
            .iter()
            .filter_map(|o| self.hl_type_of(&o.name).map(|t| format!("{} - {t}", o.name)))
            .collect();
        if kept.is_empty() {
            (Outcome::Pass, format!("no object of `{name}` remains"))
        } else {
            (Outcome::Fail, format!("objects of `{name}` remain: {}", kept.join(", ")))
        }
    }

    fn remove_action(&self, name: &Ident) -> (Outcome, String) {
        let a = self.ll.action(name).expect("checked rubric");
        let Some(sig) = self.exact_sig(&a.params) else {
            return (Outcome::Pass, format!("a parameter type of `{name}` is gone"));
        };
        let shape = |x: &ActionSchema| (x.precondition.len(), x.add_effects.len(), x.del_effects.len());
        let same_sig: Vec<_> = self.hl.actions.iter().filter(|h| param_types(&h.params) == sig).collect();
        if same_sig.is_empty() {
            return (Outcome::Pass, format!("no high-level action has parameter types {}", show(&sig)));
        }
        let names: Vec<Ident> = same_sig.iter().map(|h| h.name.clone()).collect();
        if same_sig.iter().any(|h| shape(h) == shape(a)) {
            (Outcome::Fail, format!("same signature and effect shape: {}", show(&names)))
        } else {
            (Outcome::NeedsHuman, format!("same parameter types: {}", show(&names)))
        }
    }

    fn remove_predicate(&self, name: &Ident) -> (Outcome, String) {
        let p = self.ll.predicate(name).expect("checked rubric");
        let Some(sig) = self.exact_sig(&p.params) else {
            return (Outcome::Pass, format!("an argument type of `{name}` is gone"));
        };
        let same: Vec<Ident> = self
            .hl
            .predicates
            .iter()
            .filter(|h| param_types(&h.params) == sig)
            .map(|h| h.name.clone())
            .collect();
        if same.is_empty() {
            return (Outcome::Pass, format!("no high-level predicate has argument types {}", show(&sig)));
        }
        let ext = self.ll_extension(name);
        if !ext.is_empty() && same.iter().any(|h| self.hl_extension(h) == ext) {
            (Outcome::Fail, format!("same argument types and initial extension: {}", show(&same)))
        } else {
            (Outcome::NeedsHuman, format!("same argument types: {}", show(&same)))
        }
    }

    fn drop_parameter(&self, owner: &Ident, ty: &Ident) -> (Outcome, String) {
        let (params, hl): (&[Typed], Vec<(&Ident, &[Typed])>) = match self.ll.action(owner) {
            Some(a) => (&a.params, self.hl.actions.iter().map(|h| (&h.name, &h.params[..])).collect()),
            None => {
                let p = self.ll.predicate(owner).expect("checked rubric");
                (&p.params, self.hl.predicates.iter().map(|h| (&h.name, &h.params[..])).collect())
            }
        };
        let Some(sig) = self.exact_sig(params) else {
            return (Outcome::Pass, format!("`{ty}` no longer exists in the high-level task"));
        };
        let same: Vec<Ident> = hl
            .into_iter()
            .filter(|(_, ps)| param_types(ps) == sig)
            .map(|(n, _)| n.clone())
            .collect();
        if same.is_empty() {
            (Outcome::Pass, format!("nothing keeps the full signature {}", show(&sig)))
        } else {
            (Outcome::NeedsHuman, format!("full signature {} kept by {}", show(&sig), show(&same)))
        }
    }

    fn retain_type(&self, name: &Ident) -> (Outcome, String) {
        if !self.hl.types.contains(name) {
            return (Outcome::Fail, format!("no high-level type `{name}`"));
        }
        let ll: BTreeSet<Ident> = self.ll_objects_of(name).into_iter().map(|o| o.name.clone()).collect();
        let hl = self.hl_objects_of(name);
        if ll == hl {
            (Outcome::Pass, format!("`{name}` kept with {} objects", hl.len()))
        } else {
            let ll: Vec<Ident> = ll.into_iter().collect();
            let hl: Vec<Ident> = hl.into_iter().collect();
            (Outcome::Fail, format!("`{name}` holds {} but held {}", show(&hl), show(&ll)))
        }
    }

    fn retain_symbol(&self, what: &str, name: &Ident, ll: &[Typed], hl: Option<&[Typed]>) -> (Outcome, String) {
        let Some(hl) = hl else {
            return (Outcome::Fail, format!("no high-level {what} `{name}`"));
        };
        let want = self.ordered_image(ll);
        let got: Vec<Ident> = hl.iter().map(|p| p.ty.clone()).collect();
        if want == got {
            (Outcome::Pass, format!("{what} `{name}` kept as {}", show(&got)))
        } else {
            (Outcome::Fail, format!("{what} `{name}` has types {}, expected {}", show(&got), show(&want)))
        }
    }

    fn goal_consistent(&self) -> (Outcome, String) {
        let unknown: Vec<Ident> = self
            .hl_p
            .goal
            .iter()
            .filter(|a| self.hl.predicate(&a.predicate).is_none())
            .map(|a| a.predicate.clone())
            .collect();
        if !unknown.is_empty() {
            return (Outcome::Fail, format!("goal uses undeclared predicates {}", show(&unknown)));
        }
        let task = match ground(self.hl, self.hl_p, &GroundOptions::default()) {
            Ok(t) => t,
            Err(e) => return (Outcome::Fail, format!("grounding failed: {e}")),
        };
        match solve(&task, Strategy::Bfs, &SearchLimits::default()) {
            Ok(plan) => (Outcome::Pass, format!("solvable in {} steps", plan.steps.len())),
            Err(e @ SolveError::Unsolvable { .. }) => (Outcome::Fail, format!("unsolvable: {e}")),
            Err(e) => (Outcome::Fail, format!("undecided: {e}")),
        }
    }

    fn check(&self, item: &RubricItem) -> Verdict {
        let (outcome, evidence) = match &item.kind {
            ItemKind::MergeActions { sources, expected } => {
                let sigs = sources
                    .iter()
                    .map(|s| self.merge_sig(&self.ll.action(s).expect("checked rubric").params))
                    .collect();
                let hl = self.hl.actions.iter().map(|a| (&a.name, param_types(&a.params))).collect();
                self.merge(sigs, hl, |n| self.copied_action(n, sources), *expected, "actions")
            }
            ItemKind::MergePredicates { sources, expected } => {
                let sigs = sources
                    .iter()
                    .map(|s| self.merge_sig(&self.ll.predicate(s).expect("checked rubric").params))
                    .collect();
                let hl = self.hl.predicates.iter().map(|p| (&p.name, param_types(&p.params))).collect();
                self.merge(sigs, hl, |n| self.copied_predicate(n), *expected, "predicates")
            }
            ItemKind::MergeTypes { sources, expected } => self.merge_types(sources, *expected),
            ItemKind::RemoveType { name } => self.remove_type(name),
            ItemKind::RemoveAction { name } => self.remove_action(name),
            ItemKind::RemovePredicate { name } => self.remove_predicate(name),
            ItemKind::DropParameter { owner, ty } => self.drop_parameter(owner, ty),
            ItemKind::RetainType { name } => self.retain_type(name),
            ItemKind::RetainAction { name } => self.retain_symbol(
                "action",
                name,
                &self.ll.action(name).expect("checked rubric").params,
                self.hl.action(name).map(|a| &a.params[..]),
            ),
            ItemKind::RetainPredicate { name } => self.retain_symbol(
                "predicate",
                name,
                &self.ll.predicate(name).expect("checked rubric").params,
                self.hl.predicate(name).map(|p| &p.params[..]),
            ),
            ItemKind::RetainObjects { objects } => {
                let missing: Vec<Ident> = objects.iter().filter(|o| self.hl_p.object(o).is_none()).cloned().collect();
                if missing.is_empty() {
                    (Outcome::Pass, format!("all {} objects kept", objects.len()))
                } else {
                    (Outcome::Fail, format!("missing objects {}", show(&missing)))
                }
            }
            ItemKind::GoalConsistent => self.goal_consistent(),
        };
        Verdict::auto(item, outcome, evidence)
    }
}

/// Evaluates every rubric item against a generated abstraction.
///
/// The rubric must already have passed [`Rubric::check_against`] for the
/// low-level task; items naming unknown low-level symbols panic.
pub fn check_rubric(
    hl_domain: &DomainAst,
    hl_problem: &ProblemAst,
    ll_domain: &DomainAst,
    ll_problem: &ProblemAst,
    rubric: &Rubric,
) -> Vec<Verdict> {
    let ctx = Ctx { hl: hl_domain, hl_p: hl_problem, ll: ll_domain, ll_p: ll_problem };
    rubric.items.iter().map(|i| ctx.check(i)).collect()
}

fn skeleton(a: &ActionSchema, ty: impl Fn(&Ident) -> Option<Ident>) -> Option<Vec<(u8, Vec<Ident>)>> {
    let mut out = vec![];
    for (tag, atoms) in [(0u8, &a.precondition), (1, &a.add_effects), (2, &a.del_effects)] {
        for atom in atoms {
            let args = atom.args.iter().map(&ty).collect::<Option<Vec<_>>>()?;
            out.push((tag, args));
        }
    }
    out.sort();
    Some(out)
}

/// One line per verdict, for logs and the CLI.
pub fn describe(verdicts: &[Verdict]) -> String {
    let mut s = String::new();
    for v in verdicts {
        let o = match v.outcome {
            Outcome::Pass => "pass",
            Outcome::Fail => "FAIL",
            Outcome::NeedsHuman => "human?",
        };
        let _ = writeln!(s, "{:<7} {:<6} {:<32} {}", o, v.side, v.item_id, v.evidence);
    }
    s
}
