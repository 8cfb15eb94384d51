use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::{DomainAst, Ident, ProblemAst};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemSide {
    /// Something the abstraction should merge or remove.
    Change,
    /// Something the abstraction should keep as is.
    Retain,
}

impl fmt::Display for ItemSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ItemSide::Change => "change",
            ItemSide::Retain => "retain",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ItemKind {
    MergeActions { sources: Vec<Ident>, expected: usize },
    MergePredicates { sources: Vec<Ident>, expected: usize },
    MergeTypes { sources: Vec<Ident>, expected: usize },
    RemoveType { name: Ident },
    RemoveAction { name: Ident },
    RemovePredicate { name: Ident },
    /// `owner` is an action or predicate that should lose its `type` parameter.
    DropParameter {
        owner: Ident,
        #[serde(rename = "type")]
        ty: Ident,
    },
    RetainType { name: Ident },
    RetainAction { name: Ident },
    RetainPredicate { name: Ident },
    RetainObjects { objects: Vec<Ident> },
    GoalConsistent,
}

impl ItemKind {
    /// The side every item of this kind belongs to.
    pub fn side(&self) -> ItemSide {
        use ItemKind::*;
        match self {
            MergeActions { .. }
            | MergePredicates { .. }
            | MergeTypes { .. }
            | RemoveType { .. }
            | RemoveAction { .. }
            | RemovePredicate { .. }
            | DropParameter { .. } => ItemSide::Change,
            _ => ItemSide::Retain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RubricItem {
    pub id: String,
    pub side: ItemSide,
    #[serde(flatten)]
    pub kind: ItemKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rubric {
    pub schema_version: u32,
    pub benchmark: String,
    pub items: Vec<RubricItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RubricError {
    #[error("rubric is not valid JSON: {0}")]
    Json(String),
    #[error("unsupported schema_version {0}")]
    Schema(u32),
    #[error("rubric has no {0} items")]
    EmptySide(ItemSide),
    #[error("duplicate item id `{0}`")]
    DuplicateId(String),
    #[error("item `{id}` is a {kind} item but is marked {side}")]
    WrongSide { id: String, kind: ItemSide, side: ItemSide },
    #[error("item `{id}`: {what} `{name}` is not in the low-level task")]
    Unknown { id: String, what: &'static str, name: String },
    #[error("item `{id}`: {msg}")]
    Malformed { id: String, msg: String },
}

impl Rubric {
    /// Parses and checks the structural invariants.
    pub fn from_json(text: &str) -> Result<Rubric, RubricError> {
        let r: Rubric = serde_json::from_str(text).map_err(|e| RubricError::Json(e.to_string()))?;
        r.check_shape()?;
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rubric serializes")
    }

    pub fn items_on(&self, side: ItemSide) -> impl Iterator<Item = &RubricItem> {
        self.items.iter().filter(move |i| i.side == side)
    }

    pub fn item(&self, id: &str) -> Option<&RubricItem> {
        self.items.iter().find(|i| i.id == id)
    }

    pub fn check_shape(&self) -> Result<(), RubricError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(RubricError::Schema(self.schema_version));
        }
        let mut ids = BTreeSet::new();
        for i in &self.items {
            if !ids.insert(i.id.as_str()) {
                return Err(RubricError::DuplicateId(i.id.clone()));
            }
            if i.kind.side() != i.side {
                return Err(RubricError::WrongSide {
                    id: i.id.clone(),
                    kind: i.kind.side(),
                    side: i.side,
                });
            }
            let bad = |msg: &str| RubricError::Malformed { id: i.id.clone(), msg: msg.into() };
            match &i.kind {
                ItemKind::MergeActions { sources, expected }
                | ItemKind::MergePredicates { sources, expected }
                | ItemKind::MergeTypes { sources, expected } => {
                    if sources.is_empty() {
                        return Err(bad("merge without sources"));
                    }
                    if *expected == 0 {
                        return Err(bad("expected count must be at least 1"));
                    }
                }
                ItemKind::RetainObjects { objects } if objects.is_empty() => {
                    return Err(bad("empty object list"))
                }
                _ => {}
            }
        }
        for side in [ItemSide::Change, ItemSide::Retain] {
            if self.items_on(side).next().is_none() {
                return Err(RubricError::EmptySide(side));
            }
        }
        Ok(())
    }

    /// Checks that every name the rubric refers to exists in the low-level task.
    pub fn check_against(&self, ll: &DomainAst, ll_problem: &ProblemAst) -> Result<(), Vec<RubricError>> {
        let mut errs = vec![];
        for i in &self.items {
            let unknown = |what, name: &Ident| RubricError::Unknown {
                id: i.id.clone(),
                what,
                name: name.spelling().to_string(),
            };
            let ty = |n: &Ident| ll.types.contains(n) && n.canonical() != "object";
            match &i.kind {
                ItemKind::MergeActions { sources, .. } => errs.extend(
                    sources.iter().filter(|s| ll.action(s).is_none()).map(|s| unknown("action", s)),
                ),
                ItemKind::MergePredicates { sources, .. } => errs.extend(
                    sources.iter().filter(|s| ll.predicate(s).is_none()).map(|s| unknown("predicate", s)),
                ),
                ItemKind::MergeTypes { sources, .. } => {
                    errs.extend(sources.iter().filter(|s| !ty(s)).map(|s| unknown("type", s)))
                }
                ItemKind::RemoveType { name } | ItemKind::RetainType { name } if !ty(name) => {
                    errs.push(unknown("type", name))
                }
                ItemKind::RemoveAction { name } | ItemKind::RetainAction { name } if ll.action(name).is_none() => {
                    errs.push(unknown("action", name))
                }
                ItemKind::RemovePredicate { name } | ItemKind::RetainPredicate { name }
                    if ll.predicate(name).is_none() =>
                {
                    errs.push(unknown("predicate", name))
                }
                ItemKind::DropParameter { owner, ty } => {
                    let params = ll
                        .action(owner)
                        .map(|a| &a.params)
                        .or_else(|| ll.predicate(owner).map(|p| &p.params));
                    match params {
                        None => errs.push(unknown("action or predicate", owner)),
                        Some(ps) if !ps.iter().any(|p| &p.ty == ty) => errs.push(RubricError::Malformed {
                            id: i.id.clone(),
                            msg: format!("`{owner}` has no parameter of type `{ty}`"),
                        }),
                        _ => {}
                    }
                }
                ItemKind::RetainObjects { objects } => errs.extend(
                    objects
                        .iter()
                        .filter(|o| ll_problem.object(o).is_none())
                        .map(|o| unknown("object", o)),
                ),
                _ => {}
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}
