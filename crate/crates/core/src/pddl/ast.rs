use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::Ident;

/// Declared types with their parents. `object` is the implicit root and is
/// never stored explicitly.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<(Ident, Ident)>", into = "Vec<(Ident, Ident)>")]
pub struct TypeHierarchy {
    /// Declared types in declaration order, paired with their parent.
    decls: Vec<(Ident, Ident)>,
    index: HashMap<Ident, usize>,
}

impl From<Vec<(Ident, Ident)>> for TypeHierarchy {
    fn from(decls: Vec<(Ident, Ident)>) -> Self {
        let mut t = TypeHierarchy {
            decls,
            index: HashMap::new(),
        };
        t.rebuild_index();
        t
    }
}

impl From<TypeHierarchy> for Vec<(Ident, Ident)> {
    fn from(t: TypeHierarchy) -> Self {
        t.decls
    }
}

impl TypeHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `name` under `parent`. Returns false if already declared.
    pub fn declare(&mut self, name: Ident, parent: Ident) -> bool {
        if name.canonical() == "object" || self.index.contains_key(&name) {
            return false;
        }
        self.index.insert(name.clone(), self.decls.len());
        self.decls.push((name, parent));
        true
    }

    pub fn contains(&self, name: &Ident) -> bool {
        name.canonical() == "object" || self.index.contains_key(name)
    }

    pub fn parent(&self, name: &Ident) -> Option<&Ident> {
        self.index.get(name).map(|&i| &self.decls[i].1)
    }

    /// Declared types, excluding `object`, in declaration order.
    pub fn names(&self) -> impl Iterator<Item = &Ident> {
        self.decls.iter().map(|(n, _)| n)
    }

    pub fn decls(&self) -> &[(Ident, Ident)] {
        &self.decls
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    /// Reflexive, transitive subtype test. Unknown types are only subtypes of
    /// themselves.
    pub fn is_subtype(&self, sub: &Ident, sup: &Ident) -> bool {
        if sub == sup || sup.canonical() == "object" {
            return true;
        }
        let mut cur = sub;
        // Bounded by the number of declarations so a malformed cycle cannot hang.
        for _ in 0..=self.decls.len() {
            match self.parent(cur) {
                Some(p) if p == sup => return true,
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }

    /// First declared type that lies on a parent cycle, if any.
    pub fn find_cycle(&self) -> Option<&Ident> {
        for (name, _) in &self.decls {
            let mut cur = name;
            for _ in 0..=self.decls.len() {
                match self.parent(cur) {
                    Some(p) if p == name => return Some(name),
                    Some(p) => cur = p,
                    None => break,
                }
            }
        }
        None
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .decls
            .iter()
            .enumerate()
            .map(|(i, (n, _))| (n.clone(), i))
            .collect();
    }
}

/// A typed variable or object.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Typed {
    pub name: Ident,
    pub ty: Ident,
}

impl Typed {
    pub fn new(name: impl Into<Ident>, ty: impl Into<Ident>) -> Self {
        Typed {
            name: name.into(),
            ty: ty.into(),
        }
    }
}

/// A predicate applied to terms: variables in schemas, objects in problems.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: Ident,
    pub args: Vec<Ident>,
}

impl Atom {
    pub fn new(predicate: impl Into<Ident>, args: Vec<Ident>) -> Self {
        Atom {
            predicate: predicate.into(),
            args,
        }
    }
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSchema {
    pub name: Ident,
    pub params: Vec<Typed>,
}

impl PredicateSchema {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: Ident,
    pub params: Vec<Typed>,
    pub precondition: Vec<Atom>,
    pub add_effects: Vec<Atom>,
    pub del_effects: Vec<Atom>,
}

impl ActionSchema {
    pub fn param(&self, var: &Ident) -> Option<&Typed> {
        self.params.iter().find(|p| &p.name == var)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Requirement {
    Strips,
    Typing,
}

impl Requirement {
    pub fn keyword(&self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainAst {
    pub name: Ident,
    pub requirements: Vec<Requirement>,
    pub types: TypeHierarchy,
    pub predicates: Vec<PredicateSchema>,
    pub actions: Vec<ActionSchema>,
}

impl DomainAst {
    pub fn predicate(&self, name: &Ident) -> Option<&PredicateSchema> {
        self.predicates.iter().find(|p| &p.name == name)
    }

    pub fn action(&self, name: &Ident) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| &a.name == name)
    }

    pub fn find_predicate(&self, name: &str) -> Option<&PredicateSchema> {
        self.predicate(&Ident::new(name))
    }

    pub fn find_action(&self, name: &str) -> Option<&ActionSchema> {
        self.action(&Ident::new(name))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemAst {
    pub name: Ident,
    pub domain_name: Ident,
    /// Objects in declaration order.
    pub objects: Vec<Typed>,
    /// Initial atoms, duplicate-free, in source order.
    pub init: Vec<Atom>,
    pub goal: Vec<Atom>,
}

impl ProblemAst {
    pub fn object(&self, name: &Ident) -> Option<&Typed> {
        self.objects.iter().find(|o| &o.name == name)
    }

    pub fn find_object(&self, name: &str) -> Option<&Typed> {
        self.object(&Ident::new(name))
    }

    /// Objects whose type is a subtype of `ty` under `types`.
    pub fn objects_of<'a>(
        &'a self,
        types: &'a TypeHierarchy,
        ty: &'a Ident,
    ) -> impl Iterator<Item = &'a Typed> + 'a {
        self.objects
            .iter()
            .filter(move |o| types.is_subtype(&o.ty, ty))
    }
}
