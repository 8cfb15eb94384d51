use std::borrow::Borrow;
use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Span;

/// A PDDL name. Comparison and hashing use the case-folded form only; the
/// original spelling is kept for printing.
#[derive(Clone, Debug)]
pub struct Ident {
    spelling: String,
    canonical: String,
    span: Option<Span>,
}

impl Ident {
    pub fn new(spelling: impl Into<String>) -> Self {
        let spelling = spelling.into();
        let canonical = spelling.to_lowercase();
        Ident {
            spelling,
            canonical,
            span: None,
        }
    }

    pub fn with_span(spelling: impl Into<String>, span: Span) -> Self {
        let mut id = Ident::new(spelling);
        id.span = Some(span);
        id
    }

    pub fn spelling(&self) -> &str {
        &self.spelling
    }

    pub fn canonical(&self) -> &str {
        &self.canonical
    }

    pub fn span(&self) -> Option<Span> {
        self.span
    }

    pub fn is_variable(&self) -> bool {
        self.spelling.starts_with('?')
    }

    pub fn object() -> Self {
        Ident::new("object")
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for Ident {}

impl Hash for Ident {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state)
    }
}

impl PartialOrd for Ident {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ident {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

impl Borrow<str> for Ident {
    fn borrow(&self) -> &str {
        &self.canonical
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spelling)
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident::new(s)
    }
}

impl Serialize for Ident {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.spelling)
    }
}

impl<'de> Deserialize<'de> for Ident {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(Ident::new(s))
    }
}
