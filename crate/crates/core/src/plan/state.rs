use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a ground atom in a task's atom universe.
pub type AtomId = usize;
/// Index of a ground action in a task's action list.
pub type ActionId = usize;

/// A closed-world state: the set of true atoms as a bitset over the task's
/// atom universe.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct State {
    words: Vec<u64>,
}

impl State {
    pub fn empty(universe: usize) -> Self {
        State {
            words: vec![0; universe.div_ceil(64)],
        }
    }

    pub fn from_atoms(universe: usize, atoms: impl IntoIterator<Item = AtomId>) -> Self {
        let mut s = State::empty(universe);
        for a in atoms {
            s.insert(a);
        }
        s
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.words
            .get(atom / 64)
            .is_some_and(|w| w >> (atom % 64) & 1 == 1)
    }

    pub fn insert(&mut self, atom: AtomId) {
        self.words[atom / 64] |= 1 << (atom % 64);
    }

    pub fn remove(&mut self, atom: AtomId) {
        self.words[atom / 64] &= !(1 << (atom % 64));
    }

    pub fn contains_all(&self, atoms: &[AtomId]) -> bool {
        atoms.iter().all(|&a| self.contains(a))
    }

    /// True atoms in increasing id order.
    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w >> b & 1 == 1).map(move |b| i * 64 + b)
        })
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.atoms()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    proptest! {
        #[test]
        fn behaves_like_a_set(ops in proptest::collection::vec((any::<bool>(), 0usize..150), 0..60)) {
            let mut s = State::empty(150);
            let mut model = BTreeSet::new();
            for (ins, a) in ops {
                if ins { s.insert(a); model.insert(a); } else { s.remove(a); model.remove(&a); }
            }
            prop_assert_eq!(s.atoms().collect::<Vec<_>>(), model.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(s.len(), model.len());
        }
    }
}
