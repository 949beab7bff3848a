/// Dense set of fact indices; the search state representation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FactSet {
    words: Vec<u64>,
}

impl FactSet {
    pub fn with_capacity(n_facts: usize) -> Self {
        FactSet {
            words: vec![0; n_facts.div_ceil(64)],
        }
    }

    #[inline]
    pub fn contains(&self, fact: usize) -> bool {
        self.words
            .get(fact / 64)
            .is_some_and(|w| w & (1 << (fact % 64)) != 0)
    }

    #[inline]
    pub fn insert(&mut self, fact: usize) {
        let word = fact / 64;
        if word >= self.words.len() {
            self.words.resize(word + 1, 0);
        }
        self.words[word] |= 1 << (fact % 64);
    }

    #[inline]
    pub fn remove(&mut self, fact: usize) {
        if let Some(w) = self.words.get_mut(fact / 64) {
            *w &= !(1 << (fact % 64));
        }
    }

    pub fn contains_all(&self, facts: &[usize]) -> bool {
        facts.iter().all(|&f| self.contains(f))
    }

    pub fn contains_none(&self, facts: &[usize]) -> bool {
        facts.iter().all(|&f| !self.contains(f))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            (0..64).filter(move |b| w & (1 << b) != 0).map(move |b| i * 64 + b)
        })
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn behaves_like_a_set(ops in proptest::collection::vec((0usize..200, any::<bool>()), 0..100)) {
            let mut set = FactSet::with_capacity(130);
            let mut model = std::collections::BTreeSet::new();
            for (f, add) in ops {
                if add { set.insert(f); model.insert(f); } else { set.remove(f); model.remove(&f); }
            }
            prop_assert_eq!(set.iter().collect::<Vec<_>>(), model.iter().copied().collect::<Vec<_>>());
            prop_assert_eq!(set.len(), model.len());
        }
    }
}
