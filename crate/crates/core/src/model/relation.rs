use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::automaton::StateId;
use crate::model::stateset::StateSet;

/// A binary relation over the states of one automaton, stored row-wise:
/// row `s` holds every `r` with `s R r`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    rows: Vec<StateSet>,
}

impl Relation {
    pub fn identity(n: usize) -> Self {
        Relation { rows: (0..n).map(|s| StateSet::singleton(n, s)).collect() }
    }

    pub fn full(n: usize) -> Self {
        Relation { rows: vec![StateSet::full(n); n] }
    }

    /// The equivalence whose classes are given by `class_of`.
    pub fn from_classes(class_of: &[usize]) -> Self {
        let n = class_of.len();
        let rows = (0..n)
            .map(|s| StateSet::from_indices(n, (0..n).filter(|&r| class_of[r] == class_of[s])))
            .collect();
        Relation { rows }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Self {
        let mut rel = Relation::identity(n);
        for (s, r) in pairs {
            rel.insert(s, r);
        }
        rel
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains(&self, s: StateId, r: StateId) -> bool {
        self.rows[s].contains(r)
    }

    pub fn insert(&mut self, s: StateId, r: StateId) {
        self.rows[s].insert(r);
    }

    pub fn remove(&mut self, s: StateId, r: StateId) {
        self.rows[s].remove(r);
    }

    pub fn row(&self, s: StateId) -> &StateSet {
        &self.rows[s]
    }

    pub fn pairs(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.rows.iter().enumerate().flat_map(|(s, row)| row.iter().map(move |r| (s, r)))
    }

    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(StateSet::len).sum()
    }

    pub fn intersection(&self, other: &Relation) -> Relation {
        Relation { rows: self.rows.iter().zip(&other.rows).map(|(a, b)| a.intersection(b)).collect() }
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    pub fn inverse(&self) -> Relation {
        let n = self.len();
        let mut out = Relation { rows: vec![StateSet::empty(n); n] };
        for (s, r) in self.pairs() {
            out.rows[r].insert(s);
        }
        out
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.len()).all(|s| self.contains(s, s))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(s, r)| self.contains(r, s))
    }

    pub fn is_transitive(&self) -> bool {
        self.pairs().all(|(s, r)| self.rows[r].is_subset(&self.rows[s]))
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }

    pub fn transitive_closure(&self) -> Relation {
        let mut rows = self.rows.clone();
        loop {
            let mut changed = false;
            for s in 0..rows.len() {
                let mut acc = rows[s].clone();
                for r in rows[s].iter() {
                    acc = acc.union(&rows[r]);
                }
                if acc != rows[s] {
                    rows[s] = acc;
                    changed = true;
                }
            }
            if !changed {
                return Relation { rows };
            }
        }
    }

    /// Class index per state if this is an equivalence, numbered by first occurrence.
    pub fn classes(&self) -> Option<Vec<usize>> {
        if !self.is_equivalence() {
            return None;
        }
        let mut ids: HashMap<&StateSet, usize> = HashMap::new();
        Some(
            self.rows
                .iter()
                .map(|row| {
                    let next = ids.len();
                    *ids.entry(row).or_insert(next)
                })
                .collect(),
        )
    }

    /// ↓C: every state below some member of `set`.
    pub fn down_closure(&self, set: &StateSet) -> StateSet {
        let mut out = set.clone();
        for s in 0..self.len() {
            if !self.rows[s].intersection(set).is_empty() {
                out.insert(s);
            }
        }
        out
    }

    pub fn is_down_closed(&self, set: &StateSet) -> bool {
        self.down_closure(set) == *set
    }

    /// All sets closed under R-predecessors (the downward closed sets of the
    /// reflexive-transitive closure), in a deterministic order.
    pub fn downsets(&self, cap: usize) -> Result<Vec<StateSet>> {
        let closure = self.transitive_closure();
        let n = self.len();
        let mut out = Vec::new();
        let mut forced_in = StateSet::empty(n);
        let mut forced_out = StateSet::empty(n);
        enumerate_downsets(&closure, 0, &mut forced_in, &mut forced_out, &mut out, cap)?;
        Ok(out)
    }

    /// Principal down-sets ↓{s}, deduplicated.
    pub fn principal_downsets(&self) -> Vec<StateSet> {
        let closure = self.transitive_closure();
        let mut out: Vec<StateSet> = Vec::new();
        for s in 0..self.len() {
            let d = closure.down_closure(&StateSet::singleton(self.len(), s));
            if !out.contains(&d) {
                out.push(d);
            }
        }
        out
    }
}

fn enumerate_downsets(
    rel: &Relation,
    next: usize,
    forced_in: &mut StateSet,
    forced_out: &mut StateSet,
    out: &mut Vec<StateSet>,
    cap: usize,
) -> Result<()> {
    let n = rel.len();
    let mut k = next;
    while k < n && (forced_in.contains(k) || forced_out.contains(k)) {
        k += 1;
    }
    if k == n {
        if out.len() >= cap {
            return Err(Error::ResourceCap { cap: "downsets", limit: cap });
        }
        out.push(forced_in.clone());
        return Ok(());
    }
    // k excluded: everything above k must be excluded too.
    let (saved_in, saved_out) = (forced_in.clone(), forced_out.clone());
    let above = rel.row(k);
    if above.intersection(forced_in).is_empty() {
        *forced_out = forced_out.union(above);
        enumerate_downsets(rel, k + 1, forced_in, forced_out, out, cap)?;
        *forced_in = saved_in.clone();
        *forced_out = saved_out.clone();
    }
    // k included: everything below k must be included too.
    let below = rel.down_closure(&StateSet::singleton(n, k));
    if below.intersection(forced_out).is_empty() {
        *forced_in = forced_in.union(&below);
        enumerate_downsets(rel, k + 1, forced_in, forced_out, out, cap)?;
        *forced_in = saved_in;
        *forced_out = saved_out;
    }
    Ok(())
}

impl std::fmt::Debug for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.rows.iter().enumerate()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, xs: &[usize]) -> StateSet {
        StateSet::from_indices(n, xs.iter().copied())
    }

    #[test]
    fn discrete_order_has_all_subsets() {
        let d = Relation::identity(2).downsets(16).unwrap();
        assert_eq!(d.len(), 4);
        for s in [set(2, &[]), set(2, &[0]), set(2, &[1]), set(2, &[0, 1])] {
            assert!(d.contains(&s));
        }
    }

    #[test]
    fn chain_has_prefix_downsets() {
        // a (0) below b (1)
        let rel = Relation::from_pairs(2, [(0, 1)]);
        let d = rel.downsets(16).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.contains(&set(2, &[0])));
        assert!(!d.contains(&set(2, &[1])));
    }

    #[test]
    fn equivalence_downsets_are_class_unions() {
        let rel = Relation::from_classes(&[0, 0, 1, 2]);
        assert_eq!(rel.classes(), Some(vec![0, 0, 1, 2]));
        let d = rel.downsets(64).unwrap();
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|c| rel.is_down_closed(c)));
        assert!(matches!(rel.downsets(3), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn closure_and_inverse() {
        let rel = Relation::from_pairs(3, [(0, 1), (1, 2)]);
        assert!(!rel.is_transitive());
        let t = rel.transitive_closure();
        assert!(t.contains(0, 2) && t.is_transitive());
        assert!(rel.inverse().contains(2, 1));
        assert!(rel.classes().is_none());
    }
}
