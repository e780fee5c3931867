use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::rational::{one, zero, Rational};
use crate::model::stateset::StateSet;

/// Dense index of a state within one automaton.
pub type StateId = usize;

/// A probability distribution with exact rational masses.
///
/// Entries are sorted by state, strictly positive and sum to one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Distribution {
    entries: Vec<(StateId, Rational)>,
}

impl Distribution {
    /// Builds a distribution, merging repeated states.
    pub fn new(entries: impl IntoIterator<Item = (StateId, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (s, p) in entries {
            if p <= zero() {
                return Err(Error::InvalidDistribution(format!("non-positive mass {p} on state {s}")));
            }
            *merged.entry(s).or_insert_with(zero) += p;
        }
        let dist = Distribution { entries: merged.into_iter().collect() };
        let total = dist.total();
        if total != one() {
            return Err(Error::InvalidDistribution(format!("masses sum to {total}")));
        }
        Ok(dist)
    }

    pub fn dirac(s: StateId) -> Self {
        Distribution { entries: vec![(s, one())] }
    }

    pub fn get(&self, s: StateId) -> Rational {
        match self.entries.binary_search_by_key(&s, |(t, _)| *t) {
            Ok(i) => self.entries[i].1.clone(),
            Err(_) => zero(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, &Rational)> + '_ {
        self.entries.iter().map(|(s, p)| (*s, p))
    }

    pub fn support(&self) -> impl Iterator<Item = StateId> + '_ {
        self.entries.iter().map(|(s, _)| *s)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// μ(C).
    pub fn mass(&self, set: &StateSet) -> Rational {
        self.iter().filter(|(s, _)| set.contains(*s)).fold(zero(), |acc, (_, p)| acc + p)
    }

    pub fn total(&self) -> Rational {
        self.entries.iter().fold(zero(), |acc, (_, p)| acc + p)
    }

    /// Mass per class, indexed by class id.
    pub fn project(&self, class_of: &[usize], classes: usize) -> Vec<Rational> {
        let mut out = vec![zero(); classes];
        for (s, p) in self.iter() {
            out[class_of[s]] += p;
        }
        out
    }

    /// Convex combination Σ wᵢ·μᵢ; zero weights are skipped.
    pub fn combine(parts: &[(Rational, &Distribution)]) -> Self {
        let mut merged: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (w, d) in parts {
            if *w == zero() {
                continue;
            }
            for (s, p) in d.iter() {
                *merged.entry(s).or_insert_with(zero) += w * p;
            }
        }
        Distribution { entries: merged.into_iter().filter(|(_, p)| *p > zero()).collect() }
    }

    /// Relabels every state through `f`.
    pub fn map_states(&self, f: impl Fn(StateId) -> StateId) -> Self {
        let mut merged: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (s, p) in self.iter() {
            *merged.entry(f(s)).or_insert_with(zero) += p;
        }
        Distribution { entries: merged.into_iter().collect() }
    }
}

/// A finite probabilistic automaton without actions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbAutomaton {
    name: String,
    names: Vec<String>,
    labels: Vec<BTreeSet<String>>,
    transitions: Vec<Vec<Distribution>>,
    initial: BTreeSet<StateId>,
    props: BTreeSet<String>,
    index: HashMap<String, StateId>,
}

impl ProbAutomaton {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn states(&self) -> std::ops::Range<StateId> {
        0..self.names.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn state(&self, name: &str) -> Result<StateId> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn label(&self, s: StateId) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn transitions(&self, s: StateId) -> &[Distribution] {
        &self.transitions[s]
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    pub fn props(&self) -> &BTreeSet<String> {
        &self.props
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(Vec::len).sum()
    }

    /// States carrying proposition `p`.
    pub fn sat_atom(&self, p: &str) -> StateSet {
        StateSet::from_indices(self.len(), self.states().filter(|&s| self.labels[s].contains(p)))
    }

    /// Class index per state for the label-equality partition, classes numbered by first occurrence.
    pub fn label_classes(&self) -> Vec<usize> {
        let mut seen: HashMap<&BTreeSet<String>, usize> = HashMap::new();
        self.states()
            .map(|s| {
                let next = seen.len();
                *seen.entry(&self.labels[s]).or_insert(next)
            })
            .collect()
    }

    /// One-step successors of `s` over all transitions.
    pub fn successors(&self, s: StateId) -> StateSet {
        let mut out = StateSet::empty(self.len());
        for mu in &self.transitions[s] {
            for t in mu.support() {
                out.insert(t);
            }
        }
        out
    }

    /// States reachable from `from` in at most `steps` steps (`None` = unbounded).
    pub fn reachable(&self, from: &StateSet, steps: Option<usize>) -> StateSet {
        let mut seen = from.clone();
        let mut frontier: Vec<StateId> = from.iter().collect();
        let mut depth = 0;
        while !frontier.is_empty() && steps.is_none_or(|n| depth < n) {
            let mut next = Vec::new();
            for s in frontier {
                for mu in &self.transitions[s] {
                    for t in mu.support() {
                        if seen.insert(t) {
                            next.push(t);
                        }
                    }
                }
            }
            frontier = next;
            depth += 1;
        }
        seen
    }
}

/// Incremental constructor for [`ProbAutomaton`].
#[derive(Debug, Default)]
pub struct AutomatonBuilder {
    name: String,
    names: Vec<String>,
    labels: Vec<BTreeSet<String>>,
    transitions: Vec<Vec<Distribution>>,
    initial: BTreeSet<StateId>,
    index: HashMap<String, StateId>,
}

impl AutomatonBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        AutomatonBuilder { name: name.into(), ..Default::default() }
    }

    pub fn add_state<I, S>(&mut self, name: impl Into<String>, labels: I) -> Result<StateId>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        if self.index.contains_key(&name) {
            return Err(Error::Query(format!("duplicate state `{name}`")));
        }
        let id = self.names.len();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        self.labels.push(labels.into_iter().map(Into::into).collect());
        self.transitions.push(Vec::new());
        Ok(id)
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn id(&self, name: &str) -> Option<StateId> {
        self.index.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn has_transitions(&self, s: StateId) -> bool {
        !self.transitions[s].is_empty()
    }

    pub fn add_transition(&mut self, s: StateId, dist: Distribution) {
        self.transitions[s].push(dist);
    }

    /// Convenience for tests and fixtures: masses given as `(name, num, den)`.
    pub fn add_transition_named(&mut self, s: &str, targets: &[(&str, i64, i64)]) -> Result<()> {
        let from = self.id(s).ok_or_else(|| Error::UnknownState(s.to_string()))?;
        let mut entries = Vec::new();
        for (t, n, d) in targets {
            let to = self.id(t).ok_or_else(|| Error::UnknownState(t.to_string()))?;
            entries.push((to, crate::model::rational::ratio(*n, *d)));
        }
        self.add_transition(from, Distribution::new(entries)?);
        Ok(())
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial.insert(s);
    }

    pub fn build(self) -> ProbAutomaton {
        let props = self.labels.iter().flatten().cloned().collect();
        ProbAutomaton {
            name: self.name,
            names: self.names,
            labels: self.labels,
            transitions: self.transitions,
            initial: self.initial,
            props,
            index: self.index,
        }
    }
}
