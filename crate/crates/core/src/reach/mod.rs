//! Optimal-scheduler probability engines over exact rationals.

pub mod mdp;
pub mod pattern;
pub mod stutter;

use std::collections::BTreeMap;

use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::rational::{zero, Rational};
use crate::model::stateset::StateSet;
use mdp::{bounded_values, policy_values, until_values, Mdp};

pub use pattern::{pattern_opt, PatternSet};
pub use stutter::stuttering_pattern_opt;

/// Which scheduler optimum to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Sup,
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyKind {
    /// Keyed by steps remaining.
    FiniteHorizon,
    /// One choice per state.
    Stationary,
    /// Keyed by a finite memory (pattern progress).
    Memory,
}

/// A deterministic scheduler realizing a reported optimum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicyWitness {
    pub kind: PolicyKind,
    /// `(state, memory) -> transition index`; memory is `[k]` for finite
    /// horizons, empty for stationary policies, engine-specific otherwise.
    pub choices: BTreeMap<(StateId, Vec<usize>), usize>,
}

impl PolicyWitness {
    pub fn choice(&self, s: StateId, memory: &[usize]) -> Option<usize> {
        self.choices.get(&(s, memory.to_vec())).copied()
    }
}

fn flags(set: &StateSet) -> Vec<bool> {
    (0..set.universe()).map(|i| set.contains(i)).collect()
}

/// Optimal probability of reaching `cp` within `n` steps while moving through `c`.
pub fn bounded_reach(
    a: &ProbAutomaton,
    s: StateId,
    c: &StateSet,
    cp: &StateSet,
    n: usize,
    mode: Mode,
) -> (Rational, PolicyWitness) {
    let (values, policy) = bounded_values(&Mdp::from_automaton(a), &flags(c), &flags(cp), n, mode);
    let mut choices = BTreeMap::new();
    for (k, row) in policy.iter().enumerate() {
        for (u, ch) in row.iter().enumerate() {
            if let Some(i) = ch {
                choices.insert((u, vec![k + 1]), *i);
            }
        }
    }
    (values[s].clone(), PolicyWitness { kind: PolicyKind::FiniteHorizon, choices })
}

/// Values of [`bounded_reach`] for every state.
pub fn bounded_reach_all(a: &ProbAutomaton, c: &StateSet, cp: &StateSet, n: usize, mode: Mode) -> Vec<Rational> {
    bounded_values(&Mdp::from_automaton(a), &flags(c), &flags(cp), n, mode).0
}

/// Probability of the bounded event under a finite-horizon witness, by
/// exact enumeration of the paths it generates.
pub fn replay_bounded(
    a: &ProbAutomaton,
    s: StateId,
    c: &StateSet,
    cp: &StateSet,
    n: usize,
    witness: &PolicyWitness,
) -> Rational {
    if cp.contains(s) {
        return Rational::from_integer(1.into());
    }
    if n == 0 || !c.contains(s) {
        return zero();
    }
    let Some(i) = witness.choice(s, &[n]) else { return zero() };
    a.transitions(s)[i]
        .iter()
        .fold(zero(), |acc, (t, p)| acc + p * replay_bounded(a, t, c, cp, n - 1, witness))
}

/// Optimal probability of reaching `cp` while moving through `c`, unbounded.
pub fn unbounded_reach(a: &ProbAutomaton, s: StateId, c: &StateSet, cp: &StateSet, mode: Mode) -> (Rational, PolicyWitness) {
    let (values, policy) = until_values(&Mdp::from_automaton(a), &flags(c), &flags(cp), mode);
    let choices = policy.iter().enumerate().filter_map(|(u, ch)| ch.map(|i| ((u, Vec::new()), i))).collect();
    (values[s].clone(), PolicyWitness { kind: PolicyKind::Stationary, choices })
}

/// Values of [`unbounded_reach`] for every state.
pub fn unbounded_reach_all(a: &ProbAutomaton, c: &StateSet, cp: &StateSet, mode: Mode) -> Vec<Rational> {
    until_values(&Mdp::from_automaton(a), &flags(c), &flags(cp), mode).0
}

/// Value of a stationary witness, by solving the chain it induces.
pub fn replay_unbounded(a: &ProbAutomaton, s: StateId, c: &StateSet, cp: &StateSet, witness: &PolicyWitness) -> Rational {
    let policy: Vec<Option<usize>> = a.states().map(|u| witness.choice(u, &[])).collect();
    policy_values(&Mdp::from_automaton(a), &flags(c), &flags(cp), &policy)[s].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::format::parse_model;
    use crate::model::rational::{one, ratio};

    const EX51: &str = "\
pa ex51
state s label top
state r label top
state s1 label a1
absorbing s2 label a2
state s3 label a3
absorbing s4 label a4
absorbing s5 label a5
trans s -> 0.3:s1 0.3:s2 0.4:s3
trans s -> 0.5:s1 0.4:s2 0.1:s3
trans r -> 0.3:s1 0.3:s2 0.4:s3
trans r -> 0.4:s1 0.3:s2 0.3:s3
trans r -> 0.5:s1 0.4:s2 0.1:s3
trans s1 -> 0.4:s4 0.6:s5
trans s3 -> 0.4:s4 0.6:s5
";

    fn set(a: &ProbAutomaton, names: &[&str]) -> StateSet {
        StateSet::from_indices(a.len(), names.iter().map(|n| a.state(n).unwrap()))
    }

    #[test]
    fn unbounded_from_r() {
        let a = parse_model(EX51).unwrap();
        let r = a.state("r").unwrap();
        let (v, w) = unbounded_reach(&a, r, &set(&a, &["r", "s1"]), &set(&a, &["s5"]), Mode::Sup);
        assert_eq!(v, ratio(3, 10));
        assert_eq!(w.choice(r, &[]), Some(2));
        assert_eq!(replay_unbounded(&a, r, &set(&a, &["r", "s1"]), &set(&a, &["s5"]), &w), v);
    }

    #[test]
    fn trivial_cases() {
        let a = parse_model(EX51).unwrap();
        let s = a.state("s").unwrap();
        let all = StateSet::full(a.len());
        let none = StateSet::empty(a.len());
        for mode in [Mode::Sup, Mode::Inf] {
            assert_eq!(unbounded_reach(&a, s, &all, &none, mode).0, zero());
            assert_eq!(unbounded_reach(&a, s, &none, &set(&a, &["s"]), mode).0, one());
            assert_eq!(bounded_reach(&a, s, &none, &set(&a, &["s"]), 3, mode).0, one());
            assert_eq!(bounded_reach(&a, s, &none, &set(&a, &["s5"]), 0, mode).0, zero());
        }
    }

    #[test]
    fn bounded_witness_replays() {
        let a = parse_model(EX51).unwrap();
        let r = a.state("r").unwrap();
        let c = set(&a, &["r", "s1", "s3"]);
        let cp = set(&a, &["s5"]);
        for mode in [Mode::Sup, Mode::Inf] {
            let (v, w) = bounded_reach(&a, r, &c, &cp, 2, mode);
            assert_eq!(replay_bounded(&a, r, &c, &cp, 2, &w), v);
        }
        assert_eq!(bounded_reach(&a, r, &c, &cp, 2, Mode::Sup).0, ratio(21, 50));
        assert_eq!(bounded_reach(&a, r, &c, &cp, 2, Mode::Inf).0, ratio(9, 25));
    }
}
