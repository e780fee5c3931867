//! Optimal probabilities of finite cone patterns.

use std::collections::{BTreeMap, HashMap};

use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::rational::{one, zero, Rational};
use crate::model::stateset::StateSet;
use crate::reach::{PolicyKind, PolicyWitness, Mode};

/// A prefix-free set of nonempty sequences of state sets.
///
/// A path matches a pattern when its `j`-th state lies in the pattern's
/// `j`-th set for every position of the pattern.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternSet {
    patterns: Vec<Vec<StateSet>>,
}

/// `p` matches no path that `q` does not already match.
fn subsumed_by(p: &[StateSet], q: &[StateSet]) -> bool {
    q.len() <= p.len() && q.iter().zip(p).all(|(qs, ps)| ps.is_subset(qs))
}

impl PatternSet {
    /// Builds a pattern set, dropping empty and duplicate patterns and any
    /// pattern whose cone is contained in another's (in particular, every
    /// pattern extending another one).
    pub fn new(patterns: impl IntoIterator<Item = Vec<StateSet>>) -> Self {
        let mut all: Vec<Vec<StateSet>> = patterns.into_iter().filter(|p| !p.is_empty()).collect();
        all.sort();
        all.dedup();
        let keep: Vec<bool> = (0..all.len())
            .map(|i| !(0..all.len()).any(|j| j != i && subsumed_by(&all[i], &all[j]) && (!subsumed_by(&all[j], &all[i]) || j < i)))
            .collect();
        let patterns = all.into_iter().zip(keep).filter_map(|(p, k)| k.then_some(p)).collect();
        PatternSet { patterns }
    }

    pub fn single(pattern: Vec<StateSet>) -> Self {
        Self::new([pattern])
    }

    pub fn patterns(&self) -> &[Vec<StateSet>] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Length of the longest pattern.
    pub fn max_len(&self) -> usize {
        self.patterns.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Whether a finite path matches some pattern.
    pub fn matches(&self, path: &[StateId]) -> bool {
        self.patterns
            .iter()
            .any(|p| p.len() <= path.len() && p.iter().zip(path).all(|(set, &u)| set.contains(u)))
    }
}

enum Step {
    Accept,
    Dead,
    Alive(Vec<usize>),
}

fn advance(pats: &PatternSet, alive: &[usize], pos: usize, v: StateId) -> Step {
    let mut next = Vec::new();
    for &p in alive {
        let pat = &pats.patterns[p];
        if pat[pos].contains(v) {
            if pat.len() == pos + 1 {
                return Step::Accept;
            }
            next.push(p);
        }
    }
    if next.is_empty() {
        Step::Dead
    } else {
        Step::Alive(next)
    }
}

type Key = (StateId, usize, Vec<usize>);

struct Solver<'a> {
    a: &'a ProbAutomaton,
    pats: &'a PatternSet,
    mode: Mode,
    memo: HashMap<Key, (Rational, Option<usize>)>,
}

impl Solver<'_> {
    fn outcome(&mut self, v: StateId, pos: usize, alive: &[usize]) -> Rational {
        match advance(self.pats, alive, pos, v) {
            Step::Accept => one(),
            Step::Dead => zero(),
            Step::Alive(next) => self.value(v, pos, next),
        }
    }

    /// Value at `u`, matched at position `pos` by the patterns in `alive`,
    /// all of which still need further positions.
    fn value(&mut self, u: StateId, pos: usize, alive: Vec<usize>) -> Rational {
        let key = (u, pos, alive);
        if let Some((v, _)) = self.memo.get(&key) {
            return v.clone();
        }
        let mut best: Option<(Rational, usize)> = None;
        for (i, mu) in self.a.transitions(u).iter().enumerate() {
            let mut v = zero();
            for (t, p) in mu.iter() {
                v += p * self.outcome(t, pos + 1, &key.2);
            }
            let take = match &best {
                None => true,
                Some((b, _)) => match self.mode {
                    Mode::Sup => v > *b,
                    Mode::Inf => v < *b,
                },
            };
            if take {
                best = Some((v, i));
            }
        }
        let (v, ch) = match best {
            Some((v, i)) => (v, Some(i)),
            None => (zero(), None),
        };
        self.memo.insert(key, (v.clone(), ch));
        v
    }
}

/// Optimal probability that a run from `s` matches some pattern.
///
/// The witness memory is `[position, alive pattern indices...]`.
pub fn pattern_opt(a: &ProbAutomaton, s: StateId, pats: &PatternSet, mode: Mode) -> (Rational, PolicyWitness) {
    let mut solver = Solver { a, pats, mode, memo: HashMap::new() };
    let all: Vec<usize> = (0..pats.len()).collect();
    let value = solver.outcome(s, 0, &all);
    let choices: BTreeMap<(StateId, Vec<usize>), usize> = solver
        .memo
        .into_iter()
        .filter_map(|((u, pos, alive), (_, ch))| {
            let mut mem = vec![pos];
            mem.extend(alive);
            ch.map(|i| ((u, mem), i))
        })
        .collect();
    (value, PolicyWitness { kind: PolicyKind::Memory, choices })
}

/// [`pattern_opt`] values for every state, sharing one memo table.
pub fn pattern_values_all(a: &ProbAutomaton, pats: &PatternSet, mode: Mode) -> Vec<Rational> {
    let mut solver = Solver { a, pats, mode, memo: HashMap::new() };
    let all: Vec<usize> = (0..pats.len()).collect();
    a.states().map(|s| solver.outcome(s, 0, &all)).collect()
}

/// Probability of the pattern event under a [`pattern_opt`] witness,
/// by exact enumeration of the paths it generates.
pub fn replay_pattern(a: &ProbAutomaton, s: StateId, pats: &PatternSet, witness: &PolicyWitness) -> Rational {
    fn go(a: &ProbAutomaton, pats: &PatternSet, w: &PolicyWitness, v: StateId, pos: usize, alive: &[usize]) -> Rational {
        match advance(pats, alive, pos, v) {
            Step::Accept => one(),
            Step::Dead => zero(),
            Step::Alive(next) => {
                let mut mem = vec![pos];
                mem.extend(&next);
                let Some(i) = w.choice(v, &mem) else { return zero() };
                a.transitions(v)[i].iter().fold(zero(), |acc, (t, p)| acc + p * go(a, pats, w, t, pos + 1, &next))
            }
        }
    }
    let all: Vec<usize> = (0..pats.len()).collect();
    go(a, pats, witness, s, 0, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::format::parse_model;
    use crate::model::rational::ratio;
    use crate::reach::bounded_reach;

    const EX35: &str = "\
pa ex35
state s label top
state r label top
state s1 label a1
state s2 label a2
state s3 label a3
absorbing s4 label a4
trans s -> 0.3:s1 0.3:s2 0.4:s3
trans s -> 0.5:s1 0.4:s2 0.1:s3
trans r -> 0.3:s1 0.3:s2 0.4:s3
trans r -> 0.4:s1 0.3:s2 0.3:s3
trans r -> 0.5:s1 0.4:s2 0.1:s3
trans s1 -> 0.6:s1 0.4:s4
trans s2 -> 1:s4
trans s3 -> 0.5:s3 0.5:s4
";

    fn set(a: &ProbAutomaton, names: &[&str]) -> StateSet {
        StateSet::from_indices(a.len(), names.iter().map(|n| a.state(n).unwrap()))
    }

    #[test]
    fn depth_two_pattern_values() {
        let a = parse_model(EX35).unwrap();
        let alpha = set(&a, &["s1", "s3"]);
        let pats = PatternSet::single(vec![StateSet::full(a.len()), alpha.clone(), alpha]);
        let s = a.state("s").unwrap();
        let r = a.state("r").unwrap();
        let (vs, ws) = pattern_opt(&a, s, &pats, Mode::Sup);
        let (vr, wr) = pattern_opt(&a, r, &pats, Mode::Sup);
        assert_eq!(vs, ratio(19, 50));
        assert_eq!(vr, ratio(39, 100));
        assert_eq!(replay_pattern(&a, s, &pats, &ws), vs);
        assert_eq!(replay_pattern(&a, r, &pats, &wr), vr);
        assert_eq!(pattern_values_all(&a, &pats, Mode::Sup)[r], vr);
    }

    #[test]
    fn singleton_pattern_is_certain() {
        let a = parse_model(EX35).unwrap();
        let s = a.state("s").unwrap();
        let pats = PatternSet::single(vec![set(&a, &["s"])]);
        assert_eq!(pattern_opt(&a, s, &pats, Mode::Inf).0, one());
        assert_eq!(pattern_opt(&a, a.state("r").unwrap(), &pats, Mode::Sup).0, zero());
    }

    #[test]
    fn pruning_removes_extensions() {
        let n = 3;
        let x = StateSet::from_indices(n, [0]);
        let y = StateSet::from_indices(n, [1]);
        let ps = PatternSet::new([vec![x.clone()], vec![x.clone(), y.clone()], vec![y.clone()], vec![y]]);
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.max_len(), 1);
        let wide = StateSet::from_indices(n, [0, 1]);
        let ps = PatternSet::new([vec![x.clone(), x.clone()], vec![wide, x]]);
        assert_eq!(ps.len(), 1);
    }

    #[test]
    fn exact_step_decomposition_matches_bounded_reach() {
        let a = parse_model(EX35).unwrap();
        let c = set(&a, &["s", "r", "s1", "s3"]);
        let cp = set(&a, &["s4"]);
        let stay = c.difference(&cp);
        for j in 0..4 {
            let pats = PatternSet::new((0..=j).map(|k| {
                let mut p = vec![stay.clone(); k];
                p.push(cp.clone());
                p
            }));
            for u in a.states() {
                for mode in [Mode::Sup, Mode::Inf] {
                    assert_eq!(pattern_opt(&a, u, &pats, mode).0, bounded_reach(&a, u, &c, &cp, j, mode).0);
                }
            }
        }
    }
}
