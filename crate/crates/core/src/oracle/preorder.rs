use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::logic::ast::{Cmp, PathFormula, StateFormula};
use crate::logic::fragment::FragmentTag;
use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::rational::Rational;
use crate::model::relation::Relation;
use crate::model::stateset::StateSet;
use crate::oracle::equiv::{label_formula, label_literal, nexts};
use crate::oracle::values::{bounded_optima, next_optima, until_optima, Role, Traces};
use crate::oracle::{FormulaBudget, EVENT_CAP, POLICY_CAP, TRACE_CAP};

/// A path event built from down-sets of one stratum.
#[derive(Clone, Debug, PartialEq, Eq)]
enum SafeEvent {
    Next(StateSet),
    Until { left: StateSet, right: StateSet, bound: Option<usize> },
    /// Down-closed set of kernel-class sequences.
    Seqs(Vec<Vec<usize>>),
}

#[derive(Clone, Debug)]
struct SafeSplit {
    event: SafeEvent,
    /// Infima at the lower and the upper state.
    low: Rational,
    high: Rational,
}

#[derive(Clone, Debug)]
struct PLevel {
    rel: Relation,
    /// Kernel class per state and one representative per class.
    kernel: Vec<usize>,
    reps: Vec<StateId>,
    deleted: BTreeMap<(StateId, StateId), SafeSplit>,
}

fn with_kernel(rel: Relation, deleted: BTreeMap<(StateId, StateId), SafeSplit>) -> PLevel {
    let n = rel.len();
    let mut kernel = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for s in 0..n {
        if kernel[s] != usize::MAX {
            continue;
        }
        for t in s..n {
            if rel.contains(s, t) && rel.contains(t, s) {
                kernel[t] = reps.len();
            }
        }
        reps.push(s);
    }
    PLevel { rel, kernel, reps, deleted }
}

/// Why `s` is not below `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Refutation {
    /// Holds at `r`, fails at `s`.
    pub formula: StateFormula,
    pub path: Option<PathFormula>,
    /// Infima of `path` at `s` and `r`.
    pub values: Option<(Rational, Rational)>,
    pub stratum: usize,
}

/// The strata of the safe logical preorder under a budget.
pub struct SafeStratification<'a> {
    a: &'a ProbAutomaton,
    budget: FormulaBudget,
    levels: Vec<PLevel>,
    stable: bool,
    formulas: RefCell<HashMap<(usize, StateId), StateFormula>>,
}

const SEQ_SETS_CAP: usize = 1 << 12;

/// Nonempty down-closed subsets of `items` under `le`, each as indices.
/// Down-closed sets generated by at most `width` maximal items.
fn down_closed(items: usize, le: &dyn Fn(usize, usize) -> bool, width: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    for k in 1..=width.min(items) {
        for gens in (0..items).combinations(k) {
            let antichain = gens.iter().all(|&p| gens.iter().all(|&q| p == q || !le(p, q)));
            if !antichain {
                continue;
            }
            let set: Vec<usize> = (0..items).filter(|&p| gens.iter().any(|&q| le(p, q))).collect();
            out.insert(set);
            if out.len() > cap {
                return Err(Error::ResourceCap { cap: "oracle-sequence-sets", limit: cap });
            }
        }
    }
    Ok(out.into_iter().collect())
}

impl<'a> SafeStratification<'a> {
    pub fn compute(a: &'a ProbAutomaton, budget: &FormulaBudget) -> Result<Self> {
        if !budget.is_safe() {
            return Err(Error::Fragment(format!("{} is not a safe fragment", budget.fragment)));
        }
        let n = a.len();
        let rel = Relation::from_pairs(
            n,
            a.states().flat_map(|s| a.states().filter(move |&r| a.label(s) == a.label(r)).map(move |r| (s, r))),
        );
        let mut strat = SafeStratification {
            a,
            budget: budget.clone(),
            levels: vec![with_kernel(rel, BTreeMap::new())],
            stable: false,
            formulas: RefCell::new(HashMap::new()),
        };
        while strat.levels.len() - 1 < budget.max_until_nesting {
            match strat.refine()? {
                Some(level) => strat.levels.push(level),
                None => {
                    strat.stable = true;
                    break;
                }
            }
        }
        Ok(strat)
    }

    /// The preorder at the last stratum.
    pub fn relation(&self) -> &Relation {
        &self.levels.last().expect("stratum 0").rel
    }

    pub fn strata(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn stable(&self) -> bool {
        self.stable
    }

    fn downsets(&self, level: &PLevel) -> Result<Vec<StateSet>> {
        let k = level.reps.len();
        if k >= 20 {
            return Err(Error::ResourceCap { cap: "oracle-events", limit: EVENT_CAP });
        }
        let n = self.a.len();
        let mut out = Vec::new();
        for mask in 1u32..(1 << k) {
            let inside = |c: usize| mask >> c & 1 == 1;
            let closed = (0..k).filter(|&c| inside(c)).all(|c| (0..k).all(|d| !level.rel.contains(level.reps[d], level.reps[c]) || inside(d)));
            if closed {
                out.push(StateSet::from_indices(n, (0..n).filter(|&s| inside(level.kernel[s]))));
            }
        }
        Ok(out)
    }

    fn events(&self, level: &PLevel) -> Result<Vec<SafeEvent>> {
        let d = self.budget.effective_depth();
        let w = self.budget.max_boolean_size;
        let ds: Vec<StateSet> =
            self.downsets(level)?.into_iter().filter(|s| level.reps.iter().filter(|&&r| s.contains(r)).count() <= w).collect();
        let mut out: Vec<SafeEvent> = ds.iter().cloned().map(SafeEvent::Next).collect();
        for bound in (1..=d).map(Some).chain([None]) {
            for left in &ds {
                for right in &ds {
                    if right.is_subset(left) && right != left {
                        out.push(SafeEvent::Until { left: left.clone(), right: right.clone(), bound });
                    }
                }
            }
        }
        if out.len() > EVENT_CAP {
            return Err(Error::ResourceCap { cap: "oracle-events", limit: EVENT_CAP });
        }
        Ok(out)
    }

    fn infima(&self, e: &SafeEvent) -> Result<Vec<Rational>> {
        let a = self.a;
        let roles = |left: &StateSet, right: &StateSet| -> Vec<Role> {
            a.states()
                .map(|s| {
                    if right.contains(s) {
                        Role::Target
                    } else if left.contains(s) {
                        Role::Mid
                    } else {
                        Role::Out
                    }
                })
                .collect()
        };
        let opt = match e {
            SafeEvent::Next(set) => next_optima(a, set),
            SafeEvent::Until { left, right, bound: Some(n) } => bounded_optima(a, &roles(left, right), *n),
            SafeEvent::Until { left, right, bound: None } => until_optima(a, &roles(left, right), POLICY_CAP)?,
            SafeEvent::Seqs(_) => unreachable!("sequence events are evaluated on traces"),
        };
        Ok(opt.into_iter().map(|o| o.inf).collect())
    }

    fn refine(&self) -> Result<Option<PLevel>> {
        let level = self.levels.last().expect("stratum 0");
        let pairs: Vec<(StateId, StateId)> = level.rel.pairs().filter(|(s, r)| s != r).collect();
        if pairs.is_empty() {
            return Ok(None);
        }
        let mut events = Vec::new();
        let mut infs = Vec::new();
        for e in self.events(level)? {
            infs.push(self.infima(&e)?);
            events.push(e);
        }
        if self.budget.fragment == FragmentTag::PctlStarSafe {
            let tr = Traces::compute(self.a, &level.kernel, self.budget.effective_depth() + 1, TRACE_CAP)?;
            let live = tr.live();
            let class_le = |c: usize, d: usize| level.rel.contains(level.reps[c], level.reps[d]);
            let le = |p: usize, q: usize| live[p].iter().zip(&live[q]).all(|(&c, &d)| class_le(c, d));
            for set in down_closed(live.len(), &le, self.budget.max_boolean_size, SEQ_SETS_CAP)? {
                let seqs: Vec<Vec<usize>> = set.iter().map(|&i| live[i].clone()).collect();
                infs.push(self.a.states().map(|s| tr.optima(s, |q| seqs.iter().any(|p| p == q)).inf).collect());
                events.push(SafeEvent::Seqs(seqs));
            }
        }
        let mut rel = level.rel.clone();
        let mut deleted = BTreeMap::new();
        for (s, r) in pairs {
            if let Some(e) = infs.iter().position(|v| v[s] < v[r]) {
                rel.remove(s, r);
                deleted.insert((s, r), SafeSplit { event: events[e].clone(), low: infs[e][s].clone(), high: infs[e][r].clone() });
            }
        }
        if deleted.is_empty() {
            return Ok(None);
        }
        Ok(Some(with_kernel(rel, deleted)))
    }

    /// A safe formula whose satisfaction set is the down-set of `x` at stratum `t`.
    pub fn down_formula(&self, t: usize, x: StateId) -> StateFormula {
        if let Some(f) = self.formulas.borrow().get(&(t, x)) {
            return f.clone();
        }
        let f = if t == 0 {
            label_formula(self.a, x)
        } else {
            let mut parts: BTreeSet<StateFormula> = BTreeSet::new();
            for ((_, hi), split) in &self.levels[t].deleted {
                if *hi == x {
                    parts.insert(StateFormula::prob(Cmp::Ge, split.high.clone(), self.event_path(t - 1, &split.event)));
                }
            }
            parts.into_iter().fold(self.down_formula(t - 1, x), StateFormula::and)
        };
        self.formulas.borrow_mut().insert((t, x), f.clone());
        f
    }

    fn set_formula(&self, t: usize, set: &StateSet) -> StateFormula {
        let level = &self.levels[t];
        StateFormula::any(level.reps.iter().filter(|&&r| set.contains(r)).map(|&r| self.down_formula(t, r)))
    }

    fn event_path(&self, t: usize, e: &SafeEvent) -> PathFormula {
        match e {
            SafeEvent::Next(set) => PathFormula::next(PathFormula::state(self.set_formula(t, set))),
            SafeEvent::Until { left, right, bound } => {
                let l = PathFormula::state(self.set_formula(t, left));
                let r = PathFormula::state(self.set_formula(t, right));
                match bound {
                    Some(n) => PathFormula::bounded_until(l, r, *n),
                    None => PathFormula::until(l, r),
                }
            }
            SafeEvent::Seqs(set) => {
                let reps = &self.levels[t].reps;
                set.iter()
                    .map(|seq| {
                        seq.iter()
                            .enumerate()
                            .map(|(k, &c)| nexts(k, self.down_formula(t, reps[c])))
                            .reduce(PathFormula::and)
                            .expect("nonempty sequence")
                    })
                    .reduce(PathFormula::or)
                    .expect("nonempty event")
            }
        }
    }

    /// Why `s` is not below `r`, if it is not.
    pub fn refute(&self, s: StateId, r: StateId) -> Option<Refutation> {
        let t = self.levels.iter().position(|l| !l.rel.contains(s, r))?;
        if t == 0 {
            let formula = label_literal(self.a, r, s).expect("labels differ");
            return Some(Refutation { formula, path: None, values: None, stratum: 0 });
        }
        let split = &self.levels[t].deleted[&(s, r)];
        let psi = self.event_path(t - 1, &split.event);
        Some(Refutation {
            formula: StateFormula::prob(Cmp::Ge, split.high.clone(), psi.clone()),
            path: Some(psi),
            values: Some((split.low.clone(), split.high.clone())),
            stratum: t,
        })
    }
}
