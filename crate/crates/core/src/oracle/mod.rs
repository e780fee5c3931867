//! Brute-force logical equivalence and safe preorder.
//!
//! The oracle never consults the relation checkers or the `reach` engines.
//! It grows the state-formula alphabet in strata: stratum 0 is the label
//! partition, and every later stratum splits classes by the exact optima
//! of the fragment's path events over unions of the previous classes.
//! Every reported formula is re-checked with the model checker first.

mod equiv;
mod preorder;
mod stream;
pub mod values;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::logic::ast::StateFormula;
use crate::logic::check::check;
use crate::logic::fragment::FragmentTag;
use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::relation::Relation;
use crate::model::stateset::StateSet;

pub use equiv::{Distinction, Stratification};
pub use preorder::{SafeStratification, Refutation};
pub use stream::enumerate_path_events;
pub use values::{bounded_reach_values, Optima};

/// Stationary policies tried per until event.
pub const POLICY_CAP: usize = 1 << 12;
/// Trace distributions kept per state.
pub const TRACE_CAP: usize = 1 << 14;
/// Live sequences whose subsets are enumerated for one pair.
pub const LIVE_CAP: usize = 22;
/// Path events per stratum.
pub const EVENT_CAP: usize = 1 << 16;

/// Bounds under which formulae are enumerated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaBudget {
    pub fragment: FragmentTag,
    /// Largest `X` nesting or until bound; indexed tags override it.
    pub max_depth: usize,
    /// Strata of nested probability operators above the labels.
    pub max_until_nesting: usize,
    /// Largest number of operands joined in one state formula.
    pub max_boolean_size: usize,
}

impl FormulaBudget {
    pub fn new(fragment: FragmentTag) -> Self {
        let max_depth = match fragment {
            FragmentTag::PctlMinusI(i) | FragmentTag::PctlStarMinusI(i) => i,
            _ => 1,
        };
        FormulaBudget { fragment, max_depth, max_until_nesting: usize::MAX, max_boolean_size: usize::MAX }
    }

    pub fn depth(mut self, d: usize) -> Self {
        self.max_depth = d;
        self
    }

    pub fn nesting(mut self, n: usize) -> Self {
        self.max_until_nesting = n;
        self
    }

    pub fn boolean_size(mut self, b: usize) -> Self {
        self.max_boolean_size = b;
        self
    }

    pub fn effective_depth(&self) -> usize {
        match self.fragment {
            FragmentTag::PctlMinusI(i) | FragmentTag::PctlStarMinusI(i) => i,
            _ => self.max_depth,
        }
    }

    pub fn is_safe(&self) -> bool {
        matches!(self.fragment, FragmentTag::PctlSafe | FragmentTag::PctlStarSafe)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    /// No formula within the budget tells the states apart.
    Equivalent { strata: usize, stable: bool },
    Distinguished(Distinction),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PreorderVerdict {
    /// Every formula within the budget that holds at `r` holds at `s`.
    Below { strata: usize, stable: bool },
    Refuted(Refutation),
}

fn verify(a: &ProbAutomaton, phi: &StateFormula, yes: StateId, no: StateId) -> Result<()> {
    let holds = check(a, phi)?;
    if holds[yes] && !holds[no] {
        Ok(())
    } else {
        Err(Error::Unverified(phi.to_string()))
    }
}

/// Compares the optima of every path event within the budget at `s` and `r`.
/// A returned formula holds at `s` and fails at `r`.
pub fn logical_equiv(a: &ProbAutomaton, s: StateId, r: StateId, budget: &FormulaBudget) -> Result<Equivalence> {
    let strat = Stratification::compute(a, budget)?;
    match strat.distinguish(s, r) {
        None => Ok(Equivalence::Equivalent { strata: strat.strata(), stable: strat.stable() }),
        Some(d) => {
            verify(a, &d.formula, s, r)?;
            Ok(Equivalence::Distinguished(d))
        }
    }
}

/// Is `s` below `r`: does every safe formula true at `r` hold at `s`?
/// A refuting formula holds at `r` and fails at `s`.
pub fn logical_preorder(a: &ProbAutomaton, s: StateId, r: StateId, budget: &FormulaBudget) -> Result<PreorderVerdict> {
    let strat = SafeStratification::compute(a, budget)?;
    match strat.refute(s, r) {
        None => Ok(PreorderVerdict::Below { strata: strat.strata(), stable: strat.stable() }),
        Some(f) => {
            verify(a, &f.formula, r, s)?;
            Ok(PreorderVerdict::Refuted(f))
        }
    }
}

/// A formula whose satisfaction set is `target`, assembled from pairwise
/// distinguishers between the classes of `classes`.
pub fn distinguishing_state_formula(
    a: &ProbAutomaton,
    classes: &Relation,
    target: &StateSet,
    budget: &FormulaBudget,
) -> Result<StateFormula> {
    let class_of = classes.classes().ok_or_else(|| Error::Query("relation is not an equivalence".into()))?;
    let k = class_of.iter().max().map_or(0, |m| m + 1);
    let reps: Vec<StateId> = (0..k).map(|c| class_of.iter().position(|&x| x == c).expect("class has a member")).collect();
    for s in a.states() {
        if target.contains(s) != target.contains(reps[class_of[s]]) {
            return Err(Error::Query("target is not a union of classes".into()));
        }
    }
    let strat = Stratification::compute(a, budget)?;
    let mut disjuncts = Vec::new();
    for (i, &x) in reps.iter().enumerate() {
        if !target.contains(x) {
            continue;
        }
        let mut conj: BTreeSet<StateFormula> = BTreeSet::new();
        for (j, &y) in reps.iter().enumerate() {
            if i == j {
                continue;
            }
            let d = strat.distinguish(x, y).ok_or_else(|| {
                Error::Inseparable(a.state_name(x).to_string(), a.state_name(y).to_string())
            })?;
            conj.insert(d.formula);
        }
        disjuncts.push(StateFormula::all(conj));
    }
    let phi = StateFormula::any(disjuncts);
    let holds = check(a, &phi)?;
    if a.states().any(|s| holds[s] != target.contains(s)) {
        return Err(Error::Unverified(phi.to_string()));
    }
    Ok(phi)
}
