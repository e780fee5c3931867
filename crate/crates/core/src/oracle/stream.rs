use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::logic::ast::{PathFormula, StateFormula};
use crate::logic::fragment::FragmentTag;
use crate::model::automaton::ProbAutomaton;
use crate::model::stateset::StateSet;
use crate::oracle::equiv::nexts;
use crate::oracle::FormulaBudget;

/// Boolean combinations of literals, one per satisfaction set, smallest
/// first. Stops at the budget's operand count or once every set in the
/// lattice generated by the literals has a representative.
fn state_formulas(a: &ProbAutomaton, width: usize) -> Vec<StateFormula> {
    let n = a.len();
    let mut literals: Vec<(StateFormula, StateSet)> = Vec::new();
    for p in a.props() {
        let set = a.sat_atom(p);
        literals.push((StateFormula::atom(p.clone()), set.clone()));
        literals.push((StateFormula::atom(p.clone()).not(), set.complement()));
    }
    let mut lattice: HashSet<StateSet> = literals.iter().map(|(_, s)| s.clone()).collect();
    loop {
        let sets: Vec<StateSet> = lattice.iter().cloned().collect();
        let before = lattice.len();
        for x in &sets {
            for y in &sets {
                lattice.insert(x.union(y));
                lattice.insert(x.intersection(y));
            }
        }
        if lattice.len() == before {
            break;
        }
    }
    let trivial = |s: &StateSet| s.is_empty() || s.len() == n;
    let wanted = lattice.iter().filter(|s| !trivial(s)).count();

    let mut seen: HashSet<StateSet> = HashSet::new();
    let mut by_size: Vec<Vec<(StateFormula, StateSet)>> = vec![Vec::new()];
    let mut first = Vec::new();
    for (f, s) in literals {
        if !trivial(&s) && seen.insert(s.clone()) {
            first.push((f, s));
        }
    }
    by_size.push(first);
    let mut m = 2;
    while m <= width && seen.len() < wanted {
        let mut layer = Vec::new();
        for i in 1..=m / 2 {
            for (f, x) in &by_size[i] {
                for (g, y) in &by_size[m - i] {
                    for (h, z) in [(f.clone().and(g.clone()), x.intersection(y)), (f.clone().or(g.clone()), x.union(y))] {
                        if !trivial(&z) && seen.insert(z.clone()) {
                            layer.push((h, z));
                        }
                    }
                }
            }
        }
        by_size.push(layer);
        m += 1;
    }
    by_size.into_iter().flatten().map(|(f, _)| f).collect()
}

/// Path formulae of the budget's fragment over boolean combinations of the
/// automaton's atoms, without repeats.
pub fn enumerate_path_events(a: &ProbAutomaton, budget: &FormulaBudget) -> Result<impl Iterator<Item = PathFormula>> {
    let d = budget.effective_depth();
    let states = state_formulas(a, budget.max_boolean_size);
    let (next, bounded, unbounded, star) = match budget.fragment {
        FragmentTag::Pctl | FragmentTag::PctlSafe => (true, true, true, false),
        FragmentTag::PctlMinus | FragmentTag::PctlMinusI(_) => (true, true, false, false),
        FragmentTag::PctlNoNext => (false, false, true, false),
        FragmentTag::PctlStarMinus | FragmentTag::PctlStarMinusI(_) => (true, false, false, true),
        FragmentTag::PctlStarSafe => (true, true, true, true),
        other => return Err(Error::Fragment(format!("{other} has no event stream"))),
    };
    let mut out = Vec::new();
    if next {
        out.extend(states.iter().map(|f| PathFormula::next(PathFormula::state(f.clone()))));
    }
    let pairs = || states.iter().flat_map(|l| states.iter().map(move |r| (l, r)));
    if bounded {
        for n in 1..=d {
            out.extend(pairs().map(|(l, r)| PathFormula::bounded_until(PathFormula::state(l.clone()), PathFormula::state(r.clone()), n)));
        }
    }
    if unbounded {
        out.extend(pairs().map(|(l, r)| PathFormula::until(PathFormula::state(l.clone()), PathFormula::state(r.clone()))));
    }
    if star {
        for k in 2..=d {
            out.extend(states.iter().map(|f| nexts(k, f.clone())));
        }
        for j in 1..=d {
            for k in j + 1..=d {
                for (l, r) in pairs() {
                    let (x, y) = (nexts(j, l.clone()), nexts(k, r.clone()));
                    out.push(x.clone().and(y.clone()));
                    out.push(x.or(y));
                }
            }
        }
    }
    let mut seen = HashSet::new();
    out.retain(|p| seen.insert(p.clone()));
    Ok(out.into_iter())
}
