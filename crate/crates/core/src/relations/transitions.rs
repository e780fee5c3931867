//! Relations matched transition by transition: combined and branching
//! bisimulation, and strong probabilistic simulation.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::combine::{can_branching_match, can_combine_match, combined_weight_match};
use crate::model::relation::Relation;
use crate::relations::{Outcome, Witness, WitnessItem};

/// First transition of `s` that `r` cannot match under `class_of`.
type Matcher<'a> = dyn Fn(StateId, StateId, &[usize]) -> Option<usize> + 'a;

fn refine(a: &ProbAutomaton, unmatched: &Matcher<'_>) -> Outcome {
    let mut class_of = a.label_classes();
    let mut witnesses = BTreeMap::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let k = class_of.iter().max().map_or(0, |m| m + 1);
        let mut next = vec![0; a.len()];
        let mut ids = 0;
        let mut changed = false;
        for c in 0..k {
            let members: Vec<StateId> = a.states().filter(|&s| class_of[s] == c).collect();
            // A state joins a group only if it matches every member both ways.
            // For combined matching this is hull equality; branching matching
            // need not be transitive, so the grouping is greedy there.
            let mut groups: Vec<Vec<StateId>> = Vec::new();
            for &s in &members {
                let fits = |g: &Vec<StateId>| g.iter().all(|&t| unmatched(s, t, &class_of).is_none() && unmatched(t, s, &class_of).is_none());
                match groups.iter_mut().find(|g| fits(g)) {
                    Some(g) => g.push(s),
                    None => groups.push(vec![s]),
                }
            }
            if groups.len() > 1 {
                changed = true;
                for (gi, g) in groups.iter().enumerate() {
                    for h in &groups[gi + 1..] {
                        for &x in g {
                            for &y in h {
                                let w = match (unmatched(x, y, &class_of), unmatched(y, x, &class_of)) {
                                    (Some(index), _) => WitnessItem::Transition { state: x, index },
                                    (None, Some(index)) => WitnessItem::Transition { state: y, index },
                                    // Split by the grouping alone; no transition to show.
                                    (None, None) => continue,
                                };
                                witnesses.entry((x, y)).or_insert(Witness { item: w, left: x, right: y, values: None });
                            }
                        }
                    }
                }
            }
            for g in groups {
                for s in g {
                    next[s] = ids;
                }
                ids += 1;
            }
        }
        class_of = next;
        if !changed {
            return Outcome { relation: Relation::from_classes(&class_of), witnesses, caps_hit: BTreeSet::new(), rounds };
        }
    }
}

/// Coarsest equivalence in which every transition has a combined match.
pub fn strong_prob_bisim(a: &ProbAutomaton) -> Outcome {
    refine(a, &|s, r, class_of| {
        let k = class_of.iter().max().map_or(0, |m| m + 1);
        a.transitions(s).iter().position(|mu| !can_combine_match(a, r, &mu.project(class_of, k), class_of))
    })
}

/// As [`strong_prob_bisim`], matching against branching combined
/// transitions derived to `depth`.
pub fn branching_prob_bisim(a: &ProbAutomaton, depth: usize) -> Outcome {
    let mut out = refine(a, &|s, r, class_of| {
        let k = class_of.iter().max().map_or(0, |m| m + 1);
        a.transitions(s).iter().position(|mu| !can_branching_match(a, r, &mu.project(class_of, k), class_of, depth))
    });
    out.caps_hit.insert(format!("branching-depth={depth}"));
    out
}

/// Greatest simulation where each transition of `s` is dominated, through
/// a weight function, by a combined transition of `r`.
pub fn strong_prob_sim(a: &ProbAutomaton) -> Outcome {
    let mut rel = Relation::from_classes(&a.label_classes());
    let mut witnesses = BTreeMap::new();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut dead = Vec::new();
        for (s, r) in rel.pairs().filter(|&(s, r)| s != r) {
            let bad = a.transitions(s).iter().position(|mu| combined_weight_match(mu, a.transitions(r), &rel).is_none());
            if let Some(index) = bad {
                dead.push((s, r));
                witnesses.insert((s, r), Witness { item: WitnessItem::Transition { state: s, index }, left: s, right: r, values: None });
            }
        }
        if dead.is_empty() {
            return Outcome { relation: rel, witnesses, caps_hit: BTreeSet::new(), rounds };
        }
        for (s, r) in dead {
            rel.remove(s, r);
        }
    }
}
