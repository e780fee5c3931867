//! Pair deletion to a greatest fixed point.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::relation::Relation;
use crate::reach::mdp::Mdp;
use crate::relations::events::{Batch, Ctx, Family, Limits};
use crate::relations::{Caps, Direction, Outcome, Witness, WitnessItem};

pub(crate) struct Engine<'a> {
    a: &'a ProbAutomaton,
    mdp: Mdp,
    caps: &'a Caps,
    caps_hit: BTreeSet<String>,
    witnesses: BTreeMap<(StateId, StateId), Witness>,
    rounds: usize,
}

impl<'a> Engine<'a> {
    pub fn new(a: &'a ProbAutomaton, caps: &'a Caps) -> Self {
        Engine {
            a,
            mdp: Mdp::from_automaton(a),
            caps,
            caps_hit: BTreeSet::new(),
            witnesses: BTreeMap::new(),
            rounds: 0,
        }
    }

    pub fn label_preorder(&self) -> Relation {
        Relation::from_classes(&self.a.label_classes())
    }

    pub fn finish(self, relation: Relation) -> Outcome {
        Outcome { relation, witnesses: self.witnesses, caps_hit: self.caps_hit, rounds: self.rounds }
    }

    fn batch(&mut self, fam: &Family, ctx: &Ctx, sources: &[StateId]) -> Result<Batch> {
        let limits = Limits { events: self.caps.events, stutter_nodes: self.caps.stutter_nodes };
        let batch = fam.evaluate(self.a, &self.mdp, ctx, sources, limits)?;
        self.caps_hit.extend(batch.caps_hit.iter().map(|c| c.to_string()));
        Ok(batch)
    }

    fn record(&mut self, ctx: &Ctx, batch: &Batch, e: usize, (x, s): (usize, StateId), (y, r): (usize, StateId)) {
        self.witnesses.entry((s, r)).or_insert_with(|| Witness {
            item: WitnessItem::Event(batch.events[e].resolve(ctx)),
            left: s,
            right: r,
            values: Some((batch.values[e][x].clone(), batch.values[e][y].clone())),
        });
    }

    pub fn start_bisim(&mut self, dir: Direction, fam: &Family) -> Result<Relation> {
        let rel = self.label_preorder();
        self.refine_bisim(rel, dir, fam)
    }

    pub fn refine_bisim(&mut self, rel: Relation, dir: Direction, fam: &Family) -> Result<Relation> {
        match (dir, rel.classes()) {
            (Direction::AtLeast | Direction::Both, Some(class_of)) => self.refine_partition(class_of, dir, fam),
            _ => self.refine_pairs(rel, dir, fam, true),
        }
    }

    pub fn refine_preorder(&mut self, rel: Relation, dir: Direction, fam: &Family) -> Result<Relation> {
        self.refine_pairs(rel, dir, fam, false)
    }

    /// Splits blocks by value vectors. Valid when mutual matching is an
    /// equivalence on value pairs, as it is for at-least and both.
    fn refine_partition(&mut self, mut class_of: Vec<usize>, dir: Direction, fam: &Family) -> Result<Relation> {
        let agree = |batch: &Batch, x: usize, y: usize| {
            batch.values.iter().position(|v| !(dir.matches(&v[x], &v[y]) && dir.matches(&v[y], &v[x])))
        };
        loop {
            self.rounds += 1;
            let ctx = Ctx::from_partition(&class_of);
            let mut next = vec![0; class_of.len()];
            let mut ids = 0;
            let mut changed = false;
            for block in &ctx.classes {
                let members: Vec<StateId> = block.iter().collect();
                let groups: Vec<Vec<usize>> = if members.len() == 1 {
                    vec![vec![0]]
                } else {
                    let batch = self.batch(fam, &ctx, &members)?;
                    let mut groups: Vec<Vec<usize>> = Vec::new();
                    for i in 0..members.len() {
                        match groups.iter_mut().find(|g| agree(&batch, g[0], i).is_none()) {
                            Some(g) => g.push(i),
                            None => groups.push(vec![i]),
                        }
                    }
                    if groups.len() > 1 {
                        changed = true;
                        for (gi, g) in groups.iter().enumerate() {
                            for h in &groups[gi + 1..] {
                                for &x in g {
                                    for &y in h {
                                        let e = agree(&batch, x, y).expect("groups disagree");
                                        self.record(&ctx, &batch, e, (x, members[x]), (y, members[y]));
                                    }
                                }
                            }
                        }
                    }
                    groups
                };
                for g in groups {
                    for i in g {
                        next[members[i]] = ids;
                    }
                    ids += 1;
                }
            }
            class_of = next;
            if !changed {
                return Ok(Relation::from_classes(&class_of));
            }
        }
    }

    /// Deletes pairs one at a time; down-sets come from the transitive
    /// closure of the current relation.
    fn refine_pairs(&mut self, mut rel: Relation, dir: Direction, fam: &Family, symmetric: bool) -> Result<Relation> {
        loop {
            self.rounds += 1;
            let ctx = Ctx::from_relation(&rel);
            let pairs: Vec<(StateId, StateId)> = rel.pairs().filter(|&(s, r)| s != r && (!symmetric || s < r)).collect();
            let mut dead = Vec::new();
            for (s, r) in pairs {
                let batch = self.batch(fam, &ctx, &[s, r])?;
                let fail = batch
                    .values
                    .iter()
                    .position(|v| !dir.matches(&v[0], &v[1]) || (symmetric && !dir.matches(&v[1], &v[0])));
                if let Some(e) = fail {
                    self.record(&ctx, &batch, e, (0, s), (1, r));
                    dead.push((s, r));
                }
            }
            if dead.is_empty() {
                return Ok(rel);
            }
            for (s, r) in dead {
                rel.remove(s, r);
                if symmetric {
                    rel.remove(r, s);
                }
            }
        }
    }
}
