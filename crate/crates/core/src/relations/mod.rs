//! Greatest-fixed-point checkers for the bisimulation and simulation catalog.
//!
//! Every checker starts from label compatibility and deletes pairs until
//! the defining clauses hold. Equivalences whose clause is itself an
//! equivalence on value vectors are refined as partitions; everything else
//! (simulations, and bisimulations under the at-most direction) is refined
//! pair by pair. Each deleted pair keeps the item that separated it.

mod engine;
pub mod events;
mod report;
mod transitions;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::relation::Relation;
use crate::reach::stutter::DEFAULT_NODE_CAP;

pub use events::{Event, Values};
pub use transitions::{branching_prob_bisim, strong_prob_bisim, strong_prob_sim};

use engine::Engine;
use events::Family;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationName {
    StrongProbBisim,
    BranchingProbBisim,
    Strong1,
    StrongBranchingI,
    StrongI,
    WeakBranchingBisim,
    WeakBisim,
    StrongProbSim,
    BranchingSimI,
    SimI,
    WeakBranchingSim,
    WeakSim,
}

impl RelationName {
    pub const ALL: [RelationName; 12] = [
        RelationName::StrongProbBisim,
        RelationName::BranchingProbBisim,
        RelationName::Strong1,
        RelationName::StrongBranchingI,
        RelationName::StrongI,
        RelationName::WeakBranchingBisim,
        RelationName::WeakBisim,
        RelationName::StrongProbSim,
        RelationName::BranchingSimI,
        RelationName::SimI,
        RelationName::WeakBranchingSim,
        RelationName::WeakSim,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RelationName::StrongProbBisim => "strong-prob-bisim",
            RelationName::BranchingProbBisim => "branching-prob-bisim",
            RelationName::Strong1 => "strong-1",
            RelationName::StrongBranchingI => "strong-branching-i",
            RelationName::StrongI => "strong-i",
            RelationName::WeakBranchingBisim => "weak-branching-bisim",
            RelationName::WeakBisim => "weak-bisim",
            RelationName::StrongProbSim => "strong-prob-sim",
            RelationName::BranchingSimI => "branching-sim-i",
            RelationName::SimI => "sim-i",
            RelationName::WeakBranchingSim => "weak-branching-sim",
            RelationName::WeakSim => "weak-sim",
        }
    }

    /// Indexed by a depth `i`.
    pub fn needs_depth(self) -> bool {
        matches!(self, RelationName::StrongBranchingI | RelationName::StrongI | RelationName::BranchingSimI | RelationName::SimI)
    }

    pub fn is_simulation(self) -> bool {
        matches!(
            self,
            RelationName::StrongProbSim
                | RelationName::BranchingSimI
                | RelationName::SimI
                | RelationName::WeakBranchingSim
                | RelationName::WeakSim
        )
    }
}

impl fmt::Display for RelationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RelationName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Query(format!("unknown relation `{s}`")))
    }
}

/// How one side's optimal value must be matched by the other's.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// A positive supremum at `s` is reached or exceeded at `r`.
    AtLeast,
    /// When `s` can give positive probability, `r` can do no better than
    /// the infimum at `s`.
    AtMost,
    /// Both infimum and supremum agree.
    Both,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::AtLeast => "at-least",
            Direction::AtMost => "at-most",
            Direction::Both => "both",
        }
    }

    /// Does `r` match `s` on one event?
    pub fn matches(self, s: &Values, r: &Values) -> bool {
        use num_traits::Zero;
        match self {
            Direction::AtLeast => s.sup.is_zero() || r.sup >= s.sup,
            Direction::AtMost => s.sup.is_zero() || r.inf <= s.inf,
            Direction::Both => s == r,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "at-least" | "match-at-least" | "ge" => Ok(Direction::AtLeast),
            "at-most" | "match-at-most" | "le" => Ok(Direction::AtMost),
            "both" => Ok(Direction::Both),
            _ => Err(Error::Query(format!("unknown direction `{s}`"))),
        }
    }
}

/// Enumeration limits. Hitting one never fails a check; it is recorded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Down-sets materialized by [`downsets`].
    pub downsets: usize,
    /// Events per block (or pair) per refinement round.
    pub events: usize,
    /// Longest stuttering trace; `None` is the class count plus one.
    pub pattern_length: Option<usize>,
    /// Largest antichain of stuttering traces.
    pub antichain_size: usize,
    /// Derivation depth of branching transitions; `None` is the state count.
    pub branching_depth: Option<usize>,
    /// Use only principal down-sets for one-step clauses.
    pub principal_only: bool,
    pub stutter_nodes: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            downsets: 1 << 16,
            events: 1 << 14,
            pattern_length: None,
            antichain_size: 4,
            branching_depth: None,
            principal_only: false,
            stutter_nodes: DEFAULT_NODE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationQuery {
    pub name: RelationName,
    pub depth: Option<usize>,
    /// `None` picks the default: at-least for bisimulations, at-most for simulations.
    pub direction: Option<Direction>,
    pub caps: Caps,
}

impl RelationQuery {
    pub fn new(name: RelationName) -> Self {
        RelationQuery { name, depth: None, direction: None, caps: Caps::default() }
    }

    pub fn depth(mut self, i: usize) -> Self {
        self.depth = Some(i);
        self
    }

    pub fn direction(mut self, d: Direction) -> Self {
        self.direction = Some(d);
        self
    }

    pub fn caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }

    pub fn effective_direction(&self) -> Direction {
        self.direction.unwrap_or(if self.name.is_simulation() { Direction::AtMost } else { Direction::AtLeast })
    }

    pub fn validate(&self) -> Result<()> {
        match (self.name.needs_depth(), self.depth) {
            (true, None) => Err(Error::Query(format!("`{}` needs a depth", self.name))),
            (true, Some(0)) => Err(Error::Query("depth must be at least 1".into())),
            (false, Some(_)) if self.name != RelationName::BranchingProbBisim => {
                Err(Error::Query(format!("`{}` takes no depth", self.name)))
            }
            _ => Ok(()),
        }
    }
}

/// What separated a deleted pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WitnessItem {
    /// The labels differ.
    Labels,
    /// Transition `index` of `state` has no admissible match on the other side.
    Transition { state: StateId, index: usize },
    /// An event whose optimal values violate the clause.
    Event(Event),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub item: WitnessItem,
    pub left: StateId,
    pub right: StateId,
    /// Values of the event at `left` and `right`.
    pub values: Option<(Values, Values)>,
}

impl Witness {
    fn swapped(&self) -> Witness {
        Witness {
            item: self.item.clone(),
            left: self.right,
            right: self.left,
            values: self.values.as_ref().map(|(x, y)| (y.clone(), x.clone())),
        }
    }

    /// Recomputes the event values at both states through the per-state
    /// engines; `None` for non-quantitative witnesses.
    pub fn replay(&self, a: &ProbAutomaton, stutter_nodes: usize) -> Result<Option<(Values, Values)>> {
        match &self.item {
            WitnessItem::Event(e) => Ok(Some((e.replay(a, self.left, stutter_nodes)?, e.replay(a, self.right, stutter_nodes)?))),
            _ => Ok(None),
        }
    }
}

/// A computed relation with the separating items collected on the way.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub relation: Relation,
    /// Keyed by deleted pair; bisimulations store each pair once.
    pub witnesses: BTreeMap<(StateId, StateId), Witness>,
    pub caps_hit: BTreeSet<String>,
    pub rounds: usize,
}

impl Outcome {
    /// The separating item for a pair outside the relation.
    pub fn witness(&self, a: &ProbAutomaton, s: StateId, r: StateId) -> Option<Witness> {
        if self.relation.contains(s, r) {
            return None;
        }
        if a.label(s) != a.label(r) {
            return Some(Witness { item: WitnessItem::Labels, left: s, right: r, values: None });
        }
        if let Some(w) = self.witnesses.get(&(s, r)) {
            return Some(w.clone());
        }
        self.witnesses.get(&(r, s)).map(Witness::swapped)
    }
}

/// All down-sets of a preorder, up to the cap.
pub fn downsets(rel: &Relation, caps: &Caps) -> Result<Vec<crate::model::stateset::StateSet>> {
    rel.downsets(caps.downsets)
}

pub fn strong_1_depth(a: &ProbAutomaton, direction: Direction, caps: &Caps) -> Result<Outcome> {
    let mut e = Engine::new(a, caps);
    let rel = e.start_bisim(direction, &Family::Step { principal: caps.principal_only })?;
    Ok(e.finish(rel))
}

pub fn strong_branching_i(a: &ProbAutomaton, i: usize, direction: Direction, caps: &Caps) -> Result<Outcome> {
    let mut e = Engine::new(a, caps);
    let mut rel = e.start_bisim(direction, &Family::Step { principal: caps.principal_only })?;
    for j in 2..=i {
        let fam = Family::Reach { horizons: (1..=j).map(Some).collect() };
        rel = e.refine_bisim(rel, direction, &fam)?;
    }
    Ok(e.finish(rel))
}

pub fn strong_i_depth(a: &ProbAutomaton, i: usize, direction: Direction, caps: &Caps) -> Result<Outcome> {
    let mut e = Engine::new(a, caps);
    let mut rel = e.start_bisim(direction, &Family::Step { principal: caps.principal_only })?;
    for j in 2..=i {
        rel = e.refine_bisim(rel, direction, &Family::Pattern { len: j + 1 })?;
    }
    Ok(e.finish(rel))
}

pub fn weak_branching_bisim(a: &ProbAutomaton, direction: Direction, caps: &Caps) -> Result<Outcome> {
    let mut e = Engine::new(a, caps);
    let rel = e.start_bisim(direction, &Family::Reach { horizons: vec![None] })?;
    Ok(e.finish(rel))
}

pub fn weak_bisim(a: &ProbAutomaton, direction: Direction, caps: &Caps) -> Result<Outcome> {
    let mut e = Engine::new(a, caps);
    let fam = Family::Stutter { max_len: caps.pattern_length, antichain: caps.antichain_size };
    let rel = e.start_bisim(direction, &fam)?;
    Ok(e.finish(rel))
}

/// The one-directional members of the catalog built on optimal values.
pub fn sim_family(a: &ProbAutomaton, query: &RelationQuery) -> Result<Outcome> {
    query.validate()?;
    let caps = &query.caps;
    let dir = query.effective_direction();
    let step = Family::Step { principal: caps.principal_only };
    let mut e = Engine::new(a, caps);
    let mut rel = e.label_preorder();
    match query.name {
        RelationName::BranchingSimI | RelationName::SimI => {
            rel = e.refine_preorder(rel, dir, &step)?;
            for j in 2..=query.depth.unwrap_or(1) {
                let fam = if query.name == RelationName::SimI {
                    Family::Pattern { len: j + 1 }
                } else {
                    Family::Reach { horizons: (1..=j).map(Some).collect() }
                };
                rel = e.refine_preorder(rel, dir, &fam)?;
            }
        }
        RelationName::WeakBranchingSim => {
            rel = e.refine_preorder(rel, dir, &Family::Reach { horizons: vec![None] })?;
        }
        RelationName::WeakSim => {
            let fam = Family::Stutter { max_len: caps.pattern_length, antichain: caps.antichain_size };
            rel = e.refine_preorder(rel, dir, &fam)?;
        }
        other => return Err(Error::Query(format!("`{other}` is not a value-based simulation"))),
    }
    Ok(e.finish(rel))
}

/// Computes the relation a query names.
pub fn compute(a: &ProbAutomaton, query: &RelationQuery) -> Result<Outcome> {
    query.validate()?;
    let caps = &query.caps;
    let dir = query.effective_direction();
    let depth = query.depth.unwrap_or(1);
    match query.name {
        RelationName::StrongProbBisim => Ok(strong_prob_bisim(a)),
        RelationName::BranchingProbBisim => {
            Ok(branching_prob_bisim(a, query.depth.or(caps.branching_depth).unwrap_or(a.len())))
        }
        RelationName::Strong1 => strong_1_depth(a, dir, caps),
        RelationName::StrongBranchingI => strong_branching_i(a, depth, dir, caps),
        RelationName::StrongI => strong_i_depth(a, depth, dir, caps),
        RelationName::WeakBranchingBisim => weak_branching_bisim(a, dir, caps),
        RelationName::WeakBisim => weak_bisim(a, dir, caps),
        RelationName::StrongProbSim => Ok(strong_prob_sim(a)),
        _ => sim_family(a, query),
    }
}

/// Answer to a relation query, optionally about one pair.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub query: RelationQuery,
    pub outcome: Outcome,
    pub pair: Option<(StateId, StateId)>,
    pub related: Option<bool>,
    pub witness: Option<Witness>,
}

pub fn relate(a: &ProbAutomaton, query: &RelationQuery, pair: Option<(StateId, StateId)>) -> Result<Verdict> {
    let outcome = compute(a, query)?;
    let related = pair.map(|(s, r)| outcome.relation.contains(s, r));
    let witness = pair.and_then(|(s, r)| outcome.witness(a, s, r));
    Ok(Verdict { query: query.clone(), outcome, pair, related, witness })
}

pub use report::render;

#[cfg(test)]
mod tests;
