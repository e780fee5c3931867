//! Separating events and the families they are drawn from.
//!
//! A family turns the current relation and a handful of source states into
//! a batch of events together with the optimal values of each event at each
//! source. Only the part of the automaton reachable from the sources is
//! looked at, so the batches stay small even when the relation has many
//! classes.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::Result;
use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::rational::{show, zero, Rational};
use crate::model::relation::Relation;
use crate::model::stateset::StateSet;
use crate::reach::mdp::{bounded_values, until_values, Mdp};
use crate::reach::stutter::{stuttering_pattern_opt_capped, stuttering_values_from};
use crate::reach::{bounded_reach, pattern_opt, unbounded_reach, Mode, PatternSet};

/// Infimum and supremum of an event over all schedulers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Values {
    pub inf: Rational,
    pub sup: Rational,
}

impl fmt::Display for Values {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inf {} sup {}", show(&self.inf), show(&self.sup))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    /// Mass a single transition puts on a set.
    Step(StateSet),
    /// Reach `cp` moving only through `c`, within `steps` steps if bounded.
    Reach { c: StateSet, cp: StateSet, steps: Option<usize> },
    /// Union of cone patterns.
    Pattern(PatternSet),
    /// Union of stuttering closures of cone patterns.
    Stutter(PatternSet),
}

fn extremes(values: impl Iterator<Item = Rational>) -> Values {
    let all: Vec<Rational> = values.collect();
    Values {
        inf: all.iter().min().cloned().unwrap_or_else(zero),
        sup: all.iter().max().cloned().unwrap_or_else(zero),
    }
}

impl Event {
    /// Optimal values at `s`, recomputed through the per-state engines.
    pub fn replay(&self, a: &ProbAutomaton, s: StateId, stutter_nodes: usize) -> Result<Values> {
        let both = |f: &dyn Fn(Mode) -> Result<Rational>| -> Result<Values> {
            Ok(Values { inf: f(Mode::Inf)?, sup: f(Mode::Sup)? })
        };
        match self {
            Event::Step(c) => Ok(extremes(a.transitions(s).iter().map(|mu| mu.mass(c)))),
            Event::Reach { c, cp, steps: Some(n) } => both(&|m| Ok(bounded_reach(a, s, c, cp, *n, m).0)),
            Event::Reach { c, cp, steps: None } => both(&|m| Ok(unbounded_reach(a, s, c, cp, m).0)),
            Event::Pattern(p) => both(&|m| Ok(pattern_opt(a, s, p, m).0)),
            Event::Stutter(p) => both(&|m| Ok(stuttering_pattern_opt_capped(a, s, p, m, stutter_nodes)?.0)),
        }
    }

    pub fn describe(&self, a: &ProbAutomaton) -> String {
        let pats = |p: &PatternSet| {
            p.patterns()
                .iter()
                .map(|pat| format!("<{}>", pat.iter().map(|c| set_names(a, c)).collect::<Vec<_>>().join(", ")))
                .collect::<Vec<_>>()
                .join(" | ")
        };
        match self {
            Event::Step(c) => format!("X {}", set_names(a, c)),
            Event::Reach { c, cp, steps: Some(n) } => format!("{} U<={} {}", set_names(a, c), n, set_names(a, cp)),
            Event::Reach { c, cp, steps: None } => format!("{} U {}", set_names(a, c), set_names(a, cp)),
            Event::Pattern(p) => format!("cones {}", pats(p)),
            Event::Stutter(p) => format!("stuttering {}", pats(p)),
        }
    }
}

pub fn set_names(a: &ProbAutomaton, set: &StateSet) -> String {
    format!("{{{}}}", set.iter().map(|s| a.state_name(s)).collect::<Vec<_>>().join(", "))
}

/// Classes of the current relation and the down-closure of each.
#[derive(Clone, Debug)]
pub(crate) struct Ctx {
    pub class_of: Vec<usize>,
    pub classes: Vec<StateSet>,
    pub down: Vec<StateSet>,
}

impl Ctx {
    pub fn from_partition(class_of: &[usize]) -> Self {
        let n = class_of.len();
        let k = class_of.iter().max().map_or(0, |m| m + 1);
        let mut classes = vec![StateSet::empty(n); k];
        for (s, &c) in class_of.iter().enumerate() {
            classes[c].insert(s);
        }
        Ctx { class_of: class_of.to_vec(), down: classes.clone(), classes }
    }

    /// Kernel classes of the reflexive-transitive closure, with their down-sets.
    pub fn from_relation(rel: &Relation) -> Self {
        let closure = rel.transitive_closure();
        let kernel = closure.intersection(&closure.inverse());
        let class_of = kernel.classes().expect("kernel of a preorder is an equivalence");
        let mut ctx = Ctx::from_partition(&class_of);
        ctx.down = ctx.classes.iter().map(|c| closure.down_closure(c)).collect();
        ctx
    }

    fn union_down<'a>(&self, n: usize, cs: impl IntoIterator<Item = &'a usize>) -> StateSet {
        cs.into_iter().fold(StateSet::empty(n), |acc, &c| acc.union(&self.down[c]))
    }

    /// Class `c` lies below class `d`.
    fn below(&self, c: usize, d: usize) -> bool {
        self.classes[c].is_subset(&self.down[d])
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Family {
    /// One-step masses of down-sets (or only principal ones).
    Step { principal: bool },
    /// Constrained reachability over pairs of down-sets.
    Reach { horizons: Vec<Option<usize>> },
    /// Unions of class-sequence cones of the given length.
    Pattern { len: usize },
    /// Antichains of compressed class sequences under stuttering closure.
    /// `max_len = None` means one more than the number of classes.
    Stutter { max_len: Option<usize>, antichain: usize },
}

#[derive(Clone, Debug)]
pub(crate) enum Pending {
    Ready(Event),
    Seqs { seqs: Vec<Vec<usize>>, stutter: bool },
}

impl Pending {
    pub fn resolve(&self, ctx: &Ctx) -> Event {
        match self {
            Pending::Ready(e) => e.clone(),
            Pending::Seqs { seqs, stutter } => {
                let pats = PatternSet::new(seqs.iter().map(|seq| seq.iter().map(|&c| ctx.down[c].clone()).collect()));
                if *stutter {
                    Event::Stutter(pats)
                } else {
                    Event::Pattern(pats)
                }
            }
        }
    }
}

#[derive(Debug, Default)]
pub(crate) struct Batch {
    pub events: Vec<Pending>,
    /// `values[e][i]`: event `e` at source `i`.
    pub values: Vec<Vec<Values>>,
    pub caps_hit: Vec<&'static str>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Limits {
    pub events: usize,
    pub stutter_nodes: usize,
}

/// `k`-subsets of `0..n` for `k = 1..=max`, smallest first, each in
/// lexicographic order.
pub(crate) struct Combos {
    n: usize,
    max: usize,
    cur: Vec<usize>,
}

impl Combos {
    pub fn new(n: usize, max: usize) -> Self {
        Combos { n, max: max.min(n), cur: Vec::new() }
    }
}

impl Iterator for Combos {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let k = self.cur.len();
        if k == 0 {
            if self.max == 0 {
                return None;
            }
            self.cur = vec![0];
            return Some(self.cur.clone());
        }
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.cur[i] < self.n - (k - i) {
                self.cur[i] += 1;
                for j in i + 1..k {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                return Some(self.cur.clone());
            }
        }
        if k == self.max {
            return None;
        }
        self.cur = (0..=k).collect();
        Some(self.cur.clone())
    }
}

fn classes_of(ctx: &Ctx, set: &StateSet) -> BTreeSet<usize> {
    set.iter().map(|s| ctx.class_of[s]).collect()
}

fn shared_class(ctx: &Ctx, sources: &[StateId]) -> Option<usize> {
    let c = ctx.class_of[*sources.first()?];
    sources.iter().all(|&s| ctx.class_of[s] == c).then_some(c)
}

impl Family {
    pub fn evaluate(&self, a: &ProbAutomaton, mdp: &Mdp, ctx: &Ctx, sources: &[StateId], limits: Limits) -> Result<Batch> {
        match self {
            Family::Step { principal } => Ok(step_batch(a, ctx, sources, *principal, limits)),
            Family::Reach { horizons } => Ok(reach_batch(a, mdp, ctx, sources, horizons, limits)),
            Family::Pattern { len } => pattern_batch(a, ctx, sources, *len, limits),
            Family::Stutter { max_len, antichain } => {
                stutter_batch(a, ctx, sources, max_len.unwrap_or(ctx.classes.len() + 1), *antichain, limits)
            }
        }
    }
}

fn step_batch(a: &ProbAutomaton, ctx: &Ctx, sources: &[StateId], principal: bool, limits: Limits) -> Batch {
    let n = a.len();
    let succ = sources.iter().fold(StateSet::empty(n), |acc, &s| acc.union(&a.successors(s)));
    let ks: Vec<usize> = classes_of(ctx, &succ).into_iter().collect();
    let mut batch = Batch::default();
    let mut seen: HashSet<StateSet> = HashSet::new();
    let max = if principal { 1 } else { ks.len() };
    for combo in Combos::new(ks.len(), max) {
        if batch.events.len() >= limits.events {
            batch.caps_hit.push("events");
            break;
        }
        let c = ctx.union_down(n, combo.iter().map(|&i| &ks[i]));
        if !seen.insert(c.intersection(&succ)) {
            continue;
        }
        batch.values.push(sources.iter().map(|&s| extremes(a.transitions(s).iter().map(|mu| mu.mass(&c)))).collect());
        batch.events.push(Pending::Ready(Event::Step(c)));
    }
    batch
}

fn flags(set: &StateSet) -> Vec<bool> {
    (0..set.universe()).map(|i| set.contains(i)).collect()
}

/// States of `c` that can reach `cp` inside `c`, plus `cp`. Values of a
/// reach event only depend on this set: the rest of `c` scores zero anyway.
fn feeding(a: &ProbAutomaton, c: &StateSet, cp: &StateSet) -> StateSet {
    let mut got = cp.clone();
    loop {
        let more: Vec<StateId> = c.iter().filter(|&s| !got.contains(s) && a.successors(s).iter().any(|t| got.contains(t))).collect();
        if more.is_empty() {
            return got;
        }
        for s in more {
            got.insert(s);
        }
    }
}

const OUT: u8 = 0;
const MID: u8 = 1;
const TARGET: u8 = 2;

fn reach_batch(
    a: &ProbAutomaton,
    mdp: &Mdp,
    ctx: &Ctx,
    sources: &[StateId],
    horizons: &[Option<usize>],
    limits: Limits,
) -> Batch {
    let n = a.len();
    let src = StateSet::from_indices(n, sources.iter().copied());
    let fixed = shared_class(ctx, sources);
    let mut batch = Batch::default();
    let mut seen: HashSet<(StateSet, StateSet, Option<usize>)> = HashSet::new();
    'horizons: for &h in horizons {
        // Classes met strictly before the horizon may be passed through;
        // classes first met at the horizon can only serve as targets.
        let inner = match h {
            Some(k) => a.reachable(&src, Some(k.saturating_sub(1))),
            None => a.reachable(&src, None),
        };
        let outer = a.reachable(&src, h);
        let mut three: Vec<usize> = classes_of(ctx, &inner).into_iter().filter(|&c| Some(c) != fixed).collect();
        three.sort_unstable();
        let two: Vec<usize> = classes_of(ctx, &outer)
            .into_iter()
            .filter(|c| !three.contains(c) && Some(*c) != fixed)
            .collect();
        let mut digits = vec![OUT; three.len() + two.len()];
        loop {
            let mut cp_classes = Vec::new();
            let mut c_classes: Vec<usize> = fixed.into_iter().collect();
            for (i, &d) in digits.iter().enumerate() {
                let class = if i < three.len() { three[i] } else { two[i - three.len()] };
                match d {
                    TARGET => cp_classes.push(class),
                    MID => c_classes.push(class),
                    _ => {}
                }
            }
            if !cp_classes.is_empty() {
                let cp = ctx.union_down(n, &cp_classes);
                let c = ctx.union_down(n, &c_classes).union(&cp);
                if seen.insert((feeding(a, &c, &cp).intersection(&outer), cp.intersection(&outer), h)) {
                    if batch.events.len() >= limits.events {
                        batch.caps_hit.push("events");
                        break 'horizons;
                    }
                    let (allowed, target) = (flags(&c), flags(&cp));
                    let (sup, inf) = match h {
                        Some(k) => (
                            bounded_values(mdp, &allowed, &target, k, Mode::Sup).0,
                            bounded_values(mdp, &allowed, &target, k, Mode::Inf).0,
                        ),
                        None => (
                            until_values(mdp, &allowed, &target, Mode::Sup).0,
                            until_values(mdp, &allowed, &target, Mode::Inf).0,
                        ),
                    };
                    batch
                        .values
                        .push(sources.iter().map(|&s| Values { inf: inf[s].clone(), sup: sup[s].clone() }).collect());
                    batch.events.push(Pending::Ready(Event::Reach { c, cp, steps: h }));
                }
            }
            // Odometer: inner classes take three colours, outer ones two.
            let mut i = 0;
            loop {
                if i == digits.len() {
                    continue 'horizons;
                }
                match (digits[i], i >= three.len()) {
                    (OUT, true) => {
                        digits[i] = TARGET;
                        break;
                    }
                    (d, false) if d < TARGET => {
                        digits[i] = d + 1;
                        break;
                    }
                    _ => {
                        digits[i] = OUT;
                        i += 1;
                    }
                }
            }
        }
    }
    batch
}

/// Class sequences of the given length realizable by some path from a source.
fn live_sequences(a: &ProbAutomaton, ctx: &Ctx, sources: &[StateId], len: usize) -> Vec<Vec<usize>> {
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut seen: HashSet<(StateId, Vec<usize>)> = HashSet::new();
    let mut stack: Vec<(StateId, Vec<usize>)> = sources.iter().map(|&s| (s, vec![ctx.class_of[s]])).collect();
    while let Some((u, prefix)) = stack.pop() {
        if prefix.len() == len {
            out.insert(prefix);
            continue;
        }
        if !seen.insert((u, prefix.clone())) {
            continue;
        }
        for v in a.successors(u).iter() {
            let mut next = prefix.clone();
            next.push(ctx.class_of[v]);
            stack.push((v, next));
        }
    }
    out.into_iter().collect()
}

/// Least common denominator of all transition probabilities, if it fits.
fn common_denominator(a: &ProbAutomaton) -> Option<i128> {
    let mut d = BigInt::from(1);
    for s in a.states() {
        for mu in a.transitions(s) {
            for (_, p) in mu.iter() {
                d = d.lcm(p.denom());
            }
        }
    }
    d.to_i128()
}

enum Child {
    Node(usize),
    Leaf(usize),
}

/// The unfolding of the automaton from the sources, `len - 1` steps deep,
/// with probabilities scaled to integers. Nodes are stored children first.
struct SeqTree {
    nodes: Vec<Vec<Vec<(i128, Child)>>>,
    roots: Vec<usize>,
    scale: i128,
}

impl SeqTree {
    fn build(a: &ProbAutomaton, ctx: &Ctx, sources: &[StateId], len: usize, index: &HashMap<Vec<usize>, usize>) -> Option<Self> {
        let d = common_denominator(a)?;
        let scale = d.checked_pow(u32::try_from(len - 1).ok()?)?;
        scale.checked_mul(d)?;
        let mut tree = SeqTree { nodes: Vec::new(), roots: Vec::new(), scale };
        let mut memo: HashMap<(StateId, Vec<usize>), usize> = HashMap::new();
        for &s in sources {
            let root = tree.unfold(a, ctx, d, s, vec![ctx.class_of[s]], len - 1, index, &mut memo)?;
            tree.roots.push(root);
        }
        Some(tree)
    }

    #[allow(clippy::too_many_arguments)]
    fn unfold(
        &mut self,
        a: &ProbAutomaton,
        ctx: &Ctx,
        d: i128,
        u: StateId,
        prefix: Vec<usize>,
        left: usize,
        index: &HashMap<Vec<usize>, usize>,
        memo: &mut HashMap<(StateId, Vec<usize>), usize>,
    ) -> Option<usize> {
        if let Some(&k) = memo.get(&(u, prefix.clone())) {
            return Some(k);
        }
        let mut choices = Vec::new();
        for mu in a.transitions(u) {
            let mut here = Vec::new();
            for (v, p) in mu.iter() {
                let mut next = prefix.clone();
                next.push(ctx.class_of[v]);
                let scaled = (p * Rational::from_integer(BigInt::from(d))).to_integer().to_i128()?;
                let child = if left == 1 {
                    Child::Leaf(index[&next])
                } else {
                    Child::Node(self.unfold(a, ctx, d, v, next, left - 1, index, memo)?)
                };
                here.push((scaled, child));
            }
            choices.push(here);
        }
        self.nodes.push(choices);
        let k = self.nodes.len() - 1;
        memo.insert((u, prefix), k);
        Some(k)
    }

    fn eval(&self, mask: &StateSet, mode: Mode) -> Vec<i128> {
        let mut val = vec![0i128; self.nodes.len()];
        for (k, choices) in self.nodes.iter().enumerate() {
            let mut best: Option<i128> = None;
            for ch in choices {
                let v: i128 = ch
                    .iter()
                    .map(|(p, c)| {
                        p * match c {
                            Child::Node(j) => val[*j],
                            Child::Leaf(l) => i128::from(mask.contains(*l)),
                        }
                    })
                    .sum();
                best = Some(match (best, mode) {
                    (None, _) => v,
                    (Some(b), Mode::Sup) => b.max(v),
                    (Some(b), Mode::Inf) => b.min(v),
                });
            }
            val[k] = best.unwrap_or(0);
        }
        self.roots.iter().map(|&r| val[r]).collect()
    }
}

fn pattern_batch(a: &ProbAutomaton, ctx: &Ctx, sources: &[StateId], len: usize, limits: Limits) -> Result<Batch> {
    let live = live_sequences(a, ctx, sources, len);
    let mut batch = Batch::default();
    if live.len() < 2 {
        return Ok(batch);
    }
    let index: HashMap<Vec<usize>, usize> = live.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    // below[i]: sequences pointwise below sequence i.
    let below: Vec<Vec<usize>> = live
        .iter()
        .map(|hi| {
            (0..live.len()).filter(|&j| live[j].iter().zip(hi).all(|(&c, &d)| ctx.below(c, d))).collect()
        })
        .collect();
    let tree = SeqTree::build(a, ctx, sources, len, &index);
    let mut seen: HashSet<StateSet> = HashSet::new();
    for combo in Combos::new(live.len(), live.len() - 1) {
        let mut mask = StateSet::empty(live.len());
        for &i in &combo {
            for &j in &below[i] {
                mask.insert(j);
            }
        }
        if mask.len() == live.len() || !seen.insert(mask.clone()) {
            continue;
        }
        if batch.events.len() >= limits.events {
            batch.caps_hit.push("events");
            break;
        }
        let seqs: Vec<Vec<usize>> = combo.iter().map(|&i| live[i].clone()).collect();
        let pending = Pending::Seqs { seqs, stutter: false };
        let values = match &tree {
            Some(t) => {
                let (sup, inf) = (t.eval(&mask, Mode::Sup), t.eval(&mask, Mode::Inf));
                let den = BigInt::from(t.scale);
                sup.iter()
                    .zip(&inf)
                    .map(|(s, i)| Values {
                        inf: Rational::new(BigInt::from(*i), den.clone()),
                        sup: Rational::new(BigInt::from(*s), den.clone()),
                    })
                    .collect()
            }
            None => {
                let Event::Pattern(pats) = pending.resolve(ctx) else { unreachable!() };
                sources
                    .iter()
                    .map(|&s| Values { inf: pattern_opt(a, s, &pats, Mode::Inf).0, sup: pattern_opt(a, s, &pats, Mode::Sup).0 })
                    .collect()
            }
        };
        batch.values.push(values);
        batch.events.push(pending);
    }
    Ok(batch)
}

/// Compressed class traces (adjacent classes distinct) of length 2 to
/// `max_len` realizable from the sources. The flag reports whether some
/// trace could have been extended past `max_len`.
fn live_traces(a: &ProbAutomaton, ctx: &Ctx, sources: &[StateId], max_len: usize) -> (Vec<Vec<usize>>, bool) {
    let mut out: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut cut = false;
    let mut seen: HashSet<(StateId, Vec<usize>)> = HashSet::new();
    let mut stack: Vec<(StateId, Vec<usize>)> = sources.iter().map(|&s| (s, vec![ctx.class_of[s]])).collect();
    while let Some((u, trace)) = stack.pop() {
        if !seen.insert((u, trace.clone())) {
            continue;
        }
        for v in a.successors(u).iter() {
            let c = ctx.class_of[v];
            let next = if trace.last() == Some(&c) {
                trace.clone()
            } else if trace.len() < max_len {
                let mut t = trace.clone();
                t.push(c);
                out.insert(t.clone());
                t
            } else {
                cut = true;
                continue;
            };
            stack.push((v, next));
        }
    }
    let mut traces: Vec<Vec<usize>> = out.into_iter().collect();
    traces.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x.cmp(y)));
    (traces, cut)
}

fn stutter_batch(
    a: &ProbAutomaton,
    ctx: &Ctx,
    sources: &[StateId],
    max_len: usize,
    antichain: usize,
    limits: Limits,
) -> Result<Batch> {
    let (traces, cut) = live_traces(a, ctx, sources, max_len);
    let mut batch = Batch::default();
    if cut {
        batch.caps_hit.push("pattern-length");
    }
    if traces.len() > antichain {
        batch.caps_hit.push("antichain-size");
    }
    let is_prefix = |p: &[usize], q: &[usize]| p.len() < q.len() && q.starts_with(p);
    for combo in Combos::new(traces.len(), antichain) {
        if combo.iter().any(|&i| combo.iter().any(|&j| is_prefix(&traces[i], &traces[j]))) {
            continue;
        }
        if batch.events.len() >= limits.events {
            batch.caps_hit.push("events");
            break;
        }
        let seqs: Vec<Vec<usize>> = combo.iter().map(|&i| traces[i].clone()).collect();
        let pending = Pending::Seqs { seqs, stutter: true };
        let Event::Stutter(pats) = pending.resolve(ctx) else { unreachable!() };
        let sup = stuttering_values_from(a, &pats, Mode::Sup, limits.stutter_nodes, sources)?;
        let inf = stuttering_values_from(a, &pats, Mode::Inf, limits.stutter_nodes, sources)?;
        batch.values.push(inf.into_iter().zip(sup).map(|(inf, sup)| Values { inf, sup }).collect());
        batch.events.push(pending);
    }
    Ok(batch)
}
