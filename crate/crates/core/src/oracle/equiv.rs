use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::logic::ast::{Cmp, PathFormula, StateFormula};
use crate::logic::fragment::FragmentTag;
use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::lp::convex_combination;
use crate::model::rational::Rational;
use crate::model::stateset::StateSet;
use crate::oracle::values::{bounded_optima, next_optima, until_optima, Optima, Role, Traces};
use crate::oracle::{FormulaBudget, EVENT_CAP, LIVE_CAP, POLICY_CAP, TRACE_CAP};

/// A path event over the classes of one stratum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum PathEvent {
    Next(Vec<usize>),
    Until { mid: Vec<usize>, target: Vec<usize>, bound: Option<usize> },
    /// Class sequences, the first entry being the start class.
    Seqs(Vec<Vec<usize>>),
}

#[derive(Clone, Debug)]
struct Splitter {
    event: PathEvent,
    /// Optima at every member of the split class.
    values: BTreeMap<StateId, Optima>,
}

#[derive(Clone, Debug)]
struct Level {
    class_of: Vec<usize>,
    count: usize,
    /// Class of the previous stratum each class came from.
    parent: Vec<usize>,
    /// Per previous class, the events that split it.
    splitters: Vec<Vec<Splitter>>,
}

impl Level {
    fn members(&self) -> Vec<Vec<StateId>> {
        let mut out = vec![Vec::new(); self.count];
        for (s, &c) in self.class_of.iter().enumerate() {
            out[c].push(s);
        }
        out
    }
}

/// How two states were told apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distinction {
    /// Holds at the first state, fails at the second.
    pub formula: StateFormula,
    /// The path event inside `formula`; `None` when the labels differ.
    pub path: Option<PathFormula>,
    pub values: Option<(Optima, Optima)>,
    /// Stratum at which the states first fall into different classes.
    pub stratum: usize,
}

/// The strata of logical equivalence under a budget.
pub struct Stratification<'a> {
    a: &'a ProbAutomaton,
    budget: FormulaBudget,
    levels: Vec<Level>,
    stable: bool,
    formulas: RefCell<HashMap<(usize, usize), StateFormula>>,
}

pub(crate) fn label_formula(a: &ProbAutomaton, s: StateId) -> StateFormula {
    StateFormula::all(a.props().iter().map(|p| {
        let atom = StateFormula::atom(p.clone());
        if a.label(s).contains(p) {
            atom
        } else {
            atom.not()
        }
    }))
}

/// A literal true at `yes` and false at `no`.
pub(crate) fn label_literal(a: &ProbAutomaton, yes: StateId, no: StateId) -> Option<StateFormula> {
    if let Some(p) = a.label(yes).difference(a.label(no)).next() {
        return Some(StateFormula::atom(p.clone()));
    }
    a.label(no).difference(a.label(yes)).next().map(|p| StateFormula::atom(p.clone()).not())
}

pub(crate) fn label_partition(a: &ProbAutomaton) -> (Vec<usize>, usize) {
    let mut ids: BTreeMap<&BTreeSet<String>, usize> = BTreeMap::new();
    let mut class_of = Vec::with_capacity(a.len());
    for s in a.states() {
        let next = ids.len();
        class_of.push(*ids.entry(a.label(s)).or_insert(next));
    }
    (class_of, ids.len())
}

/// Nonempty subsets of `0..k` with at most `width` elements, by size then
/// lexicographically.
pub(crate) fn subsets(k: usize, width: usize) -> Result<Vec<Vec<usize>>> {
    if k >= 20 {
        return Err(Error::ResourceCap { cap: "oracle-events", limit: EVENT_CAP });
    }
    let mut out: Vec<Vec<usize>> = (1u32..(1 << k))
        .filter(|m| m.count_ones() as usize <= width)
        .map(|m| (0..k).filter(|i| m >> i & 1 == 1).collect())
        .collect();
    out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    Ok(out)
}

/// Splits of `0..k` into (mid, target) with a nonempty target.
fn colorings(k: usize, width: usize, skip_empty_mid: bool) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let total = 3usize.checked_pow(k as u32).filter(|&t| t <= EVENT_CAP);
    let Some(total) = total else {
        return Err(Error::ResourceCap { cap: "oracle-events", limit: EVENT_CAP });
    };
    let mut out = Vec::new();
    for code in 0..total {
        let (mut mid, mut target) = (Vec::new(), Vec::new());
        let mut x = code;
        for c in 0..k {
            match x % 3 {
                1 => mid.push(c),
                2 => target.push(c),
                _ => {}
            }
            x /= 3;
        }
        if target.is_empty() || mid.len() > width || target.len() > width || (skip_empty_mid && mid.is_empty()) {
            continue;
        }
        out.push((mid, target));
    }
    Ok(out)
}

fn states_in(class_of: &[usize], classes: &[usize]) -> StateSet {
    StateSet::from_indices(class_of.len(), (0..class_of.len()).filter(|s| classes.contains(&class_of[*s])))
}

fn roles(class_of: &[usize], mid: &[usize], target: &[usize]) -> Vec<Role> {
    class_of
        .iter()
        .map(|c| {
            if target.contains(c) {
                Role::Target
            } else if mid.contains(c) {
                Role::Mid
            } else {
                Role::Out
            }
        })
        .collect()
}

/// A state formula on which `yes` and `no` take different sides, given
/// optima of `psi` at each.
pub(crate) fn separating(psi: PathFormula, vy: &Optima, vn: &Optima) -> StateFormula {
    if vy.sup != vn.sup {
        if vy.sup < vn.sup {
            StateFormula::prob(Cmp::Le, vy.sup.clone(), psi)
        } else {
            StateFormula::prob(Cmp::Le, vn.sup.clone(), psi).not()
        }
    } else if vy.inf > vn.inf {
        StateFormula::prob(Cmp::Ge, vy.inf.clone(), psi)
    } else {
        StateFormula::prob(Cmp::Ge, vn.inf.clone(), psi).not()
    }
}

pub(crate) fn nexts(k: usize, phi: StateFormula) -> PathFormula {
    (0..k).fold(PathFormula::state(phi), |p, _| PathFormula::next(p))
}

fn is_star(tag: FragmentTag) -> bool {
    matches!(tag, FragmentTag::PctlStarMinusI(_) | FragmentTag::PctlStarMinus)
}

/// Joint live sequences, then the scaled trace vectors of both states.
type Dense = (Vec<Vec<usize>>, Vec<Vec<i128>>, Vec<Vec<i128>>);

/// Dense scaled trace vectors of two states over their joint live sequences.
fn dense(tr: &Traces, x: StateId, y: StateId) -> Result<Dense> {
    let live: BTreeSet<&Vec<usize>> =
        tr.sets[x].iter().chain(&tr.sets[y]).flatten().filter(|(_, v)| *v > 0).map(|(q, _)| q).collect();
    if live.len() > LIVE_CAP {
        return Err(Error::ResourceCap { cap: "oracle-live-sequences", limit: LIVE_CAP });
    }
    let seqs: Vec<Vec<usize>> = live.into_iter().cloned().collect();
    let index: HashMap<&Vec<usize>, usize> = seqs.iter().enumerate().map(|(i, q)| (q, i)).collect();
    let to_dense = |s: StateId| -> Vec<Vec<i128>> {
        tr.sets[s]
            .iter()
            .map(|t| {
                let mut v = vec![0; seqs.len()];
                for (q, w) in t {
                    if let Some(&i) = index.get(q) {
                        v[i] = *w;
                    }
                }
                v
            })
            .collect()
    };
    let (dx, dy) = (to_dense(x), to_dense(y));
    Ok((seqs, dx, dy))
}

fn hull_contains(vertices: &[Vec<i128>], points: &[Vec<i128>]) -> bool {
    let conv = |v: &Vec<i128>| -> Vec<Rational> { v.iter().map(|x| Rational::from_integer((*x).into())).collect() };
    let verts: Vec<Vec<Rational>> = vertices.iter().map(conv).collect();
    points.iter().all(|p| vertices.contains(p) || convex_combination(&verts, &conv(p)).is_some())
}

fn spread(sums: &[i128]) -> (i128, i128) {
    sums.iter().fold((i128::MAX, i128::MIN), |(lo, hi), x| (lo.min(*x), hi.max(*x)))
}

/// A set of class sequences whose optima differ at `x` and `y`, if any.
/// Singletons and pairs come first, then every subset in Gray-code order.
fn star_differ(tr: &Traces, x: StateId, y: StateId) -> Result<Option<Vec<Vec<usize>>>> {
    if tr.sets[x] == tr.sets[y] {
        return Ok(None);
    }
    let (seqs, dx, dy) = dense(tr, x, y)?;
    if hull_contains(&dx, &dy) && hull_contains(&dy, &dx) {
        return Ok(None);
    }
    let l = seqs.len();
    let eval = |sel: &[usize]| -> bool {
        let sx: Vec<i128> = dx.iter().map(|v| sel.iter().map(|&i| v[i]).sum()).collect();
        let sy: Vec<i128> = dy.iter().map(|v| sel.iter().map(|&i| v[i]).sum()).collect();
        spread(&sx) != spread(&sy)
    };
    let pick = |sel: &[usize]| sel.iter().map(|&i| seqs[i].clone()).collect::<Vec<_>>();
    for i in 0..l {
        if eval(&[i]) {
            return Ok(Some(pick(&[i])));
        }
    }
    for i in 0..l {
        for j in i + 1..l {
            if eval(&[i, j]) {
                return Ok(Some(pick(&[i, j])));
            }
        }
    }
    let mut inside = vec![false; l];
    let mut sx = vec![0i128; dx.len()];
    let mut sy = vec![0i128; dy.len()];
    for g in 1u64..(1u64 << l) {
        let b = g.trailing_zeros() as usize;
        let sign = if inside[b] { -1 } else { 1 };
        inside[b] = !inside[b];
        for (s, v) in sx.iter_mut().zip(&dx) {
            *s += sign * v[b];
        }
        for (s, v) in sy.iter_mut().zip(&dy) {
            *s += sign * v[b];
        }
        if spread(&sx) != spread(&sy) {
            let sel: Vec<usize> = (0..l).filter(|&i| inside[i]).collect();
            return Ok(Some(pick(&sel)));
        }
    }
    Ok(None)
}

impl<'a> Stratification<'a> {
    pub fn compute(a: &'a ProbAutomaton, budget: &FormulaBudget) -> Result<Self> {
        match budget.fragment {
            FragmentTag::Pctl
            | FragmentTag::PctlMinus
            | FragmentTag::PctlMinusI(_)
            | FragmentTag::PctlNoNext
            | FragmentTag::PctlStarMinus
            | FragmentTag::PctlStarMinusI(_) => {}
            other => return Err(Error::Fragment(format!("{other} has no equivalence oracle"))),
        }
        let (class_of, count) = label_partition(a);
        let mut strat = Stratification {
            a,
            budget: budget.clone(),
            levels: vec![Level { class_of, count, parent: Vec::new(), splitters: Vec::new() }],
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

    pub fn class_of(&self) -> &[usize] {
        &self.levels.last().expect("stratum 0").class_of
    }

    /// Strata above the labels that split something.
    pub fn strata(&self) -> usize {
        self.levels.len() - 1
    }

    /// Did a further stratum fail to split anything?
    pub fn stable(&self) -> bool {
        self.stable
    }

    fn events(&self, k: usize) -> Result<Vec<PathEvent>> {
        let d = self.budget.effective_depth();
        let w = self.budget.max_boolean_size;
        let mut out = Vec::new();
        let next = !matches!(self.budget.fragment, FragmentTag::PctlNoNext);
        let bounded = next;
        let unbounded = matches!(self.budget.fragment, FragmentTag::Pctl | FragmentTag::PctlNoNext);
        if next {
            out.extend(subsets(k, w)?.into_iter().map(PathEvent::Next));
        }
        if bounded {
            let cs = colorings(k, w, true)?;
            for n in 1..=d {
                out.extend(cs.iter().map(|(m, t)| PathEvent::Until { mid: m.clone(), target: t.clone(), bound: Some(n) }));
            }
        }
        if unbounded {
            out.extend(colorings(k, w, true)?.into_iter().map(|(mid, target)| PathEvent::Until { mid, target, bound: None }));
        }
        if out.len() > EVENT_CAP {
            return Err(Error::ResourceCap { cap: "oracle-events", limit: EVENT_CAP });
        }
        Ok(out)
    }

    fn evaluate(&self, class_of: &[usize], e: &PathEvent) -> Result<Vec<Optima>> {
        Ok(match e {
            PathEvent::Next(u) => next_optima(self.a, &states_in(class_of, u)),
            PathEvent::Until { mid, target, bound: Some(n) } => bounded_optima(self.a, &roles(class_of, mid, target), *n),
            PathEvent::Until { mid, target, bound: None } => until_optima(self.a, &roles(class_of, mid, target), POLICY_CAP)?,
            PathEvent::Seqs(_) => unreachable!("sequence events are evaluated on traces"),
        })
    }

    fn refine(&self) -> Result<Option<Level>> {
        let level = self.levels.last().expect("stratum 0");
        let members = level.members();
        if members.iter().all(|m| m.len() < 2) {
            return Ok(None);
        }
        let star = is_star(self.budget.fragment);
        let (events, values, traces) = if star {
            let tr = Traces::compute(self.a, &level.class_of, self.budget.effective_depth() + 1, TRACE_CAP)?;
            (Vec::new(), Vec::new(), Some(tr))
        } else {
            let events = self.events(level.count)?;
            let values = events.iter().map(|e| self.evaluate(&level.class_of, e)).collect::<Result<Vec<_>>>()?;
            (events, values, None)
        };

        let differ = |x: StateId, y: StateId| -> Result<Option<PathEvent>> {
            match &traces {
                Some(tr) => Ok(star_differ(tr, x, y)?.map(PathEvent::Seqs)),
                None => Ok(values.iter().position(|v| v[x] != v[y]).map(|e| events[e].clone())),
            }
        };
        let optima_of = |e: &PathEvent, s: StateId| -> Optima {
            match (&traces, e) {
                (Some(tr), PathEvent::Seqs(set)) => tr.optima(s, |q| set.iter().any(|p| p == q)),
                _ => values[events.iter().position(|x| x == e).expect("known event")][s].clone(),
            }
        };

        let mut class_of = vec![0; self.a.len()];
        let mut parent = Vec::new();
        let mut splitters: Vec<Vec<Splitter>> = vec![Vec::new(); level.count];
        for (c, mem) in members.iter().enumerate() {
            let mut groups: Vec<Vec<StateId>> = Vec::new();
            for &x in mem {
                let mut home = None;
                for (gi, g) in groups.iter().enumerate() {
                    match differ(x, g[0])? {
                        None => {
                            home = Some(gi);
                            break;
                        }
                        Some(e) => {
                            if !splitters[c].iter().any(|sp| sp.event == e) {
                                let values = mem.iter().map(|&m| (m, optima_of(&e, m))).collect();
                                splitters[c].push(Splitter { event: e, values });
                            }
                        }
                    }
                }
                match home {
                    Some(gi) => groups[gi].push(x),
                    None => groups.push(vec![x]),
                }
            }
            for g in groups {
                for x in g {
                    class_of[x] = parent.len();
                }
                parent.push(c);
            }
        }
        if parent.len() == level.count {
            return Ok(None);
        }
        Ok(Some(Level { class_of, count: parent.len(), parent, splitters }))
    }

    /// A formula whose satisfaction set is class `c` of stratum `t`.
    pub fn class_formula(&self, t: usize, c: usize) -> StateFormula {
        if let Some(f) = self.formulas.borrow().get(&(t, c)) {
            return f.clone();
        }
        let level = &self.levels[t];
        let rep = level.class_of.iter().position(|&x| x == c).expect("class has a member");
        let f = if t == 0 {
            label_formula(self.a, rep)
        } else {
            let p = level.parent[c];
            let mut f = self.class_formula(t - 1, p);
            for sp in &level.splitters[p] {
                let psi = self.event_path(t - 1, &sp.event);
                let mine = &sp.values[&rep];
                if sp.values.values().any(|v| v.inf != mine.inf) {
                    f = f
                        .and(StateFormula::prob(Cmp::Ge, mine.inf.clone(), psi.clone()))
                        .and(StateFormula::prob(Cmp::Gt, mine.inf.clone(), psi.clone()).not());
                }
                if sp.values.values().any(|v| v.sup != mine.sup) {
                    f = f
                        .and(StateFormula::prob(Cmp::Le, mine.sup.clone(), psi.clone()))
                        .and(StateFormula::prob(Cmp::Lt, mine.sup.clone(), psi).not());
                }
            }
            f
        };
        self.formulas.borrow_mut().insert((t, c), f.clone());
        f
    }

    fn union_formula(&self, t: usize, classes: &[usize]) -> StateFormula {
        StateFormula::any(classes.iter().map(|&c| self.class_formula(t, c)))
    }

    fn event_path(&self, t: usize, e: &PathEvent) -> PathFormula {
        match e {
            PathEvent::Next(u) => PathFormula::next(PathFormula::state(self.union_formula(t, u))),
            PathEvent::Until { mid, target, bound } => {
                let l = PathFormula::state(self.union_formula(t, mid));
                let r = PathFormula::state(self.union_formula(t, target));
                match bound {
                    Some(n) => PathFormula::bounded_until(l, r, *n),
                    None => PathFormula::until(l, r),
                }
            }
            PathEvent::Seqs(set) => set
                .iter()
                .map(|seq| {
                    seq.iter()
                        .enumerate()
                        .map(|(k, &c)| nexts(k, self.class_formula(t, c)))
                        .reduce(PathFormula::and)
                        .expect("nonempty sequence")
                })
                .reduce(PathFormula::or)
                .expect("nonempty event"),
        }
    }

    /// How `s` and `r` are told apart, if they are.
    pub fn distinguish(&self, s: StateId, r: StateId) -> Option<Distinction> {
        let t = self.levels.iter().position(|l| l.class_of[s] != l.class_of[r])?;
        if t == 0 {
            let formula = label_literal(self.a, s, r).expect("labels differ");
            return Some(Distinction { formula, path: None, values: None, stratum: 0 });
        }
        let p = self.levels[t - 1].class_of[s];
        let sp = self.levels[t].splitters[p]
            .iter()
            .find(|sp| sp.values[&s] != sp.values[&r])
            .expect("recorded splitters separate every pair of groups");
        let psi = self.event_path(t - 1, &sp.event);
        let (vs, vr) = (sp.values[&s].clone(), sp.values[&r].clone());
        Some(Distinction { formula: separating(psi.clone(), &vs, &vr), path: Some(psi), values: Some((vs, vr)), stratum: t })
    }
}
