//! Combined transitions, branching transitions and weight functions, all
//! decided by exact linear feasibility rather than enumeration.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::automaton::{Distribution, ProbAutomaton, StateId};
use crate::model::lp::{convex_combination, feasible};
use crate::model::rational::{one, zero, Rational};
use crate::model::relation::Relation;

fn class_count(class_of: &[usize]) -> usize {
    class_of.iter().max().map_or(0, |m| m + 1)
}

/// Is there a combined transition of `s` whose class projection equals `target`?
///
/// `target` is indexed by class id of `class_of`.
pub fn can_combine_match(a: &ProbAutomaton, s: StateId, target: &[Rational], class_of: &[usize]) -> bool {
    let k = class_count(class_of);
    let vertices: Vec<Vec<Rational>> = a.transitions(s).iter().map(|mu| mu.project(class_of, k)).collect();
    convex_combination(&vertices, target).is_some()
}

/// Vertex distributions of the branching transitions of `s` derived with
/// recursion depth at most `depth`. Depth 0 yields only δ_s.
pub fn branching_transition_vertices(
    a: &ProbAutomaton,
    s: StateId,
    class_of: &[usize],
    depth: usize,
) -> BTreeSet<Distribution> {
    let mut memo: BTreeMap<(StateId, usize), BTreeSet<Distribution>> = BTreeMap::new();
    vertices_rec(a, s, class_of, depth, &mut memo)
}

fn vertices_rec(
    a: &ProbAutomaton,
    s: StateId,
    class_of: &[usize],
    depth: usize,
    memo: &mut BTreeMap<(StateId, usize), BTreeSet<Distribution>>,
) -> BTreeSet<Distribution> {
    if let Some(v) = memo.get(&(s, depth)) {
        return v.clone();
    }
    let mut out = BTreeSet::new();
    out.insert(Distribution::dirac(s));
    if depth > 0 {
        for mu in a.transitions(s) {
            // Each in-class successor continues with one of its own branching moves.
            let mut partial: Vec<Vec<(Rational, Distribution)>> = vec![Vec::new()];
            for (r, p) in mu.iter() {
                let options: Vec<Distribution> = if class_of[r] == class_of[s] {
                    vertices_rec(a, r, class_of, depth - 1, memo).into_iter().collect()
                } else {
                    vec![Distribution::dirac(r)]
                };
                let mut next = Vec::with_capacity(partial.len() * options.len());
                for prefix in &partial {
                    for o in &options {
                        let mut ext = prefix.clone();
                        ext.push((p.clone(), o.clone()));
                        next.push(ext);
                    }
                }
                partial = next;
            }
            for parts in partial {
                let refs: Vec<(Rational, &Distribution)> = parts.iter().map(|(w, d)| (w.clone(), d)).collect();
                out.insert(Distribution::combine(&refs));
            }
        }
    }
    memo.insert((s, depth), out.clone());
    out
}

/// Class projections of the branching vertices, deduplicated. Only the
/// projection matters when matching against class-level targets, so the
/// recursion works on projections directly and stays small.
pub fn branching_projection_vertices(
    a: &ProbAutomaton,
    s: StateId,
    class_of: &[usize],
    depth: usize,
) -> BTreeSet<Vec<Rational>> {
    let k = class_count(class_of);
    let mut memo: BTreeMap<(StateId, usize), BTreeSet<Vec<Rational>>> = BTreeMap::new();
    projection_rec(a, s, class_of, k, depth, &mut memo)
}

fn projection_rec(
    a: &ProbAutomaton,
    s: StateId,
    class_of: &[usize],
    k: usize,
    depth: usize,
    memo: &mut BTreeMap<(StateId, usize), BTreeSet<Vec<Rational>>>,
) -> BTreeSet<Vec<Rational>> {
    if let Some(v) = memo.get(&(s, depth)) {
        return v.clone();
    }
    let mut dirac = vec![zero(); k];
    dirac[class_of[s]] = one();
    let mut out = BTreeSet::new();
    out.insert(dirac);
    if depth > 0 {
        for mu in a.transitions(s) {
            let mut base = vec![zero(); k];
            let mut partial: BTreeSet<Vec<Rational>> = BTreeSet::new();
            let mut inner: Vec<(Rational, BTreeSet<Vec<Rational>>)> = Vec::new();
            for (r, p) in mu.iter() {
                if class_of[r] == class_of[s] {
                    inner.push((p.clone(), projection_rec(a, r, class_of, k, depth - 1, memo)));
                } else {
                    base[class_of[r]] += p;
                }
            }
            partial.insert(base);
            for (p, options) in inner {
                let mut next = BTreeSet::new();
                for prefix in &partial {
                    for o in &options {
                        let v: Vec<Rational> = prefix.iter().zip(o).map(|(x, y)| x + &p * y).collect();
                        next.insert(v);
                    }
                }
                partial = next;
            }
            out.extend(partial);
        }
    }
    memo.insert((s, depth), out.clone());
    out
}

/// Is there a branching combined transition of `s` (derived to `depth`) whose
/// class projection equals `target`?
///
/// Solved as a flow over (state, level) pairs inside the class of `s`:
/// mass at a level either stops there or takes a transition, and in-class
/// successors receive it one level further down. Polynomial in `depth`,
/// unlike the hull of [`branching_projection_vertices`].
pub fn can_branching_match(
    a: &ProbAutomaton,
    s: StateId,
    target: &[Rational],
    class_of: &[usize],
    depth: usize,
) -> bool {
    let k = class_count(class_of);
    if target.len() != k {
        return false;
    }
    let home = class_of[s];
    let members: Vec<StateId> = a.states().filter(|&u| class_of[u] == home).collect();

    // Variables: stop[u][t] for t in 0..=depth, then move[u][i][t] for t < depth.
    let mut vars = 0usize;
    let mut stop = vec![vec![0usize; depth + 1]; members.len()];
    for row in stop.iter_mut() {
        for v in row.iter_mut() {
            *v = vars;
            vars += 1;
        }
    }
    let mut moves: Vec<(usize, usize, usize, usize)> = Vec::new(); // (member, transition, level, var)
    for (m, &u) in members.iter().enumerate() {
        for i in 0..a.transitions(u).len() {
            for t in 0..depth {
                moves.push((m, i, t, vars));
                vars += 1;
            }
        }
    }

    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (m, &u) in members.iter().enumerate() {
        for t in 0..=depth {
            let mut row = vec![zero(); vars];
            row[stop[m][t]] = one();
            for &(mm, i, tt, v) in &moves {
                if mm == m && tt == t {
                    row[v] += one();
                }
                if tt + 1 == t {
                    let p = a.transitions(members[mm])[i].get(u);
                    row[v] -= p;
                }
            }
            rows.push(row);
            rhs.push(if t == 0 && u == s { one() } else { zero() });
        }
    }
    for (c, want) in target.iter().enumerate() {
        let mut row = vec![zero(); vars];
        if c == home {
            for per in &stop {
                for &v in per {
                    row[v] = one();
                }
            }
        } else {
            for &(mm, i, _, v) in &moves {
                let mu = &a.transitions(members[mm])[i];
                row[v] = mu.iter().filter(|(r, _)| class_of[*r] == c).fold(zero(), |acc, (_, p)| acc + p);
            }
        }
        rows.push(row);
        rhs.push(want.clone());
    }
    feasible(&rows, &rhs).is_some()
}

/// A weight function Δ for μ and ν with respect to a relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFunction {
    pub weights: BTreeMap<(StateId, StateId), Rational>,
}

impl WeightFunction {
    /// Checks the three defining conditions exactly.
    pub fn verify(&self, mu: &Distribution, nu: &Distribution, rel: &Relation) -> bool {
        let mut rows: BTreeMap<StateId, Rational> = BTreeMap::new();
        let mut cols: BTreeMap<StateId, Rational> = BTreeMap::new();
        for (&(x, y), w) in &self.weights {
            if *w < zero() || (*w > zero() && !rel.contains(x, y)) {
                return false;
            }
            *rows.entry(x).or_insert_with(zero) += w;
            *cols.entry(y).or_insert_with(zero) += w;
        }
        let rows_ok = mu.iter().all(|(x, p)| rows.get(&x).is_some_and(|v| v == p))
            && rows.iter().all(|(x, v)| *v == zero() || mu.get(*x) == *v);
        let cols_ok = nu.iter().all(|(y, p)| cols.get(&y).is_some_and(|v| v == p))
            && cols.iter().all(|(y, v)| *v == zero() || nu.get(*y) == *v);
        rows_ok && cols_ok
    }
}

/// A weight function for μ and ν w.r.t. `rel`, if one exists.
pub fn weight_function(mu: &Distribution, nu: &Distribution, rel: &Relation) -> Option<WeightFunction> {
    let combined = combined_weight_match(mu, std::slice::from_ref(nu), rel)?;
    Some(combined.1)
}

/// Finds λ and Δ such that Δ is a weight function for μ and Σ λₖ·νₖ.
pub fn combined_weight_match(
    mu: &Distribution,
    nus: &[Distribution],
    rel: &Relation,
) -> Option<(Vec<Rational>, WeightFunction)> {
    if nus.is_empty() {
        return None;
    }
    let xs: Vec<StateId> = mu.support().collect();
    let ys: Vec<StateId> = nus.iter().flat_map(|n| n.support()).collect::<BTreeSet<_>>().into_iter().collect();
    let edges: Vec<(StateId, StateId)> =
        xs.iter().flat_map(|&x| ys.iter().filter(move |&&y| rel.contains(x, y)).map(move |&y| (x, y))).collect();
    let k = nus.len();
    let vars = k + edges.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut row = vec![zero(); vars];
    for v in row.iter_mut().take(k) {
        *v = one();
    }
    a.push(row);
    b.push(one());
    for &x in &xs {
        let mut row = vec![zero(); vars];
        for (e, &(ex, _)) in edges.iter().enumerate() {
            if ex == x {
                row[k + e] = one();
            }
        }
        a.push(row);
        b.push(mu.get(x));
    }
    for &y in &ys {
        let mut row = vec![zero(); vars];
        for (j, nu) in nus.iter().enumerate() {
            row[j] = -nu.get(y);
        }
        for (e, &(_, ey)) in edges.iter().enumerate() {
            if ey == y {
                row[k + e] = one();
            }
        }
        a.push(row);
        b.push(zero());
    }
    let sol = feasible(&a, &b)?;
    let weights = edges
        .iter()
        .enumerate()
        .filter(|(e, _)| sol[k + e] > zero())
        .map(|(e, &pair)| (pair, sol[k + e].clone()))
        .collect();
    Some((sol[..k].to_vec(), WeightFunction { weights }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::automaton::AutomatonBuilder;
    use crate::model::rational::ratio;

    fn fig1_right() -> ProbAutomaton {
        let mut b = AutomatonBuilder::new("r");
        b.add_state("r", ["top"]).unwrap();
        for (s, l) in [("s1", "a1"), ("s2", "a2"), ("s3", "a3")] {
            b.add_state(s, [l]).unwrap();
        }
        b.add_transition_named("r", &[("s1", 3, 10), ("s2", 3, 10), ("s3", 2, 5)]).unwrap();
        b.add_transition_named("r", &[("s1", 2, 5), ("s2", 3, 10), ("s3", 3, 10)]).unwrap();
        b.add_transition_named("r", &[("s1", 1, 2), ("s2", 2, 5), ("s3", 1, 10)]).unwrap();
        for s in ["s1", "s2", "s3"] {
            b.add_transition_named(s, &[(s, 1, 1)]).unwrap();
        }
        b.build()
    }

    fn without_middle() -> ProbAutomaton {
        let mut b = AutomatonBuilder::new("s");
        b.add_state("s", ["top"]).unwrap();
        for (s, l) in [("s1", "a1"), ("s2", "a2"), ("s3", "a3")] {
            b.add_state(s, [l]).unwrap();
        }
        b.add_transition_named("s", &[("s1", 3, 10), ("s2", 3, 10), ("s3", 2, 5)]).unwrap();
        b.add_transition_named("s", &[("s1", 1, 2), ("s2", 2, 5), ("s3", 1, 10)]).unwrap();
        for s in ["s1", "s2", "s3"] {
            b.add_transition_named(s, &[(s, 1, 1)]).unwrap();
        }
        b.build()
    }

    #[test]
    fn middle_transition_is_not_a_combination() {
        let a = without_middle();
        let classes = a.label_classes();
        let target = vec![zero(), ratio(2, 5), ratio(3, 10), ratio(3, 10)];
        assert!(!can_combine_match(&a, 0, &target, &classes));
        let own = a.transitions(0)[1].project(&classes, 4);
        assert!(can_combine_match(&a, 0, &own, &classes));
    }

    #[test]
    fn halfway_mix_is_a_combination() {
        let a = fig1_right();
        let classes = a.label_classes();
        let target = vec![zero(), ratio(2, 5), ratio(7, 20), ratio(1, 4)];
        assert!(can_combine_match(&a, 0, &target, &classes));
    }

    #[test]
    fn no_transitions_never_match() {
        let mut b = AutomatonBuilder::new("dead");
        b.add_state("x", ["p"]).unwrap();
        let a = b.build();
        assert!(!can_combine_match(&a, 0, &[one()], &[0]));
    }

    #[test]
    fn branching_vertices() {
        let a = fig1_right();
        let classes = a.label_classes();
        assert_eq!(branching_transition_vertices(&a, 1, &classes, 5).len(), 1);
        let v = branching_transition_vertices(&a, 0, &classes, 1);
        assert_eq!(v.len(), 4);
        assert!(v.contains(&Distribution::dirac(0)));

        // u -> v (same class), v -> w
        let mut b = AutomatonBuilder::new("chain");
        b.add_state("u", ["a"]).unwrap();
        b.add_state("v", ["a"]).unwrap();
        b.add_state("w", ["b"]).unwrap();
        b.add_transition_named("u", &[("v", 1, 1)]).unwrap();
        b.add_transition_named("v", &[("w", 1, 1)]).unwrap();
        b.add_transition_named("w", &[("w", 1, 1)]).unwrap();
        let c = b.build();
        let cls = c.label_classes();
        assert!(!branching_transition_vertices(&c, 0, &cls, 1).contains(&Distribution::dirac(2)));
        assert!(branching_transition_vertices(&c, 0, &cls, 2).contains(&Distribution::dirac(2)));
        let proj = branching_projection_vertices(&c, 0, &cls, 2);
        assert!(proj.contains(&vec![zero(), one()]));
    }

    #[test]
    fn flow_agrees_with_the_vertex_hull() {
        use crate::harness::generate::{generate_random, GenParams};
        for seed in 0..40 {
            let a = generate_random(&GenParams::default().seed(seed).states(4));
            let classes = a.label_classes();
            let k = class_count(&classes);
            for s in a.states() {
                for depth in 0..=2 {
                    let verts: Vec<Vec<Rational>> = branching_projection_vertices(&a, s, &classes, depth).into_iter().collect();
                    // Every vertex, a midpoint of two, and a few off-hull points.
                    let mut probes = verts.clone();
                    if verts.len() > 1 {
                        let half = Rational::new(1.into(), 2.into());
                        probes.push(verts[0].iter().zip(&verts[verts.len() - 1]).map(|(x, y)| (x + y) * &half).collect());
                    }
                    for c in 0..k {
                        let mut e = vec![zero(); k];
                        e[c] = one();
                        probes.push(e);
                    }
                    for p in probes {
                        let hull = convex_combination(&verts, &p).is_some();
                        assert_eq!(can_branching_match(&a, s, &p, &classes, depth), hull, "seed {seed} s {s} depth {depth}");
                    }
                }
            }
        }
    }

    #[test]
    fn weight_functions() {
        let mu = Distribution::new([(0, ratio(1, 2)), (1, ratio(1, 2))]).unwrap();
        let nu = Distribution::new([(2, one())]).unwrap();
        let mut rel = Relation::identity(3);
        assert!(weight_function(&mu, &nu, &rel).is_none());
        rel.insert(0, 2);
        rel.insert(1, 2);
        let w = weight_function(&mu, &nu, &rel).unwrap();
        assert!(w.verify(&mu, &nu, &rel));
        assert!(!w.verify(&mu, &nu, &Relation::identity(3)));
    }
}
