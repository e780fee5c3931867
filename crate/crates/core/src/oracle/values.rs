//! Optimal values by brute force over deterministic schedulers. Nothing in
//! here calls the `reach` engines.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::rational::{one, show, zero, Rational};
use crate::model::stateset::StateSet;

/// Infimum and supremum of a path event over schedulers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Optima {
    pub inf: Rational,
    pub sup: Rational,
}

impl fmt::Display for Optima {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "inf {} sup {}", show(&self.inf), show(&self.sup))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Role {
    Out,
    Mid,
    Target,
}

fn extremes(values: impl IntoIterator<Item = Rational>) -> Optima {
    let mut it = values.into_iter();
    let Some(first) = it.next() else {
        return Optima { inf: zero(), sup: zero() };
    };
    let (mut inf, mut sup) = (first.clone(), first);
    for v in it {
        if v < inf {
            inf = v.clone();
        }
        if v > sup {
            sup = v;
        }
    }
    Optima { inf, sup }
}

/// `X set` from every state.
pub(crate) fn next_optima(a: &ProbAutomaton, set: &StateSet) -> Vec<Optima> {
    a.states().map(|s| extremes(a.transitions(s).iter().map(|mu| mu.mass(set)))).collect()
}

fn bounded_pass(a: &ProbAutomaton, role: &[Role], n: usize, sup: bool) -> Vec<Rational> {
    let mut v: Vec<Rational> = role.iter().map(|r| if *r == Role::Target { one() } else { zero() }).collect();
    for _ in 0..n {
        let next = a
            .states()
            .map(|s| {
                if role[s] != Role::Mid {
                    return v[s].clone();
                }
                let vals = a.transitions(s).iter().map(|mu| mu.iter().fold(zero(), |acc, (t, p)| acc + p * &v[t]));
                let o = extremes(vals);
                if sup {
                    o.sup
                } else {
                    o.inf
                }
            })
            .collect();
        v = next;
    }
    v
}

/// `mid U≤n target` from every state, backwards over steps remaining.
pub(crate) fn bounded_optima(a: &ProbAutomaton, role: &[Role], n: usize) -> Vec<Optima> {
    let sup = bounded_pass(a, role, n, true);
    let inf = bounded_pass(a, role, n, false);
    inf.into_iter().zip(sup).map(|(inf, sup)| Optima { inf, sup }).collect()
}

/// Gaussian elimination on an augmented nonsingular system.
fn gauss(mut m: Vec<Vec<Rational>>) -> Vec<Rational> {
    let k = m.len();
    for col in 0..k {
        let piv = (col..k).find(|&r| !m[r][col].is_zero()).expect("nonsingular");
        m.swap(col, piv);
        for r in 0..k {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &m[col][col];
            for c in col..=k {
                let d = &f * &m[col][c];
                m[r][c] -= d;
            }
        }
    }
    (0..k).map(|r| &m[r][k] / &m[r][r]).collect()
}

/// Absorption probabilities of the chain induced by a stationary choice.
fn chain_values(a: &ProbAutomaton, role: &[Role], choice: &[Option<usize>]) -> Vec<Rational> {
    let n = a.len();
    let mut reach: Vec<bool> = role.iter().map(|r| *r == Role::Target).collect();
    let mut grew = true;
    while grew {
        grew = false;
        for s in a.states() {
            if reach[s] || role[s] != Role::Mid {
                continue;
            }
            if let Some(i) = choice[s] {
                if a.transitions(s)[i].support().any(|t| reach[t]) {
                    reach[s] = true;
                    grew = true;
                }
            }
        }
    }
    let unknown: Vec<StateId> = a.states().filter(|&s| reach[s] && role[s] == Role::Mid).collect();
    let mut pos = vec![usize::MAX; n];
    for (k, &s) in unknown.iter().enumerate() {
        pos[s] = k;
    }
    let k = unknown.len();
    let mut m = vec![vec![zero(); k + 1]; k];
    for (row, &s) in unknown.iter().enumerate() {
        m[row][row] += one();
        let mu = &a.transitions(s)[choice[s].expect("mid state with a choice")];
        for (t, p) in mu.iter() {
            if role[t] == Role::Target {
                m[row][k] += p;
            } else if pos[t] != usize::MAX {
                m[row][pos[t]] -= p;
            }
        }
    }
    let sol = gauss(m);
    let mut out: Vec<Rational> = role.iter().map(|r| if *r == Role::Target { one() } else { zero() }).collect();
    for (k, &s) in unknown.iter().enumerate() {
        out[s] = sol[k].clone();
    }
    out
}

/// `mid U target` from every state: every stationary deterministic choice
/// on the mid states is solved exactly, and the extremes kept.
pub(crate) fn until_optima(a: &ProbAutomaton, role: &[Role], policy_cap: usize) -> Result<Vec<Optima>> {
    let mids: Vec<StateId> = a.states().filter(|&s| role[s] == Role::Mid && !a.transitions(s).is_empty()).collect();
    let mut count: usize = 1;
    for &s in &mids {
        count = count.saturating_mul(a.transitions(s).len());
    }
    if count > policy_cap {
        return Err(Error::ResourceCap { cap: "oracle-policies", limit: policy_cap });
    }
    let mut choice: Vec<Option<usize>> = vec![None; a.len()];
    for &s in &mids {
        choice[s] = Some(0);
    }
    let mut best: Option<Vec<Optima>> = None;
    loop {
        let v = chain_values(a, role, &choice);
        best = Some(match best {
            None => v.into_iter().map(|x| Optima { inf: x.clone(), sup: x }).collect(),
            Some(mut b) => {
                for (o, x) in b.iter_mut().zip(v) {
                    if x < o.inf {
                        o.inf = x.clone();
                    }
                    if x > o.sup {
                        o.sup = x;
                    }
                }
                b
            }
        });
        // Odometer over the mid states' choices.
        let mut i = 0;
        loop {
            if i == mids.len() {
                return Ok(best.expect("at least one policy"));
            }
            let s = mids[i];
            let c = choice[s].expect("mid choice") + 1;
            if c < a.transitions(s).len() {
                choice[s] = Some(c);
                break;
            }
            choice[s] = Some(0);
            i += 1;
        }
    }
}

/// A trace distribution: probability of each class sequence, scaled to an
/// integer. Sorted by sequence.
pub(crate) type Trace = Vec<(Vec<usize>, i128)>;

/// Every trace distribution over class sequences of `len` states that some
/// deterministic scheduler induces, per start state.
pub(crate) struct Traces {
    /// Values are integers over this.
    pub scale: i128,
    pub sets: Vec<Vec<Trace>>,
}

fn overflow() -> Error {
    Error::ResourceCap { cap: "oracle-scale", limit: usize::MAX }
}

fn common_denominator(a: &ProbAutomaton) -> BigInt {
    let mut d = BigInt::one();
    for s in a.states() {
        for mu in a.transitions(s) {
            for (_, p) in mu.iter() {
                d = d.lcm(p.denom());
            }
        }
    }
    d
}

impl Traces {
    pub fn compute(a: &ProbAutomaton, class_of: &[usize], len: usize, cap: usize) -> Result<Traces> {
        let denom: i128 = common_denominator(a).try_into().map_err(|_| overflow())?;
        let weights: Vec<Vec<Vec<(StateId, i128)>>> = a
            .states()
            .map(|s| {
                a.transitions(s)
                    .iter()
                    .map(|mu| {
                        mu.iter()
                            .map(|(t, p)| {
                                let w = p * Rational::from_integer(BigInt::from(denom));
                                Ok((t, w.to_integer().try_into().map_err(|_| overflow())?))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut sets: Vec<Vec<Trace>> = a.states().map(|s| vec![vec![(vec![class_of[s]], 1)]]).collect();
        let mut scale: i128 = 1;
        for _ in 1..len {
            scale = scale.checked_mul(denom).ok_or_else(overflow)?;
            let mut next = Vec::with_capacity(a.len());
            for s in a.states() {
                let mut out: BTreeSet<Trace> = BTreeSet::new();
                for mu in &weights[s] {
                    let mut acc: Vec<BTreeMap<Vec<usize>, i128>> = vec![BTreeMap::new()];
                    for &(t, w) in mu {
                        let mut grown = Vec::new();
                        for base in &acc {
                            for tr in &sets[t] {
                                let mut m = base.clone();
                                for (seq, v) in tr {
                                    let add = v.checked_mul(w).ok_or_else(overflow)?;
                                    *m.entry(seq.clone()).or_insert(0) += add;
                                }
                                grown.push(m);
                            }
                        }
                        grown.sort();
                        grown.dedup();
                        if grown.len() > cap {
                            return Err(Error::ResourceCap { cap: "oracle-traces", limit: cap });
                        }
                        acc = grown;
                    }
                    for m in acc {
                        out.insert(
                            m.into_iter()
                                .map(|(seq, v)| {
                                    let mut full = Vec::with_capacity(seq.len() + 1);
                                    full.push(class_of[s]);
                                    full.extend(seq);
                                    (full, v)
                                })
                                .collect(),
                        );
                    }
                }
                if weights[s].is_empty() {
                    out.insert(Vec::new());
                }
                if out.len() > cap {
                    return Err(Error::ResourceCap { cap: "oracle-traces", limit: cap });
                }
                next.push(out.into_iter().collect());
            }
            sets = next;
        }
        Ok(Traces { scale, sets })
    }

    pub fn rational(&self, v: i128) -> Rational {
        Rational::new(BigInt::from(v), BigInt::from(self.scale))
    }

    /// Extremes of the scaled probability of a sequence set at `s`.
    pub fn optima(&self, s: StateId, member: impl Fn(&[usize]) -> bool) -> Optima {
        let sums = self.sets[s].iter().map(|tr| tr.iter().filter(|(q, _)| member(q)).map(|(_, v)| *v).sum::<i128>());
        let (lo, hi) = sums.fold((i128::MAX, i128::MIN), |(lo, hi), x| (lo.min(x), hi.max(x)));
        Optima { inf: self.rational(lo), sup: self.rational(hi) }
    }

    /// Sequences with positive probability from some state.
    pub fn live(&self) -> Vec<Vec<usize>> {
        let set: BTreeSet<&Vec<usize>> =
            self.sets.iter().flatten().flatten().filter(|(_, v)| *v > 0).map(|(q, _)| q).collect();
        set.into_iter().cloned().collect()
    }
}

/// Every probability of "reach `cp` within `n` steps through `c`" that a
/// deterministic history-dependent scheduler attains from `s`.
pub fn bounded_reach_values(
    a: &ProbAutomaton,
    s: StateId,
    c: &StateSet,
    cp: &StateSet,
    n: usize,
    cap: usize,
) -> Result<BTreeSet<Rational>> {
    fn go(
        a: &ProbAutomaton,
        t: StateId,
        m: usize,
        c: &StateSet,
        cp: &StateSet,
        cap: usize,
        memo: &mut HashMap<(StateId, usize), BTreeSet<Rational>>,
    ) -> Result<BTreeSet<Rational>> {
        if cp.contains(t) {
            return Ok(BTreeSet::from([one()]));
        }
        if m == 0 || !c.contains(t) || a.transitions(t).is_empty() {
            return Ok(BTreeSet::from([zero()]));
        }
        if let Some(v) = memo.get(&(t, m)) {
            return Ok(v.clone());
        }
        let mut out = BTreeSet::new();
        for mu in a.transitions(t) {
            let mut acc = BTreeSet::from([zero()]);
            for (u, p) in mu.iter() {
                let sub = go(a, u, m - 1, c, cp, cap, memo)?;
                let mut grown = BTreeSet::new();
                for x in &acc {
                    for y in &sub {
                        grown.insert(x + p * y);
                    }
                }
                if grown.len() > cap {
                    return Err(Error::ResourceCap { cap: "oracle-schedulers", limit: cap });
                }
                acc = grown;
            }
            out.extend(acc);
        }
        memo.insert((t, m), out.clone());
        Ok(out)
    }
    go(a, s, n, c, cp, cap, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::format::parse_model;
    use crate::model::rational::ratio;

    const CHOICE: &str = "\
pa choice
state u label p
absorbing v label q
absorbing w
trans u -> 0.5:v 0.5:w
trans u -> 1:u
";

    #[test]
    fn until_extremes_include_the_looping_policy() {
        let a = parse_model(CHOICE).unwrap();
        let role: Vec<Role> = vec![Role::Mid, Role::Target, Role::Out];
        let o = until_optima(&a, &role, 16).unwrap();
        assert_eq!(o[0], Optima { inf: zero(), sup: ratio(1, 2) });
        let b = bounded_optima(&a, &role, 3);
        assert_eq!(b[0], o[0]);
    }

    #[test]
    fn scheduler_values_enumerate_mixtures_over_histories() {
        let a = parse_model(CHOICE).unwrap();
        let all = StateSet::full(3);
        let target = StateSet::singleton(3, 1);
        let vals = bounded_reach_values(&a, 0, &all, &target, 2, 64).unwrap();
        let expect: BTreeSet<Rational> = [zero(), ratio(1, 2)].into_iter().collect();
        assert_eq!(vals, expect);
    }

    #[test]
    fn traces_sum_to_one() {
        let a = parse_model(CHOICE).unwrap();
        let tr = Traces::compute(&a, &[0, 1, 2], 3, 64).unwrap();
        for set in &tr.sets {
            for t in set {
                assert_eq!(t.iter().map(|(_, v)| v).sum::<i128>(), tr.scale);
            }
        }
        assert_eq!(tr.sets[0].len(), 3);
    }
}
