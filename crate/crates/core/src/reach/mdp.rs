//! Exact optimal constrained reachability on an explicit MDP.

use num_traits::Zero;

use crate::model::automaton::ProbAutomaton;
use crate::model::rational::{one, zero, Rational};
use crate::reach::Mode;

/// Transition structure used by every engine: per node, a list of choices,
/// each a sparse distribution over nodes.
#[derive(Clone, Debug, Default)]
pub struct Mdp {
    pub choices: Vec<Vec<Vec<(usize, Rational)>>>,
}

impl Mdp {
    pub fn from_automaton(a: &ProbAutomaton) -> Self {
        let choices = a
            .states()
            .map(|s| a.transitions(s).iter().map(|mu| mu.iter().map(|(t, p)| (t, p.clone())).collect()).collect())
            .collect();
        Mdp { choices }
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }
}

fn better(mode: Mode, candidate: &Rational, current: &Rational) -> bool {
    match mode {
        Mode::Sup => candidate > current,
        Mode::Inf => candidate < current,
    }
}

fn expect(choice: &[(usize, Rational)], values: &[Rational]) -> Rational {
    choice.iter().fold(zero(), |acc, (t, p)| acc + p * &values[*t])
}

/// Step-indexed optimum of "reach `target` within `n` steps, moving only
/// through `allowed`". Returns values for every node and, per steps-left
/// `k` (index `k - 1`), the chosen transition of each continuing node.
pub fn bounded_values(
    mdp: &Mdp,
    allowed: &[bool],
    target: &[bool],
    n: usize,
    mode: Mode,
) -> (Vec<Rational>, Vec<Vec<Option<usize>>>) {
    let size = mdp.len();
    let mut values: Vec<Rational> = (0..size).map(|u| if target[u] { one() } else { zero() }).collect();
    let mut policy = Vec::with_capacity(n);
    for _ in 0..n {
        let mut next = values.clone();
        let mut choice = vec![None; size];
        for u in 0..size {
            if target[u] || !allowed[u] {
                continue;
            }
            let mut best: Option<Rational> = None;
            for (i, mu) in mdp.choices[u].iter().enumerate() {
                let v = expect(mu, &values);
                if best.as_ref().is_none_or(|b| better(mode, &v, b)) {
                    best = Some(v);
                    choice[u] = Some(i);
                }
            }
            next[u] = best.unwrap_or_else(zero);
        }
        values = next;
        policy.push(choice);
    }
    (values, policy)
}

/// Nodes from which `target` is reachable through `allowed` nodes using
/// only the given per-node choice sets.
fn can_reach(mdp: &Mdp, allowed: &[bool], target: &[bool], usable: impl Fn(usize, usize) -> bool) -> Vec<bool> {
    let size = mdp.len();
    let mut reach = target.to_vec();
    loop {
        let mut changed = false;
        for u in 0..size {
            if reach[u] || !allowed[u] {
                continue;
            }
            let hit = mdp.choices[u]
                .iter()
                .enumerate()
                .any(|(i, mu)| usable(u, i) && mu.iter().any(|(t, _)| reach[*t]));
            if hit {
                reach[u] = true;
                changed = true;
            }
        }
        if !changed {
            return reach;
        }
    }
}

/// Nodes where the minimum reachability probability is zero: some scheduler
/// avoids `target` forever (greatest fixed point).
fn min_zero(mdp: &Mdp, allowed: &[bool], target: &[bool]) -> Vec<bool> {
    let size = mdp.len();
    let mut zero_set: Vec<bool> = (0..size).map(|u| !target[u]).collect();
    loop {
        let mut changed = false;
        for u in 0..size {
            if !zero_set[u] || !allowed[u] || mdp.choices[u].is_empty() {
                continue;
            }
            let escapes = mdp.choices[u].iter().any(|mu| mu.iter().all(|(t, _)| zero_set[*t]));
            if !escapes {
                zero_set[u] = false;
                changed = true;
            }
        }
        if !changed {
            return zero_set;
        }
    }
}

/// Value of a fixed stationary policy: solves the induced chain exactly.
/// Nodes that cannot reach `target` under the policy get 0.
pub fn policy_values(mdp: &Mdp, allowed: &[bool], target: &[bool], policy: &[Option<usize>]) -> Vec<Rational> {
    let size = mdp.len();
    let reach = can_reach(mdp, allowed, target, |u, i| policy[u] == Some(i));
    let unknown: Vec<usize> = (0..size).filter(|&u| reach[u] && !target[u]).collect();
    let mut pos = vec![usize::MAX; size];
    for (k, &u) in unknown.iter().enumerate() {
        pos[u] = k;
    }
    let m = unknown.len();
    let mut mat = vec![vec![zero(); m + 1]; m];
    for (k, &u) in unknown.iter().enumerate() {
        mat[k][k] = one();
        let i = policy[u].expect("continuing node has a choice");
        for (t, p) in &mdp.choices[u][i] {
            if target[*t] {
                mat[k][m] += p;
            } else if pos[*t] != usize::MAX {
                mat[k][pos[*t]] -= p;
            }
        }
    }
    let sol = solve(mat);
    let mut values: Vec<Rational> = (0..size).map(|u| if target[u] { one() } else { zero() }).collect();
    for (k, &u) in unknown.iter().enumerate() {
        values[u] = sol[k].clone();
    }
    values
}

/// Gauss-Jordan elimination on an augmented, nonsingular system.
pub fn solve(mut mat: Vec<Vec<Rational>>) -> Vec<Rational> {
    let m = mat.len();
    for col in 0..m {
        let piv = (col..m).find(|&r| !mat[r][col].is_zero()).expect("system is nonsingular");
        mat.swap(col, piv);
        let p = mat[col][col].clone();
        for v in mat[col].iter_mut() {
            *v /= &p;
        }
        let prow = mat[col].clone();
        for (r, row) in mat.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
    }
    mat.into_iter().map(|row| row[m].clone()).collect()
}

/// Optimal unbounded constrained reachability by policy iteration.
/// Returns values and an optimal stationary policy. A choice is only replaced
/// on strict improvement, by the lowest-index best choice.
pub fn until_values(mdp: &Mdp, allowed: &[bool], target: &[bool], mode: Mode) -> (Vec<Rational>, Vec<Option<usize>>) {
    let size = mdp.len();
    let continuing: Vec<bool> = (0..size).map(|u| allowed[u] && !target[u] && !mdp.choices[u].is_empty()).collect();
    let mut policy: Vec<Option<usize>> = (0..size).map(|u| continuing[u].then_some(0)).collect();

    // For minimisation, nodes that can avoid the target forever are pinned to
    // zero with an avoiding choice; the rest reach it under every policy.
    let mut pinned = vec![false; size];
    if mode == Mode::Inf {
        let z = min_zero(mdp, allowed, target);
        for u in 0..size {
            if z[u] && continuing[u] {
                pinned[u] = true;
                policy[u] = mdp.choices[u].iter().position(|mu| mu.iter().all(|(t, _)| z[*t]));
            }
        }
    }

    loop {
        let values = policy_values(mdp, allowed, target, &policy);
        let mut changed = false;
        for u in 0..size {
            if !continuing[u] || pinned[u] {
                continue;
            }
            let current = expect(&mdp.choices[u][policy[u].unwrap()], &values);
            let mut best = current.clone();
            let mut best_i = policy[u].unwrap();
            for (i, mu) in mdp.choices[u].iter().enumerate() {
                let v = expect(mu, &values);
                if better(mode, &v, &best) {
                    best = v;
                    best_i = i;
                }
            }
            if better(mode, &best, &current) {
                policy[u] = Some(best_i);
                changed = true;
            }
        }
        if !changed {
            return (values, policy);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::rational::ratio;

    fn mdp(ch: Vec<Vec<Vec<(usize, Rational)>>>) -> Mdp {
        Mdp { choices: ch }
    }

    #[test]
    fn sup_and_inf_with_loop() {
        // 0: loop or go to 1 (target); 1: target
        let m = mdp(vec![vec![vec![(0, one())], vec![(1, one())]], vec![vec![(1, one())]]]);
        let allowed = vec![true, true];
        let target = vec![false, true];
        assert_eq!(until_values(&m, &allowed, &target, Mode::Sup).0[0], one());
        assert_eq!(until_values(&m, &allowed, &target, Mode::Inf).0[0], zero());
        let (b, pol) = bounded_values(&m, &allowed, &target, 2, Mode::Sup);
        assert_eq!(b[0], one());
        assert_eq!(pol[0][0], Some(1));
    }

    #[test]
    fn geometric_retry() {
        // 0 -> 1/2 target, 1/2 back to 0
        let m = mdp(vec![vec![vec![(0, ratio(1, 2)), (1, ratio(1, 2))]], vec![vec![(1, one())]]]);
        let (v, _) = until_values(&m, &[true, true], &[false, true], Mode::Inf);
        assert_eq!(v[0], one());
        let (b, _) = bounded_values(&m, &[true, true], &[false, true], 2, Mode::Inf);
        assert_eq!(b[0], ratio(3, 4));
    }
}
