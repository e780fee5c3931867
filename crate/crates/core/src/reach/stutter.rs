//! Optimal probabilities of stuttering closures of cone patterns.
//!
//! Under the closure every non-final set of a pattern may be visited any
//! number of times, including zero, before the final set is hit once. The
//! subset of acceptor positions reachable after a prefix is determined by
//! its least element, so one small index per pattern is the whole
//! determinized state. The product of the automaton with these tuples is
//! then solved as an unbounded reachability problem.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::model::automaton::{ProbAutomaton, StateId};
use crate::model::rational::Rational;
use crate::reach::mdp::{policy_values, until_values, Mdp};
use crate::reach::{Mode, PatternSet, PolicyKind, PolicyWitness};

/// Default limit on product nodes.
pub const DEFAULT_NODE_CAP: usize = 200_000;

const DEAD: usize = usize::MAX;
const ACCEPT_NODE: usize = 0;
const DEAD_NODE: usize = 1;

enum Read {
    Accept,
    Dead,
    Live(Vec<usize>),
}

fn read(pats: &PatternSet, mins: &[usize], x: StateId) -> Read {
    let mut next = Vec::with_capacity(mins.len());
    let mut live = false;
    for (pat, &m) in pats.patterns().iter().zip(mins) {
        if m == DEAD {
            next.push(DEAD);
            continue;
        }
        let last = pat.len() - 1;
        if pat[last].contains(x) {
            return Read::Accept;
        }
        let q = (m..last).find(|&q| pat[q].contains(x)).unwrap_or(DEAD);
        live |= q != DEAD;
        next.push(q);
    }
    if live {
        Read::Live(next)
    } else {
        Read::Dead
    }
}

struct Product {
    mdp: Mdp,
    /// Product node reached by reading each start state.
    starts: Vec<usize>,
    /// `(state, acceptor tuple)` of each live node.
    nodes: Vec<(StateId, Vec<usize>)>,
    /// For each live node, the automaton transition behind each choice.
    origin: Vec<Vec<usize>>,
}

fn build(a: &ProbAutomaton, pats: &PatternSet, from: &[StateId], cap: usize) -> Result<Product> {
    let mut index: HashMap<(StateId, Vec<usize>), usize> = HashMap::new();
    let mut nodes: Vec<(StateId, Vec<usize>)> = vec![(usize::MAX, Vec::new()), (usize::MAX, Vec::new())];
    let init = vec![0; pats.len()];

    let mut intern = |u: StateId, mins: &[usize], nodes: &mut Vec<(StateId, Vec<usize>)>| -> Result<usize> {
        match read(pats, mins, u) {
            Read::Accept => Ok(ACCEPT_NODE),
            Read::Dead => Ok(DEAD_NODE),
            Read::Live(next) => {
                if let Some(&k) = index.get(&(u, next.clone())) {
                    return Ok(k);
                }
                if nodes.len() >= cap {
                    return Err(Error::ResourceCap { cap: "stutter-nodes", limit: cap });
                }
                let k = nodes.len();
                index.insert((u, next.clone()), k);
                nodes.push((u, next));
                Ok(k)
            }
        }
    };

    let mut starts = Vec::with_capacity(from.len());
    for &s in from {
        starts.push(intern(s, &init, &mut nodes)?);
    }
    let mut choices: Vec<Vec<Vec<(usize, Rational)>>> = vec![Vec::new(), Vec::new()];
    let mut origin = vec![Vec::new(), Vec::new()];
    let mut k = 2;
    while k < nodes.len() {
        let (u, mins) = nodes[k].clone();
        let mut here = Vec::new();
        for mu in a.transitions(u) {
            let mut dist: BTreeMap<usize, Rational> = BTreeMap::new();
            for (v, p) in mu.iter() {
                let t = intern(v, &mins, &mut nodes)?;
                *dist.entry(t).or_default() += p;
            }
            here.push(dist.into_iter().collect());
        }
        origin.push((0..here.len()).collect());
        choices.push(here);
        k += 1;
    }
    Ok(Product { mdp: Mdp { choices }, starts, nodes, origin })
}

fn targets(n: usize) -> (Vec<bool>, Vec<bool>) {
    let allowed = (0..n).map(|k| k != DEAD_NODE).collect();
    let target = (0..n).map(|k| k == ACCEPT_NODE).collect();
    (allowed, target)
}

/// Optimal probability that a run from `s` lies in the stuttering closure
/// of some pattern, with the default node cap.
pub fn stuttering_pattern_opt(a: &ProbAutomaton, s: StateId, pats: &PatternSet, mode: Mode) -> Result<(Rational, PolicyWitness)> {
    stuttering_pattern_opt_capped(a, s, pats, mode, DEFAULT_NODE_CAP)
}

/// As [`stuttering_pattern_opt`]. The witness memory is the acceptor tuple
/// after reading the state (`usize::MAX` marks a dead pattern).
pub fn stuttering_pattern_opt_capped(
    a: &ProbAutomaton,
    s: StateId,
    pats: &PatternSet,
    mode: Mode,
    cap: usize,
) -> Result<(Rational, PolicyWitness)> {
    let prod = build(a, pats, &[s], cap)?;
    let (allowed, target) = targets(prod.mdp.len());
    let (values, policy) = until_values(&prod.mdp, &allowed, &target, mode);
    let mut choices = BTreeMap::new();
    for (k, ch) in policy.iter().enumerate().skip(2) {
        if let Some(i) = ch {
            let (u, mins) = &prod.nodes[k];
            choices.insert((*u, mins.clone()), prod.origin[k][*i]);
        }
    }
    Ok((values[prod.starts[0]].clone(), PolicyWitness { kind: PolicyKind::Memory, choices }))
}

/// Stuttering values for every state, from one shared product.
pub fn stuttering_values_all(a: &ProbAutomaton, pats: &PatternSet, mode: Mode, cap: usize) -> Result<Vec<Rational>> {
    let from: Vec<StateId> = a.states().collect();
    stuttering_values_from(a, pats, mode, cap, &from)
}

/// Stuttering values for the listed states only, in order.
pub fn stuttering_values_from(
    a: &ProbAutomaton,
    pats: &PatternSet,
    mode: Mode,
    cap: usize,
    from: &[StateId],
) -> Result<Vec<Rational>> {
    let prod = build(a, pats, from, cap)?;
    let (allowed, target) = targets(prod.mdp.len());
    let (values, _) = until_values(&prod.mdp, &allowed, &target, mode);
    Ok(prod.starts.iter().map(|&k| values[k].clone()).collect())
}

/// Value of a stuttering witness, by solving the chain it induces on the product.
pub fn replay_stuttering(a: &ProbAutomaton, s: StateId, pats: &PatternSet, witness: &PolicyWitness) -> Result<Rational> {
    let prod = build(a, pats, &[s], DEFAULT_NODE_CAP)?;
    let (allowed, target) = targets(prod.mdp.len());
    let policy: Vec<Option<usize>> = prod
        .nodes
        .iter()
        .enumerate()
        .map(|(k, (u, mins))| if k < 2 { None } else { witness.choice(*u, mins) })
        .collect();
    Ok(policy_values(&prod.mdp, &allowed, &target, &policy)[prod.starts[0]].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::format::parse_model;
    use crate::model::rational::{one, ratio, zero};
    use crate::model::stateset::StateSet;
    use crate::reach::unbounded_reach;

    const EX51: &str = "\
pa ex51
state s label top
state r label top
state s1 label a1
absorbing s2 label a2
state s3 label a3
absorbing s4 label a4
absorbing s5 label a5
trans s -> 0.3:s1 0.3:s2 0.4:s3
trans s -> 0.5:s1 0.4:s2 0.1:s3
trans r -> 0.3:s1 0.3:s2 0.4:s3
trans r -> 0.4:s1 0.3:s2 0.3:s3
trans r -> 0.5:s1 0.4:s2 0.1:s3
trans s1 -> 0.4:s4 0.6:s5
trans s3 -> 0.4:s4 0.6:s5
";

    fn set(a: &ProbAutomaton, names: &[&str]) -> StateSet {
        StateSet::from_indices(a.len(), names.iter().map(|n| a.state(n).unwrap()))
    }

    #[test]
    fn two_until_disjunction() {
        let a = parse_model(EX51).unwrap();
        let s = a.state("s").unwrap();
        let r = a.state("r").unwrap();
        let pats = PatternSet::new([
            vec![set(&a, &["s", "r", "s1"]), set(&a, &["s5"])],
            vec![set(&a, &["s", "r", "s3"]), set(&a, &["s4"])],
        ]);
        let (vr, wr) = stuttering_pattern_opt(&a, r, &pats, Mode::Sup).unwrap();
        let (vs, ws) = stuttering_pattern_opt(&a, s, &pats, Mode::Sup).unwrap();
        assert_eq!(vr, ratio(9, 25));
        assert_eq!(vs, ratio(17, 50));
        assert_eq!(replay_stuttering(&a, r, &pats, &wr).unwrap(), vr);
        assert_eq!(replay_stuttering(&a, s, &pats, &ws).unwrap(), vs);
        let all = stuttering_values_all(&a, &pats, Mode::Sup, DEFAULT_NODE_CAP).unwrap();
        assert_eq!((all[s].clone(), all[r].clone()), (vs, vr));
    }

    #[test]
    fn singleton_accepts_immediately() {
        let a = parse_model(EX51).unwrap();
        let s = a.state("s").unwrap();
        let pats = PatternSet::single(vec![set(&a, &["s"])]);
        assert_eq!(stuttering_pattern_opt(&a, s, &pats, Mode::Inf).unwrap().0, one());
        assert_eq!(stuttering_pattern_opt(&a, a.state("r").unwrap(), &pats, Mode::Sup).unwrap().0, zero());
    }

    #[test]
    fn two_set_pattern_is_until() {
        let a = parse_model(EX51).unwrap();
        let c = set(&a, &["s", "r", "s1"]);
        let cp = set(&a, &["s5", "s3"]);
        let pats = PatternSet::single(vec![c.clone(), cp.clone()]);
        for u in a.states() {
            for mode in [Mode::Sup, Mode::Inf] {
                let st = stuttering_pattern_opt(&a, u, &pats, mode).unwrap().0;
                assert_eq!(st, unbounded_reach(&a, u, &c, &cp, mode).0);
            }
        }
    }

    #[test]
    fn skipping_a_middle_set() {
        // <A, B, C> also accepts runs going straight from A to C.
        let a = parse_model("pa x\nstate u label p\nabsorbing w label q\ntrans u -> 1:w\n").unwrap();
        let u = a.state("u").unwrap();
        let w = a.state("w").unwrap();
        let pats = PatternSet::single(vec![
            StateSet::singleton(2, u),
            StateSet::empty(2),
            StateSet::singleton(2, w),
        ]);
        assert_eq!(stuttering_pattern_opt(&a, u, &pats, Mode::Inf).unwrap().0, one());
    }

    #[test]
    fn node_cap_is_reported() {
        let a = parse_model(EX51).unwrap();
        let pats = PatternSet::single(vec![StateSet::full(a.len()), set(&a, &["s5"])]);
        let err = stuttering_pattern_opt_capped(&a, a.state("s").unwrap(), &pats, Mode::Sup, 3).unwrap_err();
        assert!(err.is_resource_cap());
        assert!(err.to_string().contains("stutter-nodes"));
    }
}
