//! Model checking for the supported fragments.
//!
//! A probability operator is decided against every scheduler: lower bounds
//! compare the infimum, upper bounds the supremum. Path formulae dispatch
//! on shape:
//! - a state formula is a one-set pattern;
//! - `φ₁ U≤n φ₂` over state formulae uses bounded reachability and
//!   `φ₁ U φ₂` unbounded reachability;
//! - other until-free formulae are compiled to the set of type sequences of
//!   length `depth + 1` that satisfy them, where a type is a class of states
//!   agreeing on every state leaf;
//! - next-free formulae built from state formulae, `∨` and `U` with a state
//!   left operand are compiled to patterns under stuttering closure.
//!
//! An outermost negation is handled by complement: the optimum of `¬ψ` is one
//! minus the opposite optimum of `ψ`.

use crate::error::{Error, Result};
use crate::logic::ast::{depth, PathFormula, StateFormula};
use crate::model::automaton::ProbAutomaton;
use crate::model::rational::{one, zero, Rational};
use crate::model::stateset::StateSet;
use crate::reach::pattern::pattern_values_all;
use crate::reach::stutter::{stuttering_values_all, DEFAULT_NODE_CAP};
use crate::reach::{bounded_reach_all, unbounded_reach_all, Mode, PatternSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    /// Largest depth compiled to type sequences.
    pub max_pattern_depth: usize,
    /// Largest number of type sequences explored during compilation.
    pub max_patterns: usize,
    /// Node cap for the stuttering product.
    pub stutter_node_cap: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { max_pattern_depth: 4, max_patterns: 1 << 16, stutter_node_cap: DEFAULT_NODE_CAP }
    }
}

/// Satisfaction per state.
pub fn check(a: &ProbAutomaton, phi: &StateFormula) -> Result<Vec<bool>> {
    let set = sat(a, phi)?;
    Ok(a.states().map(|s| set.contains(s)).collect())
}

pub fn sat(a: &ProbAutomaton, phi: &StateFormula) -> Result<StateSet> {
    sat_with(a, phi, &CheckOptions::default())
}

pub fn sat_with(a: &ProbAutomaton, phi: &StateFormula, opts: &CheckOptions) -> Result<StateSet> {
    let n = a.len();
    Ok(match phi {
        StateFormula::True => StateSet::full(n),
        StateFormula::False => StateSet::empty(n),
        StateFormula::Atom(p) => a.sat_atom(p),
        StateFormula::Not(f) => sat_with(a, f, opts)?.complement(),
        StateFormula::And(x, y) => sat_with(a, x, opts)?.intersection(&sat_with(a, y, opts)?),
        StateFormula::Or(x, y) => sat_with(a, x, opts)?.union(&sat_with(a, y, opts)?),
        StateFormula::Prob { cmp, q, path } => {
            let mode = if cmp.is_lower() { Mode::Inf } else { Mode::Sup };
            let values = path_values_with(a, path, mode, opts)?;
            StateSet::from_indices(n, a.states().filter(|&s| cmp.holds(&values[s], q)))
        }
    })
}

/// Optimal probability of the path event from every state.
pub fn path_values(a: &ProbAutomaton, psi: &PathFormula, mode: Mode) -> Result<Vec<Rational>> {
    path_values_with(a, psi, mode, &CheckOptions::default())
}

fn dual(mode: Mode) -> Mode {
    match mode {
        Mode::Sup => Mode::Inf,
        Mode::Inf => Mode::Sup,
    }
}

pub fn path_values_with(a: &ProbAutomaton, psi: &PathFormula, mode: Mode, opts: &CheckOptions) -> Result<Vec<Rational>> {
    if let Some(f) = psi.as_state() {
        let set = sat_with(a, &f, opts)?;
        return Ok(a.states().map(|s| if set.contains(s) { one() } else { zero() }).collect());
    }
    if let PathFormula::BoundedUntil(l, r, n) = psi {
        if let (Some(l), Some(r)) = (l.as_state(), r.as_state()) {
            return Ok(bounded_reach_all(a, &sat_with(a, &l, opts)?, &sat_with(a, &r, opts)?, *n, mode));
        }
    }
    if !psi.has_until() {
        let pats = compile_sequences(a, psi, opts)?;
        return Ok(pattern_values_all(a, &pats, mode));
    }
    if let PathFormula::Not(inner) = psi {
        let v = path_values_with(a, inner, dual(mode), opts)?;
        return Ok(v.into_iter().map(|x| one() - x).collect());
    }
    if let PathFormula::Until(l, r) = psi {
        if let (Some(l), Some(r)) = (l.as_state(), r.as_state()) {
            return Ok(unbounded_reach_all(a, &sat_with(a, &l, opts)?, &sat_with(a, &r, opts)?, mode));
        }
    }
    let pats = PatternSet::new(compile_stuttering(a, psi, opts)?);
    stuttering_values_all(a, &pats, mode, opts.stutter_node_cap)
}

/// Patterns whose stuttering closures together denote `psi`.
fn compile_stuttering(a: &ProbAutomaton, psi: &PathFormula, opts: &CheckOptions) -> Result<Vec<Vec<StateSet>>> {
    if let Some(f) = psi.as_state() {
        return Ok(vec![vec![sat_with(a, &f, opts)?]]);
    }
    match psi {
        PathFormula::Or(l, r) => {
            let mut out = compile_stuttering(a, l, opts)?;
            out.extend(compile_stuttering(a, r, opts)?);
            Ok(out)
        }
        PathFormula::Until(l, r) => {
            let Some(lf) = l.as_state() else {
                return Err(Error::Fragment(format!("until with a path left operand in `{psi}`")));
            };
            let head = sat_with(a, &lf, opts)?;
            Ok(compile_stuttering(a, r, opts)?
                .into_iter()
                .map(|tail| std::iter::once(head.clone()).chain(tail).collect())
                .collect())
        }
        PathFormula::Next(_) | PathFormula::BoundedUntil(..) => {
            Err(Error::Fragment(format!("next-step operator mixed with until in `{psi}`")))
        }
        PathFormula::Not(_) => Err(Error::Fragment(format!("inner negation over until in `{psi}`"))),
        PathFormula::And(..) => Err(Error::Fragment(format!("conjunction over until in `{psi}`"))),
        PathFormula::State(_) => unreachable!(),
    }
}

struct Types {
    /// Type of each state.
    of: Vec<usize>,
    /// Member states of each type.
    sets: Vec<StateSet>,
    /// Truth of each leaf on each type.
    truth: Vec<Vec<bool>>,
}

fn types(a: &ProbAutomaton, leaves: &[StateFormula], opts: &CheckOptions) -> Result<Types> {
    let sats: Vec<StateSet> = leaves.iter().map(|f| sat_with(a, f, opts)).collect::<Result<_>>()?;
    let mut keys: Vec<Vec<bool>> = Vec::new();
    let mut of = Vec::with_capacity(a.len());
    for s in a.states() {
        let key: Vec<bool> = sats.iter().map(|set| set.contains(s)).collect();
        let t = match keys.iter().position(|k| *k == key) {
            Some(t) => t,
            None => {
                keys.push(key);
                keys.len() - 1
            }
        };
        of.push(t);
    }
    let sets = (0..keys.len()).map(|t| StateSet::from_indices(a.len(), a.states().filter(|&s| of[s] == t))).collect();
    Ok(Types { of, sets, truth: keys })
}

fn eval(p: &PathFormula, seq: &[usize], pos: usize, leaves: &[StateFormula], ty: &Types) -> bool {
    if let Some(f) = p.as_state() {
        let k = leaves.iter().position(|g| *g == f).expect("leaf collected");
        return ty.truth[seq[pos]][k];
    }
    match p {
        PathFormula::Not(q) => !eval(q, seq, pos, leaves, ty),
        PathFormula::And(x, y) => eval(x, seq, pos, leaves, ty) && eval(y, seq, pos, leaves, ty),
        PathFormula::Or(x, y) => eval(x, seq, pos, leaves, ty) || eval(y, seq, pos, leaves, ty),
        PathFormula::Next(q) => eval(q, seq, pos + 1, leaves, ty),
        PathFormula::BoundedUntil(x, y, n) => (0..=*n).any(|j| {
            eval(y, seq, pos + j, leaves, ty) && (0..j).all(|k| eval(x, seq, pos + k, leaves, ty))
        }),
        PathFormula::Until(..) | PathFormula::State(_) => unreachable!(),
    }
}

/// Satisfying type sequences of length `depth + 1` as a pattern set.
fn compile_sequences(a: &ProbAutomaton, psi: &PathFormula, opts: &CheckOptions) -> Result<PatternSet> {
    let d = depth(psi)?;
    if d > opts.max_pattern_depth {
        return Err(Error::ResourceCap { cap: "pattern-depth", limit: opts.max_pattern_depth });
    }
    let leaves = psi.state_leaves();
    let ty = types(a, &leaves, opts)?;
    // Types that can follow each type in one step.
    let follow: Vec<Vec<usize>> = ty
        .sets
        .iter()
        .map(|set| {
            let mut next: Vec<usize> = set.iter().flat_map(|s| a.successors(s).iter().map(|t| ty.of[t]).collect::<Vec<_>>()).collect();
            next.sort_unstable();
            next.dedup();
            next
        })
        .collect();

    let mut out = Vec::new();
    let mut visited = 0usize;
    let mut stack: Vec<Vec<usize>> = (0..ty.sets.len()).map(|t| vec![t]).collect();
    while let Some(seq) = stack.pop() {
        visited += 1;
        if visited > opts.max_patterns {
            return Err(Error::ResourceCap { cap: "pattern-sequences", limit: opts.max_patterns });
        }
        if seq.len() == d + 1 {
            if eval(psi, &seq, 0, &leaves, &ty) {
                out.push(seq.iter().map(|&t| ty.sets[t].clone()).collect());
            }
            continue;
        }
        for &t in &follow[*seq.last().unwrap()] {
            let mut longer = seq.clone();
            longer.push(t);
            stack.push(longer);
        }
    }
    Ok(PatternSet::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parser::{parse_formula, parse_path};
    use crate::model::format::parse_model;
    use crate::model::rational::ratio;

    const EX35: &str = "\
pa ex35
state s label top
state r label top
state s1 label l1
state s2 label l2
state s3 label l3
absorbing s4 label l4
trans s -> 0.3:s1 0.3:s2 0.4:s3
trans s -> 0.5:s1 0.4:s2 0.1:s3
trans r -> 0.3:s1 0.3:s2 0.4:s3
trans r -> 0.4:s1 0.3:s2 0.3:s3
trans r -> 0.5:s1 0.4:s2 0.1:s3
trans s1 -> 0.6:s1 0.4:s4
trans s2 -> 1:s4
trans s3 -> 0.5:s3 0.5:s4
";

    const EX51: &str = "\
pa ex51
state s label top
state r label top
state s1 label l1
absorbing s2 label l2
state s3 label l3
absorbing s4 label l4
absorbing s5 label l5
trans s -> 0.3:s1 0.3:s2 0.4:s3
trans s -> 0.5:s1 0.4:s2 0.1:s3
trans r -> 0.3:s1 0.3:s2 0.4:s3
trans r -> 0.4:s1 0.3:s2 0.3:s3
trans r -> 0.5:s1 0.4:s2 0.1:s3
trans s1 -> 0.4:s4 0.6:s5
trans s3 -> 0.4:s4 0.6:s5
";

    fn holds(a: &ProbAutomaton, f: &str, state: &str) -> bool {
        check(a, &parse_formula(f).unwrap()).unwrap()[a.state(state).unwrap()]
    }

    #[test]
    fn depth_two_conjunction() {
        let a = parse_model(EX35).unwrap();
        let f = "P<=0.38 [ X (l1|l3) & X X (l1|l3) ]";
        assert!(holds(&a, f, "s"));
        assert!(!holds(&a, f, "r"));
        let v = path_values(&a, &parse_path("X (l1|l3) & X X (l1|l3)").unwrap(), Mode::Sup).unwrap();
        assert_eq!(v[a.state("r").unwrap()], ratio(39, 100));
    }

    #[test]
    fn two_until_disjunction() {
        let a = parse_model(EX51).unwrap();
        let f = "P<=0.34 [ (top|l1) U l5 | (top|l3) U l4 ]";
        assert!(holds(&a, f, "s"));
        assert!(!holds(&a, f, "r"));
        let g = "P>=0.66 [ !((top|l1) U l5 | (top|l3) U l4) ]";
        assert!(holds(&a, g, "s"));
        assert!(!holds(&a, g, "r"));
    }

    #[test]
    fn vacuous_bound_and_negation() {
        let a = parse_model(EX51).unwrap();
        for f in ["P>=0 [ X l1 ]", "P>=0 [ l1 U l5 ]", "P<=1 [ X X l4 ]"] {
            assert!(check(&a, &parse_formula(f).unwrap()).unwrap().iter().all(|&b| b));
        }
        let phi = parse_formula("P>0.2 [ top U<=2 l5 ]").unwrap();
        let yes = check(&a, &phi).unwrap();
        let no = check(&a, &phi.clone().not()).unwrap();
        assert!(yes.iter().zip(&no).all(|(x, y)| x != y));
    }

    #[test]
    fn bounded_zero_is_target() {
        let a = parse_model(EX51).unwrap();
        let v = path_values(&a, &parse_path("top U<=0 l1").unwrap(), Mode::Inf).unwrap();
        let t = a.sat_atom("l1");
        for s in a.states() {
            assert_eq!(v[s], if t.contains(s) { one() } else { zero() });
        }
    }

    #[test]
    fn unsupported_mixtures() {
        let a = parse_model(EX51).unwrap();
        for f in ["P>=0.5 [ X (a U b) ]", "P>=0.5 [ !(a U b) | c U d ]", "P>=0.5 [ (a U b) U c ]", "P>=0.5 [ a U b & c U d ]"] {
            assert!(matches!(check(&a, &parse_formula(f).unwrap()), Err(Error::Fragment(_))), "{f}");
        }
        let deep = parse_formula("P>=0.5 [ X X X X X top ]").unwrap();
        assert!(check(&a, &deep).unwrap_err().is_resource_cap());
    }

    #[test]
    fn bounded_until_expands_inside_boolean_paths() {
        let a = parse_model(EX51).unwrap();
        let direct = path_values(&a, &parse_path("top U<=2 l5").unwrap(), Mode::Sup).unwrap();
        let via_sequences = path_values(&a, &parse_path("(top U<=2 l5) & true").unwrap(), Mode::Sup).unwrap();
        assert_eq!(direct, via_sequences);
        let or_form = path_values(&a, &parse_path("(top U<=2 l5) | false").unwrap(), Mode::Inf).unwrap();
        assert_eq!(or_form, path_values(&a, &parse_path("top U<=2 l5").unwrap(), Mode::Inf).unwrap());
    }
}
