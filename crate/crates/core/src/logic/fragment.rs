//! Sublogic membership and the depth-one normal form.

use std::fmt;

use crate::error::{Error, Result};
use crate::logic::ast::{depth, Cmp, PathFormula, StateFormula};
use crate::model::rational::{one, zero};

/// Sublogics of PCTL*. Indexed tags carry the least index the formula fits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FragmentTag {
    Pctl,
    PctlMinus,
    PctlMinusI(usize),
    PctlStar,
    PctlStarMinus,
    PctlStarMinusI(usize),
    PctlNoNext,
    PctlStarNoNext,
    PctlSafe,
    PctlStarSafe,
}

impl fmt::Display for FragmentTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FragmentTag::Pctl => write!(f, "PCTL"),
            FragmentTag::PctlMinus => write!(f, "PCTL-"),
            FragmentTag::PctlMinusI(i) => write!(f, "PCTL-{i}"),
            FragmentTag::PctlStar => write!(f, "PCTL*"),
            FragmentTag::PctlStarMinus => write!(f, "PCTL*-"),
            FragmentTag::PctlStarMinusI(i) => write!(f, "PCTL*-{i}"),
            FragmentTag::PctlNoNext => write!(f, "PCTL\\X"),
            FragmentTag::PctlStarNoNext => write!(f, "PCTL*\\X"),
            FragmentTag::PctlSafe => write!(f, "PCTLs"),
            FragmentTag::PctlStarSafe => write!(f, "PCTL*s"),
        }
    }
}

impl std::str::FromStr for FragmentTag {
    type Err = Error;

    /// Accepts the display forms, e.g. `PCTL-2`, `PCTL*-`, `PCTL\\X`, `PCTL*s`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Query(format!("unknown fragment `{s}`"));
        let upper = s.trim().to_ascii_uppercase();
        let (star, rest) = match upper.strip_prefix("PCTL*") {
            Some(rest) => (true, rest),
            None => (false, upper.strip_prefix("PCTL").ok_or_else(bad)?),
        };
        let tag = match rest {
            "" => if star { FragmentTag::PctlStar } else { FragmentTag::Pctl },
            "-" => if star { FragmentTag::PctlStarMinus } else { FragmentTag::PctlMinus },
            "\\X" => if star { FragmentTag::PctlStarNoNext } else { FragmentTag::PctlNoNext },
            "S" => if star { FragmentTag::PctlStarSafe } else { FragmentTag::PctlSafe },
            _ => {
                let i: usize = rest.strip_prefix('-').and_then(|d| d.parse().ok()).ok_or_else(bad)?;
                if i == 0 {
                    return Err(bad());
                }
                if star { FragmentTag::PctlStarMinusI(i) } else { FragmentTag::PctlMinusI(i) }
            }
        };
        Ok(tag)
    }
}

fn prob_nodes<'a>(phi: &'a StateFormula, out: &mut Vec<(Cmp, &'a PathFormula)>) {
    match phi {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => {}
        StateFormula::Not(f) => prob_nodes(f, out),
        StateFormula::And(a, b) | StateFormula::Or(a, b) => {
            prob_nodes(a, out);
            prob_nodes(b, out);
        }
        StateFormula::Prob { cmp, path, .. } => {
            out.push((*cmp, path));
            for leaf in path_state_children(path) {
                prob_nodes(leaf, out);
            }
        }
    }
}

fn path_state_children(p: &PathFormula) -> Vec<&StateFormula> {
    match p {
        PathFormula::State(f) => vec![f],
        PathFormula::Not(q) | PathFormula::Next(q) => path_state_children(q),
        PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Until(a, b) | PathFormula::BoundedUntil(a, b, _) => {
            let mut v = path_state_children(a);
            v.extend(path_state_children(b));
            v
        }
    }
}

/// Negation only on atoms, at state level, including inside paths.
fn safe_state(phi: &StateFormula) -> bool {
    match phi {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => true,
        StateFormula::Not(f) => matches!(**f, StateFormula::Atom(_)),
        StateFormula::And(a, b) | StateFormula::Or(a, b) => safe_state(a) && safe_state(b),
        StateFormula::Prob { cmp, path, .. } => *cmp == Cmp::Ge && safe_path(path),
    }
}

fn safe_path(p: &PathFormula) -> bool {
    match p {
        PathFormula::State(f) => safe_state(f),
        PathFormula::Not(_) => false,
        PathFormula::Next(q) => safe_path(q),
        PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Until(a, b) | PathFormula::BoundedUntil(a, b, _) => {
            safe_path(a) && safe_path(b)
        }
    }
}

fn pctl_shape(p: &PathFormula, until: bool, bounded: bool, next: bool) -> bool {
    match p {
        PathFormula::Next(q) => next && matches!(**q, PathFormula::State(_)),
        PathFormula::Until(a, b) => until && matches!((&**a, &**b), (PathFormula::State(_), PathFormula::State(_))),
        PathFormula::BoundedUntil(a, b, _) => bounded && matches!((&**a, &**b), (PathFormula::State(_), PathFormula::State(_))),
        _ => false,
    }
}

fn max_bound(p: &PathFormula) -> usize {
    match p {
        PathFormula::BoundedUntil(_, _, n) => *n,
        _ => 0,
    }
}

/// All fragments `phi` belongs to, with least indices for the indexed ones.
pub fn classify(phi: &StateFormula) -> Vec<FragmentTag> {
    let mut probs = Vec::new();
    prob_nodes(phi, &mut probs);
    let paths: Vec<&PathFormula> = probs.iter().map(|(_, p)| *p).collect();
    let all = |f: &dyn Fn(&PathFormula) -> bool| paths.iter().all(|p| f(p));

    let mut tags = Vec::new();
    let pctl = all(&|p| pctl_shape(p, true, true, true));
    let pctl_minus = all(&|p| pctl_shape(p, false, true, true));
    let star = all(&|p| !p.has_bounded_until());
    let star_minus = star && all(&|p| !p.has_until());
    if pctl {
        tags.push(FragmentTag::Pctl);
    }
    if pctl_minus {
        tags.push(FragmentTag::PctlMinus);
        let i = paths.iter().map(|p| max_bound(p)).max().unwrap_or(0).max(1);
        tags.push(FragmentTag::PctlMinusI(i));
    }
    if star {
        tags.push(FragmentTag::PctlStar);
    }
    if star_minus {
        tags.push(FragmentTag::PctlStarMinus);
        let i = paths.iter().map(|p| depth(p).unwrap_or(0)).max().unwrap_or(0).max(1);
        tags.push(FragmentTag::PctlStarMinusI(i));
    }
    if all(&|p| pctl_shape(p, true, false, false)) {
        tags.push(FragmentTag::PctlNoNext);
    }
    if star && all(&|p| !p.has_next()) {
        tags.push(FragmentTag::PctlStarNoNext);
    }
    if safe_state(phi) {
        if pctl {
            tags.push(FragmentTag::PctlSafe);
        }
        if star {
            tags.push(FragmentTag::PctlStarSafe);
        }
    }
    tags
}

/// Membership, treating indexed tags as "index at most".
pub fn in_fragment(phi: &StateFormula, tag: FragmentTag) -> bool {
    classify(phi).into_iter().any(|t| match (t, tag) {
        (FragmentTag::PctlMinusI(have), FragmentTag::PctlMinusI(want)) => have <= want,
        (FragmentTag::PctlStarMinusI(have), FragmentTag::PctlStarMinusI(want)) => have <= want,
        (a, b) => a == b,
    })
}

fn constant(b: bool) -> StateFormula {
    if b {
        StateFormula::True
    } else {
        StateFormula::False
    }
}

/// Positions-0 leaves of a depth-one path formula, and the operands of `X`.
fn split_leaves(p: &PathFormula, now: &mut Vec<StateFormula>) -> Result<()> {
    if let Some(f) = p.as_state() {
        if !now.contains(&f) {
            now.push(f);
        }
        return Ok(());
    }
    match p {
        PathFormula::Next(q) => match q.as_state() {
            Some(_) => Ok(()),
            None => Err(Error::Fragment(format!("depth greater than one in `{p}`"))),
        },
        PathFormula::Not(q) => split_leaves(q, now),
        PathFormula::And(a, b) | PathFormula::Or(a, b) => {
            split_leaves(a, now)?;
            split_leaves(b, now)
        }
        PathFormula::Until(..) | PathFormula::BoundedUntil(..) => Err(Error::Fragment(format!("until in `{p}`"))),
        PathFormula::State(_) => unreachable!(),
    }
}

/// The formula the path denotes on the successor state, once the
/// position-0 leaves are fixed by `assign`.
fn residual(p: &PathFormula, now: &[StateFormula], assign: &[bool]) -> StateFormula {
    if let Some(f) = p.as_state() {
        let k = now.iter().position(|g| *g == f).expect("leaf collected");
        return constant(assign[k]);
    }
    match p {
        PathFormula::Next(q) => q.as_state().expect("depth checked"),
        PathFormula::Not(q) => residual(q, now, assign).not(),
        PathFormula::And(a, b) => residual(a, now, assign).and(residual(b, now, assign)),
        PathFormula::Or(a, b) => residual(a, now, assign).or(residual(b, now, assign)),
        _ => unreachable!("rejected by split_leaves"),
    }
}

/// Rewrites every probability operator over a depth-one, until-free path
/// into a boolean combination of `P⋈q [ X φ ]` and state formulae.
///
/// `P⋈q [ψ]` becomes `⋁_τ (τ ∧ P⋈q [X χ_τ])` over truth assignments τ to
/// the position-0 leaves of ψ, where χ_τ is ψ evaluated under τ with each
/// `X φ` read as φ. Constant successors fold to `1 ⋈ q` or `0 ⋈ q`.
pub fn normalize_depth1(phi: &StateFormula) -> Result<StateFormula> {
    Ok(match phi {
        StateFormula::True | StateFormula::False | StateFormula::Atom(_) => phi.clone(),
        StateFormula::Not(f) => normalize_depth1(f)?.not(),
        StateFormula::And(a, b) => normalize_depth1(a)?.and(normalize_depth1(b)?),
        StateFormula::Or(a, b) => normalize_depth1(a)?.or(normalize_depth1(b)?),
        StateFormula::Prob { cmp, q, path } => {
            let path = normalize_path_leaves(path)?;
            if path.has_until() || path.has_bounded_until() {
                return Err(Error::Fragment(format!("until in `{path}`")));
            }
            if depth(&path)? > 1 {
                return Err(Error::Fragment(format!("depth greater than one in `{path}`")));
            }
            if let PathFormula::Next(inner) = &path {
                if inner.as_state().is_some() {
                    return Ok(StateFormula::Prob { cmp: *cmp, q: q.clone(), path: Box::new(path) });
                }
            }
            let mut now = Vec::new();
            split_leaves(&path, &mut now)?;
            let mut out = StateFormula::False;
            for bits in 0..(1usize << now.len()) {
                let assign: Vec<bool> = (0..now.len()).map(|k| bits >> k & 1 == 1).collect();
                let guard = StateFormula::all(
                    now.iter().zip(&assign).map(|(f, &b)| if b { f.clone() } else { f.clone().not() }),
                );
                let next = residual(&path, &now, &assign);
                let body = match next {
                    StateFormula::True => constant(cmp.holds(&one(), q)),
                    StateFormula::False => constant(cmp.holds(&zero(), q)),
                    chi => StateFormula::prob(*cmp, q.clone(), PathFormula::next(PathFormula::state(chi))),
                };
                out = out.or(guard.and(body));
            }
            out
        }
    })
}

fn normalize_path_leaves(p: &PathFormula) -> Result<PathFormula> {
    Ok(match p {
        PathFormula::State(f) => PathFormula::state(normalize_depth1(f)?),
        PathFormula::Not(q) => PathFormula::Not(Box::new(normalize_path_leaves(q)?)),
        PathFormula::Next(q) => PathFormula::Next(Box::new(normalize_path_leaves(q)?)),
        PathFormula::And(a, b) => PathFormula::And(Box::new(normalize_path_leaves(a)?), Box::new(normalize_path_leaves(b)?)),
        PathFormula::Or(a, b) => PathFormula::Or(Box::new(normalize_path_leaves(a)?), Box::new(normalize_path_leaves(b)?)),
        PathFormula::Until(a, b) => PathFormula::Until(Box::new(normalize_path_leaves(a)?), Box::new(normalize_path_leaves(b)?)),
        PathFormula::BoundedUntil(a, b, n) => {
            PathFormula::BoundedUntil(Box::new(normalize_path_leaves(a)?), Box::new(normalize_path_leaves(b)?), *n)
        }
    })
}
