use std::fmt;

use crate::error::{Error, Result};
use crate::model::rational::Rational;

/// Comparison in a probability bound `P⋈q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cmp {
    Lt,
    Le,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds(self, value: &Rational, q: &Rational) -> bool {
        match self {
            Cmp::Lt => value < q,
            Cmp::Le => value <= q,
            Cmp::Ge => value >= q,
            Cmp::Gt => value > q,
        }
    }

    /// Lower bounds are decided by the infimum over schedulers.
    pub fn is_lower(self) -> bool {
        matches!(self, Cmp::Ge | Cmp::Gt)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateFormula {
    True,
    False,
    Atom(String),
    Not(Box<StateFormula>),
    And(Box<StateFormula>, Box<StateFormula>),
    Or(Box<StateFormula>, Box<StateFormula>),
    Prob { cmp: Cmp, q: Rational, path: Box<PathFormula> },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathFormula {
    State(Box<StateFormula>),
    Not(Box<PathFormula>),
    And(Box<PathFormula>, Box<PathFormula>),
    Or(Box<PathFormula>, Box<PathFormula>),
    Next(Box<PathFormula>),
    Until(Box<PathFormula>, Box<PathFormula>),
    BoundedUntil(Box<PathFormula>, Box<PathFormula>, usize),
}

impl StateFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        StateFormula::Atom(name.into())
    }

    pub fn prob(cmp: Cmp, q: Rational, path: PathFormula) -> Self {
        StateFormula::Prob { cmp, q, path: Box::new(path) }
    }

    /// Negation with constant folding and double-negation removal.
    pub fn not(self) -> Self {
        match self {
            StateFormula::True => StateFormula::False,
            StateFormula::False => StateFormula::True,
            StateFormula::Not(f) => *f,
            f => StateFormula::Not(Box::new(f)),
        }
    }

    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (StateFormula::False, _) | (_, StateFormula::False) => StateFormula::False,
            (StateFormula::True, f) | (f, StateFormula::True) => f,
            (a, b) => StateFormula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (StateFormula::True, _) | (_, StateFormula::True) => StateFormula::True,
            (StateFormula::False, f) | (f, StateFormula::False) => f,
            (a, b) => StateFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn all(parts: impl IntoIterator<Item = Self>) -> Self {
        parts.into_iter().fold(StateFormula::True, Self::and)
    }

    pub fn any(parts: impl IntoIterator<Item = Self>) -> Self {
        parts.into_iter().fold(StateFormula::False, Self::or)
    }

    /// Syntactic size (node count).
    pub fn size(&self) -> usize {
        match self {
            StateFormula::True | StateFormula::False | StateFormula::Atom(_) => 1,
            StateFormula::Not(f) => 1 + f.size(),
            StateFormula::And(a, b) | StateFormula::Or(a, b) => 1 + a.size() + b.size(),
            StateFormula::Prob { path, .. } => 1 + path.size(),
        }
    }
}

impl PathFormula {
    pub fn state(f: StateFormula) -> Self {
        PathFormula::State(Box::new(f))
    }

    pub fn next(p: PathFormula) -> Self {
        PathFormula::Next(Box::new(p))
    }

    pub fn until(l: PathFormula, r: PathFormula) -> Self {
        PathFormula::Until(Box::new(l), Box::new(r))
    }

    pub fn bounded_until(l: PathFormula, r: PathFormula, n: usize) -> Self {
        PathFormula::BoundedUntil(Box::new(l), Box::new(r), n)
    }

    pub fn not(self) -> Self {
        match self {
            PathFormula::Not(p) => *p,
            PathFormula::State(f) => PathFormula::state(f.not()),
            p => PathFormula::Not(Box::new(p)),
        }
    }

    pub fn and(self, other: Self) -> Self {
        match (self, other) {
            (PathFormula::State(a), PathFormula::State(b)) => PathFormula::state(a.and(*b)),
            (a, b) => PathFormula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(self, other: Self) -> Self {
        match (self, other) {
            (PathFormula::State(a), PathFormula::State(b)) => PathFormula::state(a.or(*b)),
            (a, b) => PathFormula::Or(Box::new(a), Box::new(b)),
        }
    }

    /// The state formula this path formula is equivalent to, if it only
    /// constrains the first state of a path.
    pub fn as_state(&self) -> Option<StateFormula> {
        match self {
            PathFormula::State(f) => Some((**f).clone()),
            PathFormula::Not(p) => p.as_state().map(StateFormula::not),
            PathFormula::And(a, b) => Some(a.as_state()?.and(b.as_state()?)),
            PathFormula::Or(a, b) => Some(a.as_state()?.or(b.as_state()?)),
            _ => None,
        }
    }

    pub fn has_until(&self) -> bool {
        self.any_node(&|p| matches!(p, PathFormula::Until(..)))
    }

    pub fn has_next(&self) -> bool {
        self.any_node(&|p| matches!(p, PathFormula::Next(_)))
    }

    pub fn has_bounded_until(&self) -> bool {
        self.any_node(&|p| matches!(p, PathFormula::BoundedUntil(..)))
    }

    /// Whether `pred` holds at some path node (state subformulae are not entered).
    pub fn any_node(&self, pred: &dyn Fn(&PathFormula) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            PathFormula::State(_) => false,
            PathFormula::Not(p) | PathFormula::Next(p) => p.any_node(pred),
            PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Until(a, b) | PathFormula::BoundedUntil(a, b, _) => {
                a.any_node(pred) || b.any_node(pred)
            }
        }
    }

    /// Maximal state subformulae, left to right.
    pub fn state_leaves(&self) -> Vec<StateFormula> {
        fn go(p: &PathFormula, out: &mut Vec<StateFormula>) {
            if let Some(f) = p.as_state() {
                if !out.contains(&f) {
                    out.push(f);
                }
                return;
            }
            match p {
                PathFormula::State(_) => unreachable!(),
                PathFormula::Not(q) | PathFormula::Next(q) => go(q, out),
                PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Until(a, b) | PathFormula::BoundedUntil(a, b, _) => {
                    go(a, out);
                    go(b, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    pub fn size(&self) -> usize {
        match self {
            PathFormula::State(f) => f.size(),
            PathFormula::Not(p) | PathFormula::Next(p) => 1 + p.size(),
            PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::Until(a, b) | PathFormula::BoundedUntil(a, b, _) => {
                1 + a.size() + b.size()
            }
        }
    }

    /// Nesting depth of unbounded until.
    pub fn until_nesting(&self) -> usize {
        match self {
            PathFormula::State(_) => 0,
            PathFormula::Not(p) | PathFormula::Next(p) => p.until_nesting(),
            PathFormula::And(a, b) | PathFormula::Or(a, b) | PathFormula::BoundedUntil(a, b, _) => {
                a.until_nesting().max(b.until_nesting())
            }
            PathFormula::Until(a, b) => 1 + a.until_nesting().max(b.until_nesting()),
        }
    }
}

/// Maximum number of nested `X` operators in an until-free path formula.
///
/// `φ₁ U≤n φ₂` counts as its unfolding into `n` nested next operators.
pub fn depth(psi: &PathFormula) -> Result<usize> {
    Ok(match psi {
        PathFormula::State(_) => 0,
        PathFormula::Not(p) => depth(p)?,
        PathFormula::And(a, b) | PathFormula::Or(a, b) => depth(a)?.max(depth(b)?),
        PathFormula::Next(p) => 1 + depth(p)?,
        PathFormula::Until(..) => return Err(Error::DepthOfUntil),
        PathFormula::BoundedUntil(a, b, n) => {
            let (da, db) = (depth(a)?, depth(b)?);
            if *n == 0 {
                db
            } else {
                (n - 1 + da).max(n + db)
            }
        }
    })
}

impl fmt::Display for StateFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateFormula::True => write!(f, "true"),
            StateFormula::False => write!(f, "false"),
            StateFormula::Atom(a) => write!(f, "{a}"),
            StateFormula::Not(p) => write!(f, "!{p}"),
            StateFormula::And(a, b) => write!(f, "({a} & {b})"),
            StateFormula::Or(a, b) => write!(f, "({a} | {b})"),
            StateFormula::Prob { cmp, q, path } => write!(f, "P{}{} [ {} ]", cmp.symbol(), q, path),
        }
    }
}

impl fmt::Display for PathFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PathFormula::State(s) => write!(f, "{s}"),
            PathFormula::Not(p) => write!(f, "!{p}"),
            PathFormula::And(a, b) => write!(f, "({a} & {b})"),
            PathFormula::Or(a, b) => write!(f, "({a} | {b})"),
            PathFormula::Next(p) => write!(f, "X {p}"),
            PathFormula::Until(a, b) => write!(f, "({a} U {b})"),
            PathFormula::BoundedUntil(a, b, n) => write!(f, "({a} U<={n} {b})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> PathFormula {
        PathFormula::state(StateFormula::atom(n))
    }

    #[test]
    fn depth_clauses() {
        assert_eq!(depth(&PathFormula::next(PathFormula::next(a("a")))).unwrap(), 2);
        let f = PathFormula::And(Box::new(PathFormula::next(a("a"))), Box::new(PathFormula::next(PathFormula::next(a("b")))));
        assert_eq!(depth(&f).unwrap(), 2);
        assert_eq!(depth(&a("a")).unwrap(), 0);
        assert_eq!(depth(&PathFormula::until(a("a"), a("b"))), Err(Error::DepthOfUntil));
        assert_eq!(depth(&PathFormula::bounded_until(a("a"), a("b"), 2)).unwrap(), 2);
    }

    #[test]
    fn constant_folding() {
        let x = StateFormula::atom("x");
        assert_eq!(x.clone().and(StateFormula::True), x);
        assert_eq!(x.clone().or(StateFormula::True), StateFormula::True);
        assert_eq!(x.clone().not().not(), x);
        assert_eq!(PathFormula::Not(Box::new(a("x"))).as_state(), Some(x.not()));
    }
}
