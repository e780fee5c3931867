//! The regression corpus: every worked example as a model plus queries with
//! their expected answers.

use std::fmt;

use crate::error::Result;
use crate::logic::check::{check, path_values};
use crate::logic::fragment::FragmentTag;
use crate::logic::parser::{parse_formula, parse_path};
use crate::model::automaton::ProbAutomaton;
use crate::model::compose::interleave;
use crate::model::format::{parse_model, write_model};
use crate::model::rational::{ratio, show, Rational};
use crate::oracle::{logical_equiv, Equivalence, FormulaBudget};
use crate::reach::Mode;
use crate::relations::{relate, Caps, RelationName, RelationQuery};

pub const FIG1: &str = include_str!("../../fixtures/fig1.pa");
pub const COIN: &str = include_str!("../../fixtures/coin.pa");
pub const EX35: &str = include_str!("../../fixtures/ex35.pa");
pub const EX51: &str = include_str!("../../fixtures/ex51.pa");
pub const CE44: &str = include_str!("../../fixtures/ce44.pa");
pub const ALT: &str = include_str!("../../fixtures/alt.pa");

/// Where an expected answer comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Claimed by the worked example itself.
    Stated,
    /// Follows from the construction alone.
    Trivial,
    /// Computed here; names the independent computation that confirms it.
    Derived(&'static str),
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Stated => f.write_str("stated"),
            Basis::Trivial => f.write_str("trivial"),
            Basis::Derived(how) => write!(f, "derived: {how}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Relate { query: RelationQuery, left: String, right: String },
    Holds { formula: String, state: String },
    Value { path: String, state: String, mode: Mode },
    /// Oracle equivalence within a fragment.
    Equiv { fragment: FragmentTag, left: String, right: String },
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Relate { query, left, right } => {
                write!(f, "relate {}", query.name)?;
                if let Some(i) = query.depth {
                    write!(f, " depth {i}")?;
                }
                if let Some(d) = query.direction {
                    write!(f, " direction {d}")?;
                }
                if query.caps.principal_only {
                    f.write_str(" principal-only")?;
                }
                write!(f, " {left},{right}")
            }
            Op::Holds { formula, state } => write!(f, "holds {formula} at {state}"),
            Op::Value { path, state, mode } => write!(f, "{mode:?} of [ {path} ] at {state}"),
            Op::Equiv { fragment, left, right } => write!(f, "{fragment}-equivalent {left},{right}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Yes,
    No,
    Value(Rational),
}

impl Answer {
    fn from_bool(b: bool) -> Self {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Yes => f.write_str("yes"),
            Answer::No => f.write_str("no"),
            Answer::Value(q) => f.write_str(&show(q)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub op: Op,
    pub expected: Answer,
    pub basis: Basis,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub model: String,
    pub queries: Vec<Query>,
}

impl Fixture {
    pub fn automaton(&self) -> Result<ProbAutomaton> {
        parse_model(&self.model)
    }
}

#[derive(Clone, Debug)]
pub struct QueryOutcome {
    pub query: Query,
    pub actual: std::result::Result<Answer, String>,
}

impl QueryOutcome {
    pub fn passed(&self) -> bool {
        self.actual.as_ref() == Ok(&self.query.expected)
    }
}

fn rel(name: RelationName, depth: Option<usize>, l: &str, r: &str, expected: bool, basis: Basis) -> Query {
    let mut query = RelationQuery::new(name);
    query.depth = depth;
    Query { op: Op::Relate { query, left: l.into(), right: r.into() }, expected: Answer::from_bool(expected), basis }
}

fn principal(l: &str, r: &str, expected: bool, basis: Basis) -> Query {
    let caps = Caps { principal_only: true, ..Caps::default() };
    let query = RelationQuery::new(RelationName::Strong1).caps(caps);
    Query { op: Op::Relate { query, left: l.into(), right: r.into() }, expected: Answer::from_bool(expected), basis }
}

fn holds(formula: &str, state: &str, expected: bool, basis: Basis) -> Query {
    Query { op: Op::Holds { formula: formula.into(), state: state.into() }, expected: Answer::from_bool(expected), basis }
}

fn value(path: &str, state: &str, mode: Mode, v: Rational, basis: Basis) -> Query {
    Query { op: Op::Value { path: path.into(), state: state.into(), mode }, expected: Answer::Value(v), basis }
}

fn equiv(fragment: FragmentTag, l: &str, r: &str, expected: bool, basis: Basis) -> Query {
    Query { op: Op::Equiv { fragment, left: l.into(), right: r.into() }, expected: Answer::from_bool(expected), basis }
}

const ENUM: &str = "horizon scheduler enumeration";
const ORACLE: &str = "logical oracle";
const HULL: &str = "convex-hull feasibility";

/// Path event of the non-congruence example over the coin product.
pub const CE410_PATH: &str = "((top@1 & c@2) | (a1@1 & c@2) | (a3@1 & c@2)) U<=2 ((a1@1 & c2@2) | (a3@1 & c1@2))";
/// Its unbounded counterpart.
pub const CE53_PATH: &str = "((top@1 & c@2) | (a1@1 & c@2) | (a3@1 & c@2)) U ((a1@1 & c2@2) | (a3@1 & c1@2))";
pub const EX35_STAR: &str = "X (a1 | a3) & X X (a1 | a3)";
pub const EX51_STAR: &str = "((top | a1) U a5) | ((top | a3) U a4)";

/// `fig1 ∥ coin`, where the non-congruence examples live.
pub fn coin_product() -> ProbAutomaton {
    let a = parse_model(FIG1).expect("fixture parses");
    interleave(&a, &parse_model(COIN).expect("fixture parses"))
}

/// All fixtures, in a fixed order.
pub fn corpus() -> Vec<Fixture> {
    use Basis::*;
    use RelationName::*;
    let product = write_model(&coin_product());
    let (st, rt) = ("(s,t)", "(r,t)");
    let ce410_phi = format!("P<=0.34 [ {CE410_PATH} ]");
    let ce53_phi = format!("P<=0.34 [ {CE53_PATH} ]");
    vec![
        Fixture {
            name: "fig1",
            model: FIG1.into(),
            queries: vec![
                rel(StrongProbBisim, None, "s", "r", false, Stated),
                rel(Strong1, None, "s", "r", true, Stated),
                rel(StrongBranchingI, Some(1), "s", "r", true, Stated),
                rel(StrongBranchingI, Some(2), "s", "r", true, Stated),
                rel(StrongBranchingI, Some(3), "s", "r", true, Stated),
                rel(StrongBranchingI, Some(4), "s", "r", true, Stated),
                rel(StrongI, Some(2), "s", "r", true, Derived(ORACLE)),
                rel(WeakBranchingBisim, None, "s", "r", true, Derived(ORACLE)),
                rel(WeakBisim, None, "s", "r", true, Derived(ORACLE)),
                rel(BranchingProbBisim, None, "s", "r", false, Derived(HULL)),
                rel(StrongProbSim, None, "s", "r", true, Derived(HULL)),
                rel(StrongProbSim, None, "r", "s", false, Derived(HULL)),
                rel(BranchingSimI, Some(1), "s", "r", true, Derived(ORACLE)),
                rel(BranchingSimI, Some(1), "r", "s", true, Derived(ORACLE)),
                equiv(FragmentTag::Pctl, "s", "r", true, Stated),
                equiv(FragmentTag::PctlStarMinusI(2), "s", "r", true, Stated),
                value("X a1", "s", Mode::Sup, ratio(1, 2), Trivial),
                value("X a1", "r", Mode::Inf, ratio(3, 10), Trivial),
            ],
        },
        Fixture {
            name: "coin",
            model: COIN.into(),
            queries: vec![
                value("X c1", "t", Mode::Sup, ratio(2, 5), Trivial),
                value("X c1", "t", Mode::Inf, ratio(2, 5), Trivial),
            ],
        },
        Fixture {
            name: "ex35",
            model: EX35.into(),
            queries: vec![
                holds(&format!("P<=0.38 [ {EX35_STAR} ]"), "s", true, Stated),
                holds(&format!("P<=0.38 [ {EX35_STAR} ]"), "r", false, Stated),
                value(EX35_STAR, "s", Mode::Sup, ratio(19, 50), Derived(ENUM)),
                value(EX35_STAR, "r", Mode::Sup, ratio(39, 100), Derived(ENUM)),
                rel(StrongI, Some(2), "s", "r", false, Stated),
                rel(StrongBranchingI, Some(1), "s", "r", true, Derived(ORACLE)),
                rel(StrongBranchingI, Some(2), "s", "r", true, Derived(ORACLE)),
                rel(StrongBranchingI, Some(3), "s", "r", false, Derived(ORACLE)),
                holds("P<=0.6 [ (top | a1 | a3 | a4) U<=3 (a1 | a4) ]", "s", true, Derived(ENUM)),
                holds("P<=0.6 [ (top | a1 | a3 | a4) U<=3 (a1 | a4) ]", "r", false, Derived(ENUM)),
                equiv(FragmentTag::PctlMinusI(1), "s", "r", true, Derived(ORACLE)),
                equiv(FragmentTag::PctlMinusI(2), "s", "r", false, Derived(ORACLE)),
                holds("P>=0.62 [ true U<=2 a4 ]", "s", true, Derived(ENUM)),
                holds("P>=0.62 [ true U<=2 a4 ]", "r", false, Derived(ENUM)),
                equiv(FragmentTag::PctlStarMinusI(2), "s", "r", false, Stated),
            ],
        },
        Fixture {
            name: "ex51",
            model: EX51.into(),
            queries: vec![
                rel(WeakBisim, None, "s", "r", false, Stated),
                value(EX51_STAR, "s", Mode::Sup, ratio(17, 50), Derived(ENUM)),
                value(EX51_STAR, "r", Mode::Sup, ratio(9, 25), Stated),
                holds(&format!("P<=0.34 [ {EX51_STAR} ]"), "s", true, Stated),
                holds(&format!("P<=0.34 [ {EX51_STAR} ]"), "r", false, Stated),
                rel(WeakBranchingBisim, None, "s", "r", false, Derived(ORACLE)),
                holds("P<=0.56 [ (top | a1 | a3 | a5) U (a1 | a5) ]", "s", true, Derived(ENUM)),
                holds("P<=0.56 [ (top | a1 | a3 | a5) U (a1 | a5) ]", "r", false, Derived(ENUM)),
                equiv(FragmentTag::PctlNoNext, "s", "r", false, Derived(ORACLE)),
                rel(WeakSim, None, "s", "r", true, Derived(ENUM)),
                rel(WeakSim, None, "r", "s", false, Derived(ENUM)),
            ],
        },
        Fixture {
            name: "ce44",
            model: CE44.into(),
            queries: vec![
                principal("s", "r", true, Stated),
                rel(Strong1, None, "s", "r", false, Derived(ORACLE)),
                holds("P>=0.5 [ X (l1 | l2) ]", "r", true, Stated),
                holds("P>=0.5 [ X (l1 | l2) ]", "s", false, Stated),
                equiv(FragmentTag::PctlMinusI(1), "s", "r", false, Derived(ORACLE)),
            ],
        },
        Fixture {
            name: "ce410",
            model: product.clone(),
            queries: vec![
                value(CE410_PATH, st, Mode::Sup, ratio(17, 50), Derived(ENUM)),
                value(CE410_PATH, rt, Mode::Sup, ratio(9, 25), Stated),
                holds(&ce410_phi, st, true, Stated),
                holds(&ce410_phi, rt, false, Stated),
                rel(Strong1, None, st, rt, true, Stated),
                rel(StrongBranchingI, Some(2), st, rt, false, Stated),
            ],
        },
        Fixture {
            name: "ce413",
            model: product.clone(),
            queries: vec![
                rel(StrongI, Some(2), st, rt, false, Stated),
                equiv(FragmentTag::PctlStarMinusI(2), st, rt, false, Derived(ORACLE)),
            ],
        },
        Fixture {
            name: "ce53",
            model: product.clone(),
            queries: vec![
                value(CE53_PATH, st, Mode::Sup, ratio(17, 50), Derived(ENUM)),
                value(CE53_PATH, rt, Mode::Sup, ratio(9, 25), Derived(ENUM)),
                holds(&ce53_phi, st, true, Stated),
                holds(&ce53_phi, rt, false, Stated),
                rel(WeakBranchingBisim, None, st, rt, false, Stated),
            ],
        },
        Fixture {
            name: "ce56",
            model: product,
            queries: vec![rel(WeakBisim, None, st, rt, false, Stated)],
        },
        Fixture {
            name: "alt",
            model: ALT.into(),
            queries: vec![
                holds("P<=0 [ X (P>=0.4 [ X a1 ] & P>=0.3 [ X a2 ] & P>=0.3 [ X a3 ]) ]", "s", true, Stated),
                holds("P<=0 [ X (P>=0.4 [ X a1 ] & P>=0.3 [ X a2 ] & P>=0.3 [ X a3 ]) ]", "r", false, Stated),
                rel(Strong1, None, "s", "r", false, Derived(ORACLE)),
                equiv(FragmentTag::PctlMinusI(2), "s", "r", false, Derived(ORACLE)),
            ],
        },
    ]
}

fn answer(a: &ProbAutomaton, op: &Op) -> Result<Answer> {
    Ok(match op {
        Op::Relate { query, left, right } => {
            let v = relate(a, query, Some((a.state(left)?, a.state(right)?)))?;
            Answer::from_bool(v.related == Some(true))
        }
        Op::Holds { formula, state } => Answer::from_bool(check(a, &parse_formula(formula)?)?[a.state(state)?]),
        Op::Value { path, state, mode } => Answer::Value(path_values(a, &parse_path(path)?, *mode)?[a.state(state)?].clone()),
        Op::Equiv { fragment, left, right } => {
            let budget = FormulaBudget::new(*fragment).depth(3);
            let v = logical_equiv(a, a.state(left)?, a.state(right)?, &budget)?;
            Answer::from_bool(matches!(v, Equivalence::Equivalent { .. }))
        }
    })
}

/// Runs every query of one fixture; errors are recorded, not raised.
pub fn run_fixture(f: &Fixture) -> Result<Vec<QueryOutcome>> {
    let a = f.automaton()?;
    Ok(f.queries
        .iter()
        .map(|q| QueryOutcome { query: q.clone(), actual: answer(&a, &q.op).map_err(|e| e.to_string()) })
        .collect())
}
