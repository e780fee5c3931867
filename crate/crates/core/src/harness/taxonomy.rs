//! Every relation of the catalog on one automaton, and which inclusions
//! between them hold.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::automaton::ProbAutomaton;
use crate::model::relation::Relation;
use crate::relations::{compute, Caps, RelationName, RelationQuery};

/// One computed relation.
#[derive(Clone, Debug)]
pub struct Node {
    pub label: String,
    pub query: RelationQuery,
    /// `None` when a cap stopped the computation.
    pub relation: Option<Relation>,
    pub caps_hit: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Taxonomy {
    pub nodes: Vec<Node>,
    /// `expected[x][y]`: node x is expected to be contained in node y.
    pub expected: Vec<Vec<bool>>,
}

/// A containment that should hold and does not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub smaller: String,
    pub larger: String,
    pub pair: (String, String),
}

fn label(name: RelationName, depth: Option<usize>) -> String {
    match depth {
        Some(i) => format!("{name}({i})"),
        None => name.to_string(),
    }
}

/// The expected inclusion edges between labels, before closure.
fn edges(max_depth: usize) -> Vec<(String, String)> {
    use RelationName::*;
    let d = |n: RelationName, i: usize| label(n, Some(i));
    let p = |n: RelationName| label(n, None);
    let mut out = vec![
        (p(StrongProbBisim), p(BranchingProbBisim)),
        (p(BranchingProbBisim), p(WeakBranchingBisim)),
        (p(BranchingProbBisim), p(WeakBisim)),
        (p(WeakBisim), p(WeakBranchingBisim)),
        (p(StrongProbBisim), p(StrongProbSim)),
        (p(WeakSim), p(WeakBranchingSim)),
        (d(StrongBranchingI, 1), p(Strong1)),
        (p(Strong1), d(StrongBranchingI, 1)),
        (d(StrongI, 1), d(StrongBranchingI, 1)),
        (d(StrongBranchingI, 1), d(StrongI, 1)),
    ];
    for i in 1..=max_depth {
        out.push((p(StrongProbBisim), d(StrongI, i)));
        out.push((d(StrongI, i), d(StrongBranchingI, i)));
        out.push((p(StrongProbSim), d(BranchingSimI, i)));
        out.push((d(SimI, i), d(BranchingSimI, i)));
        if i < max_depth {
            for n in [StrongBranchingI, StrongI, BranchingSimI, SimI] {
                out.push((d(n, i + 1), d(n, i)));
            }
        }
    }
    out
}

impl Taxonomy {
    /// Computes every relation, indexed ones at depths `1..=max_depth`.
    pub fn compute(a: &ProbAutomaton, max_depth: usize, caps: &Caps) -> Result<Taxonomy> {
        if max_depth == 0 {
            return Err(Error::Query("taxonomy depth must be at least 1".into()));
        }
        let mut nodes = Vec::new();
        for name in RelationName::ALL {
            let depths: Vec<Option<usize>> =
                if name.needs_depth() { (1..=max_depth).map(Some).collect() } else { vec![None] };
            for depth in depths {
                let mut query = RelationQuery::new(name).caps(caps.clone());
                if let Some(i) = depth {
                    query = query.depth(i);
                }
                let (relation, caps_hit) = match compute(a, &query) {
                    Ok(o) => (Some(o.relation), o.caps_hit.into_iter().collect()),
                    Err(Error::ResourceCap { cap, limit }) => (None, vec![format!("{cap}={limit}")]),
                    Err(e) => return Err(e),
                };
                nodes.push(Node { label: label(name, depth), query, relation, caps_hit });
            }
        }
        let n = nodes.len();
        let index = |l: &str| nodes.iter().position(|x| x.label == l).expect("edge names a node");
        let mut expected = vec![vec![false; n]; n];
        for (x, row) in expected.iter_mut().enumerate() {
            row[x] = true;
        }
        for (x, y) in edges(max_depth) {
            expected[index(&x)][index(&y)] = true;
        }
        for k in 0..n {
            for x in 0..n {
                if expected[x][k] {
                    for y in 0..n {
                        if expected[k][y] {
                            expected[x][y] = true;
                        }
                    }
                }
            }
        }
        Ok(Taxonomy { nodes, expected })
    }

    /// Observed containment; `None` if either side hit a cap.
    pub fn observed(&self, x: usize, y: usize) -> Option<bool> {
        Some(self.nodes[x].relation.as_ref()?.is_subset(self.nodes[y].relation.as_ref()?))
    }

    pub fn violations(&self, a: &ProbAutomaton) -> Vec<Violation> {
        let mut out = Vec::new();
        for (x, row) in self.expected.iter().enumerate() {
            for (y, &want) in row.iter().enumerate() {
                if !want || self.observed(x, y) != Some(false) {
                    continue;
                }
                let (rx, ry) = (self.nodes[x].relation.as_ref().unwrap(), self.nodes[y].relation.as_ref().unwrap());
                let (s, r) = rx.pairs().find(|&(s, r)| !ry.contains(s, r)).expect("not a subset");
                out.push(Violation {
                    smaller: self.nodes[x].label.clone(),
                    larger: self.nodes[y].label.clone(),
                    pair: (a.state_name(s).to_string(), a.state_name(r).to_string()),
                });
            }
        }
        out
    }

    pub fn capped(&self) -> bool {
        self.nodes.iter().any(|n| n.relation.is_none())
    }

    /// The matrix, one row per relation. Cells: `<` contained as expected,
    /// `!` expected but not contained, `+` contained though not expected,
    /// `.` neither, `?` unknown because of a cap.
    pub fn render(&self, a: &ProbAutomaton) -> String {
        let mut out = String::new();
        let width = self.nodes.iter().map(|n| n.label.len()).max().unwrap_or(0);
        let _ = writeln!(out, "relations of {} ({} states)", a.name(), a.len());
        for (x, node) in self.nodes.iter().enumerate() {
            let _ = write!(out, "{:>2} {:<width$} ", x, node.label);
            for y in 0..self.nodes.len() {
                let c = match (self.observed(x, y), self.expected[x][y]) {
                    (None, _) => '?',
                    (Some(true), true) => '<',
                    (Some(false), true) => '!',
                    (Some(true), false) => '+',
                    (Some(false), false) => '.',
                };
                out.push(c);
            }
            match &node.relation {
                Some(rel) => {
                    let _ = write!(out, "  pairs {}", rel.pair_count());
                }
                None => out.push_str("  capped"),
            }
            if !node.caps_hit.is_empty() {
                let _ = write!(out, " [{}]", node.caps_hit.join(", "));
            }
            out.push('\n');
        }
        let violations = self.violations(a);
        let _ = writeln!(out, "violations: {}", violations.len());
        for v in &violations {
            let _ = writeln!(out, "  {} not within {}: ({},{})", v.smaller, v.larger, v.pair.0, v.pair.1);
        }
        out
    }
}
