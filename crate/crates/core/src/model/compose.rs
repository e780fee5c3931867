use crate::model::automaton::{AutomatonBuilder, Distribution, ProbAutomaton, StateId};

/// Index of the product state `(i, j)` in `interleave(a, b)`.
pub fn pair_index(b_len: usize, i: StateId, j: StateId) -> StateId {
    i * b_len + j
}

/// Interleaving composition `a ∥ b`.
///
/// Product states are named `(x,y)`; propositions are tagged `p@1` / `q@2`.
pub fn interleave(a: &ProbAutomaton, b: &ProbAutomaton) -> ProbAutomaton {
    let mut out = AutomatonBuilder::new(format!("{}_par_{}", a.name(), b.name()));
    let m = b.len();
    for i in a.states() {
        for j in b.states() {
            let labels = a
                .label(i)
                .iter()
                .map(|p| format!("{p}@1"))
                .chain(b.label(j).iter().map(|q| format!("{q}@2")));
            out.add_state(format!("({},{})", a.state_name(i), b.state_name(j)), labels)
                .expect("product names are unique");
        }
    }
    for i in a.states() {
        for j in b.states() {
            let here = pair_index(m, i, j);
            for mu in a.transitions(i) {
                out.add_transition(here, mu.map_states(|x| pair_index(m, x, j)));
            }
            for nu in b.transitions(j) {
                out.add_transition(here, nu.map_states(|y| pair_index(m, i, y)));
            }
        }
    }
    for &i in a.initial() {
        for &j in b.initial() {
            out.set_initial(pair_index(m, i, j));
        }
    }
    out.build()
}

/// Disjoint union; states of `b` are shifted by `a.len()` and renamed on clashes.
pub fn disjoint_union(a: &ProbAutomaton, b: &ProbAutomaton) -> ProbAutomaton {
    let mut out = AutomatonBuilder::new(format!("{}_plus_{}", a.name(), b.name()));
    for s in a.states() {
        out.add_state(a.state_name(s), a.label(s).iter().cloned()).expect("unique");
    }
    for s in b.states() {
        let mut name = b.state_name(s).to_string();
        while out.id(&name).is_some() {
            name.push('_');
        }
        out.add_state(name, b.label(s).iter().cloned()).expect("unique");
    }
    let shift = a.len();
    for s in a.states() {
        for mu in a.transitions(s) {
            out.add_transition(s, mu.clone());
        }
    }
    for s in b.states() {
        for mu in b.transitions(s) {
            out.add_transition(s + shift, mu.map_states(|x| x + shift));
        }
    }
    for &s in a.initial() {
        out.set_initial(s);
    }
    for &s in b.initial() {
        out.set_initial(s + shift);
    }
    out.build()
}

/// `μ × δ_t` style product helper used by tests.
pub fn product_dist(mu: &Distribution, nu: &Distribution, b_len: usize) -> Distribution {
    let parts: Vec<_> = mu
        .iter()
        .flat_map(|(x, p)| nu.iter().map(move |(y, q)| (pair_index(b_len, x, y), p * q)))
        .collect();
    Distribution::new(parts).expect("product of distributions is a distribution")
}
