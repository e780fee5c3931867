use rand::seq::index::sample;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::automaton::{AutomatonBuilder, Distribution, ProbAutomaton};
use crate::model::rational::{one, ratio, zero, Rational};

/// Parameters of [`generate_random`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    pub states: usize,
    pub max_transitions: usize,
    /// Masses handed out when splitting one unit over a support; each in (0,1].
    pub grid: Vec<Rational>,
    pub alphabet: usize,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            seed: 0,
            states: 5,
            max_transitions: 2,
            grid: vec![ratio(1, 4), ratio(1, 2), ratio(3, 4), one()],
            alphabet: 2,
        }
    }
}

impl GenParams {
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn states(mut self, n: usize) -> Self {
        self.states = n;
        self
    }
}

/// Proposition name number `k`: `a`..`z`, then `p26`, `p27`, ...
pub fn prop_name(k: usize) -> String {
    if k < 26 {
        char::from(b'a' + k as u8).to_string()
    } else {
        format!("p{k}")
    }
}

/// One unit split over distinct targets with masses from the grid; the
/// last target takes whatever is left.
fn split(rng: &mut ChaCha8Rng, n: usize, grid: &[Rational]) -> Distribution {
    let size = rng.random_range(1..=n);
    let targets = sample(rng, n, size).into_vec();
    let mut left = one();
    let mut entries = Vec::new();
    for (k, &t) in targets.iter().enumerate() {
        let fits: Vec<&Rational> = grid.iter().filter(|g| **g < left).collect();
        if k + 1 == targets.len() || fits.is_empty() {
            entries.push((t, left.clone()));
            left = zero();
            break;
        }
        let g = fits[rng.random_range(0..fits.len())].clone();
        left -= &g;
        entries.push((t, g));
    }
    debug_assert!(left == zero());
    Distribution::new(entries).expect("masses sum to one")
}

/// A reproducible random automaton: states `u0..`, initial state `u0`,
/// every state with at least one transition.
pub fn generate_random(params: &GenParams) -> ProbAutomaton {
    assert!(params.states >= 1, "at least one state");
    assert!(params.grid.iter().all(|g| *g > zero() && *g <= one()), "grid masses lie in (0,1]");
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.states;
    let mut b = AutomatonBuilder::new(format!("rand{}", params.seed));
    for i in 0..n {
        let labels: Vec<String> = (0..params.alphabet).filter(|_| rng.random_bool(0.5)).map(prop_name).collect();
        b.add_state(format!("u{i}"), labels).expect("fresh name");
    }
    b.set_initial(0);
    for i in 0..n {
        let k = rng.random_range(1..=params.max_transitions.max(1));
        let mut seen: Vec<Distribution> = Vec::new();
        for _ in 0..k {
            let mu = split(&mut rng, n, &params.grid);
            if !seen.contains(&mu) {
                seen.push(mu);
            }
        }
        for mu in seen {
            b.add_transition(i, mu);
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::format::write_model;

    #[test]
    fn same_seed_same_text() {
        let p = GenParams::default().seed(42);
        assert_eq!(write_model(&generate_random(&p)), write_model(&generate_random(&p)));
        assert_ne!(write_model(&generate_random(&p)), write_model(&generate_random(&p.clone().seed(43))));
    }

    #[test]
    fn one_state_loops() {
        let a = generate_random(&GenParams::default().states(1));
        assert_eq!(a.len(), 1);
        assert_eq!(a.transitions(0), [Distribution::dirac(0)]);
    }

    #[test]
    fn masses_stay_on_the_quarter_grid() {
        for seed in 0..50 {
            let a = generate_random(&GenParams::default().seed(seed));
            for s in a.states() {
                assert!((1..=2).contains(&a.transitions(s).len()));
                for mu in a.transitions(s) {
                    assert_eq!(mu.total(), one());
                    assert!(mu.iter().all(|(_, p)| (p * Rational::from_integer(4.into())).is_integer()));
                }
            }
        }
    }
}
