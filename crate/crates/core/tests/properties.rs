use proptest::prelude::*;

use pabisim::harness::generate::{generate_random, GenParams};
use pabisim::model::automaton::ProbAutomaton;
use pabisim::model::compose::interleave;
use pabisim::model::format::{parse_model, write_model};
use pabisim::model::rational::ratio;
use pabisim::model::stateset::StateSet;
use pabisim::oracle::values::bounded_reach_values;
use pabisim::reach::{bounded_reach, replay_bounded, replay_unbounded, unbounded_reach, Mode};
use pabisim::relations::{compute, RelationName, RelationQuery};

fn automaton(seed: u64, states: usize) -> ProbAutomaton {
    generate_random(&GenParams::default().seed(seed).states(states))
}

fn set_from_mask(n: usize, mask: u32) -> StateSet {
    StateSet::from_indices(n, (0..n).filter(|i| mask >> i & 1 == 1))
}

fn relation(a: &ProbAutomaton, name: RelationName, depth: Option<usize>) -> pabisim::model::relation::Relation {
    let mut q = RelationQuery::new(name);
    if let Some(i) = depth {
        q = q.depth(i);
    }
    compute(a, &q).unwrap().relation
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bounded_reach_is_the_extreme_scheduler_value(seed in 0u64..10_000, states in 1usize..=4, c in any::<u32>(), cp in any::<u32>(), n in 0usize..=3) {
        let a = automaton(seed, states);
        let (c, cp) = (set_from_mask(a.len(), c), set_from_mask(a.len(), cp));
        for s in a.states() {
            let all = bounded_reach_values(&a, s, &c, &cp, n, 1 << 16).unwrap();
            let (sup, w) = bounded_reach(&a, s, &c, &cp, n, Mode::Sup);
            prop_assert_eq!(&sup, all.last().unwrap());
            prop_assert_eq!(replay_bounded(&a, s, &c, &cp, n, &w), sup);
            let (inf, w) = bounded_reach(&a, s, &c, &cp, n, Mode::Inf);
            prop_assert_eq!(&inf, all.first().unwrap());
            prop_assert_eq!(replay_bounded(&a, s, &c, &cp, n, &w), inf);
        }
    }

    #[test]
    fn unbounded_values_dominate_bounded_ones(seed in 0u64..10_000, states in 1usize..=5, c in any::<u32>(), cp in any::<u32>()) {
        let a = automaton(seed, states);
        let (c, cp) = (set_from_mask(a.len(), c), set_from_mask(a.len(), cp));
        for s in a.states() {
            for mode in [Mode::Sup, Mode::Inf] {
                let (v, w) = unbounded_reach(&a, s, &c, &cp, mode);
                prop_assert_eq!(replay_unbounded(&a, s, &c, &cp, &w), v.clone());
                prop_assert!(v >= ratio(0, 1) && v <= ratio(1, 1));
                let (b, _) = bounded_reach(&a, s, &c, &cp, 4, mode);
                prop_assert!(b <= v);
            }
        }
    }

    #[test]
    fn model_text_round_trips(seed in 0u64..10_000, states in 1usize..=6) {
        let a = automaton(seed, states);
        let text = write_model(&a);
        let b = parse_model(&text).unwrap();
        prop_assert_eq!(write_model(&b), text);
        prop_assert_eq!(write_model(&automaton(seed, states)), write_model(&a));
    }

    #[test]
    fn interleaving_multiplies_states_and_keeps_mass(l in 0u64..1000, r in 0u64..1000) {
        let (a, b) = (automaton(l, 2), automaton(r, 3));
        let p = interleave(&a, &b);
        prop_assert_eq!(p.len(), a.len() * b.len());
        for s in p.states() {
            for mu in p.transitions(s) {
                prop_assert_eq!(mu.total(), ratio(1, 1));
            }
        }
    }

    #[test]
    fn bisimulations_are_equivalences_inside_their_preorders(seed in 0u64..10_000, states in 2usize..=4) {
        let a = automaton(seed, states);
        let spb = relation(&a, RelationName::StrongProbBisim, None);
        prop_assert!(spb.is_equivalence());
        let sps = relation(&a, RelationName::StrongProbSim, None);
        prop_assert!(sps.is_reflexive() && sps.is_transitive());
        prop_assert!(spb.is_subset(&sps));
        let s1 = relation(&a, RelationName::Strong1, None);
        prop_assert!(s1.is_equivalence());
        prop_assert!(spb.is_subset(&s1));
        let sb2 = relation(&a, RelationName::StrongBranchingI, Some(2));
        prop_assert!(sb2.is_equivalence());
        prop_assert!(sb2.is_subset(&s1));
    }
}
