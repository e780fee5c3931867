use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::logic::fragment::FragmentTag;
use crate::model::automaton::ProbAutomaton;
use crate::model::compose::{interleave, pair_index};
use crate::model::format::write_model;
use crate::model::rational::show;
use crate::model::relation::Relation;
use crate::model::stateset::StateSet;
use crate::oracle::{bounded_reach_values, FormulaBudget, SafeStratification, Stratification};
use crate::reach::{bounded_reach, replay_bounded, replay_unbounded, unbounded_reach, Mode};
use crate::relations::{
    branching_prob_bisim, compute, strong_1_depth, strong_branching_i, strong_i_depth, strong_prob_bisim, strong_prob_sim,
    weak_bisim, weak_branching_bisim, Caps, Direction, Outcome, RelationName, RelationQuery,
};

use super::generate::{generate_random, GenParams};
use super::report::{Failure, Report, SuiteKind, SuiteReport};

/// Scheduler histories enumerated per state by the engine suite.
const SCHEDULER_CAP: usize = 1 << 16;

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub suites: Vec<SuiteKind>,
    pub samples: usize,
    /// Sample `i` is generated from seed `seed + i`.
    pub seed: u64,
    /// Template for the generator; `states` is the largest size drawn.
    pub params: GenParams,
    /// `None` runs every bisimulation with its default direction.
    pub direction: Option<Direction>,
    pub workers: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            suites: SuiteKind::ALL.to_vec(),
            samples: 200,
            seed: 0,
            params: GenParams::default(),
            direction: None,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl SuiteConfig {
    /// Generator parameters of sample `i`: sizes cycle through `2..=states`.
    pub fn sample_params(&self, i: usize) -> GenParams {
        let max = self.params.states.max(1);
        let states = if max == 1 { 1 } else { 2 + i % (max - 1) };
        GenParams { seed: self.seed.wrapping_add(i as u64), states, ..self.params.clone() }
    }
}

enum Check {
    Pass,
    Fail(String),
    Skip,
}

impl Check {
    fn from(ok: bool, detail: impl FnOnce() -> String) -> Check {
        if ok {
            Check::Pass
        } else {
            Check::Fail(detail())
        }
    }
}

type Row = (String, Check);

fn pair_text(a: &ProbAutomaton, s: usize, r: usize) -> String {
    format!("{},{}", a.state_name(s), a.state_name(r))
}

/// First pair of `x` missing from `y`.
fn missing(a: &ProbAutomaton, x: &Relation, y: &Relation) -> Option<String> {
    x.pairs().find(|&(s, r)| !y.contains(s, r)).map(|(s, r)| pair_text(a, s, r))
}

fn subset(a: &ProbAutomaton, name: String, x: &Result<Outcome>, y: &Result<Outcome>) -> Row {
    let (Ok(x), Ok(y)) = (x, y) else { return (name, Check::Skip) };
    let gap = missing(a, &x.relation, &y.relation);
    let check = Check::from(gap.is_none(), || format!("pair {} of the left relation is missing on the right", gap.unwrap()));
    (name, check)
}

fn characterization(a: &ProbAutomaton, dir: Option<Direction>) -> Vec<Row> {
    let caps = Caps::default();
    let d = dir.unwrap_or(Direction::AtLeast);
    let cases: [(&str, FormulaBudget, Result<Outcome>); 4] = [
        ("strong_branching_1 = PCTL-1", FormulaBudget::new(FragmentTag::PctlMinusI(1)), strong_branching_i(a, 1, d, &caps)),
        ("strong_branching_2 = PCTL-2", FormulaBudget::new(FragmentTag::PctlMinusI(2)), strong_branching_i(a, 2, d, &caps)),
        ("strong_i_depth_2 = PCTL*-2", FormulaBudget::new(FragmentTag::PctlStarMinusI(2)), strong_i_depth(a, 2, d, &caps)),
        (
            "weak_branching_bisim = PCTL\\X (until nesting 2)",
            FormulaBudget::new(FragmentTag::PctlNoNext).nesting(2),
            weak_branching_bisim(a, d, &caps),
        ),
    ];
    let mut rows = Vec::new();
    for (name, budget, outcome) in cases {
        let (Ok(outcome), Ok(strat)) = (outcome, Stratification::compute(a, &budget)) else {
            rows.push((name.to_string(), Check::Skip));
            continue;
        };
        let logical = Relation::from_classes(strat.class_of());
        let check = match a.states().flat_map(|s| a.states().map(move |r| (s, r))).find(|&(s, r)| {
            logical.contains(s, r) != outcome.relation.contains(s, r)
        }) {
            None => Check::Pass,
            Some((s, r)) if outcome.relation.contains(s, r) => {
                let d = strat.distinguish(s, r).expect("oracle separates the pair");
                let values = d.values.map_or(String::new(), |(x, y)| format!(" ({x} vs {y})"));
                Check::Fail(format!("{} related, but the oracle separates them by {}{values}", pair_text(a, s, r), d.formula))
            }
            Some((s, r)) => {
                let w = outcome.witness(a, s, r).map_or("labels".to_string(), |w| format!("{:?}", w.item));
                Check::Fail(format!("{} equivalent for the oracle, but separated by {w}", pair_text(a, s, r)))
            }
        };
        rows.push((name.to_string(), check));
    }
    rows.push(match strong_1_depth(a, d, &caps) {
        Ok(o) => ("strong_1_depth is symmetric".to_string(), Check::from(o.relation.is_symmetric(), || "asymmetric".into())),
        Err(_) => ("strong_1_depth is symmetric".to_string(), Check::Skip),
    });
    rows
}

fn inclusion(a: &ProbAutomaton, dir: Option<Direction>) -> Vec<Row> {
    let caps = Caps::default();
    let d = dir.unwrap_or(Direction::AtLeast);
    let sb: Vec<Result<Outcome>> = (1..=4).map(|i| strong_branching_i(a, i, d, &caps)).collect();
    let si: Vec<Result<Outcome>> = (1..=3).map(|i| strong_i_depth(a, i, d, &caps)).collect();
    let spb = Ok(strong_prob_bisim(a));
    let sps = Ok(strong_prob_sim(a));
    let bpb = Ok(branching_prob_bisim(a, a.len()));
    let wbb = weak_branching_bisim(a, d, &caps);
    let wb = weak_bisim(a, d, &caps);
    let bsim: Vec<Result<Outcome>> = (1..=2)
        .map(|i| compute(a, &RelationQuery::new(RelationName::BranchingSimI).depth(i)))
        .collect();
    let mut rows = Vec::new();
    for i in 1..=3 {
        rows.push(subset(a, format!("strong_branching_{} <= strong_branching_{i}", i + 1), &sb[i], &sb[i - 1]));
    }
    for i in 1..=2 {
        rows.push(subset(a, format!("strong_i_depth_{} <= strong_i_depth_{i}", i + 1), &si[i], &si[i - 1]));
    }
    for i in 1..=3 {
        rows.push(subset(a, format!("strong_i_depth_{i} <= strong_branching_{i}"), &si[i - 1], &sb[i - 1]));
        rows.push(subset(a, format!("strong_prob_bisim <= strong_i_depth_{i}"), &spb, &si[i - 1]));
    }
    rows.push(subset(a, "strong_branching_1 <= strong_i_depth_1".into(), &sb[0], &si[0]));
    for i in 1..=2 {
        rows.push(subset(a, format!("strong_prob_sim <= branching_sim_{i}"), &sps, &bsim[i - 1]));
    }
    rows.push(subset(a, "strong_prob_bisim <= strong_prob_sim".into(), &spb, &sps));
    rows.push(subset(a, "strong_prob_bisim <= branching_prob_bisim".into(), &spb, &bpb));
    rows.push(subset(a, "branching_prob_bisim <= weak_branching_bisim".into(), &bpb, &wbb));
    rows.push(subset(a, "branching_prob_bisim <= weak_bisim".into(), &bpb, &wb));
    rows.push(subset(a, "weak_bisim <= weak_branching_bisim".into(), &wb, &wbb));
    rows
}

/// Does `rel_p` on `a ∥ c` relate `(s,t),(r,t)` whenever `rel_a` relates `s,r`?
fn lifted(a: &ProbAutomaton, c: &ProbAutomaton, p: &ProbAutomaton, rel_a: &Relation, rel_p: &Relation) -> Option<String> {
    let m = c.len();
    for (s, r) in rel_a.pairs() {
        for t in c.states() {
            let (x, y) = (pair_index(m, s, t), pair_index(m, r, t));
            if !rel_p.contains(x, y) {
                return Some(format!("{} related, {} not", pair_text(a, s, r), pair_text(p, x, y)));
            }
        }
    }
    None
}

/// The right operand of the congruence checks for sample seed `seed`.
pub fn congruence_partner(seed: u64, params: &GenParams) -> ProbAutomaton {
    generate_random(&GenParams { seed: seed ^ 0x9e37_79b9_7f4a_7c15, states: 2, ..params.clone() })
}

fn congruence(a: &ProbAutomaton, seed: u64, params: &GenParams, dir: Option<Direction>) -> Vec<Row> {
    let caps = Caps::default();
    let d = dir.unwrap_or(Direction::AtLeast);
    let c = congruence_partner(seed, params);
    let p = interleave(a, &c);
    let mut rows = Vec::new();
    let mut push = |name: &str, x: Result<Outcome>, y: Result<Outcome>| {
        let check = match (x, y) {
            (Ok(x), Ok(y)) => match lifted(a, &c, &p, &x.relation, &y.relation) {
                None => Check::Pass,
                Some(why) => Check::Fail(format!("{why}; partner:\n{}", write_model(&c))),
            },
            _ => Check::Skip,
        };
        rows.push((name.to_string(), check));
    };
    push("strong_1_depth preserved by interleaving", strong_1_depth(a, d, &caps), strong_1_depth(&p, d, &caps));
    push("strong_prob_bisim preserved by interleaving", Ok(strong_prob_bisim(a)), Ok(strong_prob_bisim(&p)));
    push("strong_prob_sim preserved by interleaving", Ok(strong_prob_sim(a)), Ok(strong_prob_sim(&p)));
    rows
}

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> StateSet {
    StateSet::from_indices(n, (0..n).filter(|_| rng.random_bool(0.5)))
}

fn engine(a: &ProbAutomaton, seed: u64, dir: Option<Direction>) -> Vec<Row> {
    let n = a.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5151_5151);
    let c = random_set(&mut rng, n);
    let cp = random_set(&mut rng, n);
    let mut sup_ok = Check::Pass;
    let mut inf_ok = Check::Pass;
    let mut replay_ok = Check::Pass;
    'states: for s in a.states() {
        for h in 1..=3 {
            let Ok(all) = bounded_reach_values(a, s, &c, &cp, h, SCHEDULER_CAP) else {
                sup_ok = Check::Skip;
                inf_ok = Check::Skip;
                break 'states;
            };
            let (lo, hi) = (all.first().expect("some scheduler"), all.last().expect("some scheduler"));
            for (mode, want, slot) in [(Mode::Sup, hi, &mut sup_ok), (Mode::Inf, lo, &mut inf_ok)] {
                let (v, w) = bounded_reach(a, s, &c, &cp, h, mode);
                if &v != want && matches!(slot, Check::Pass) {
                    *slot = Check::Fail(format!("state {} horizon {h}: engine {} vs enumeration {}", a.state_name(s), show(&v), show(want)));
                }
                let back = replay_bounded(a, s, &c, &cp, h, &w);
                if back != v && matches!(replay_ok, Check::Pass) {
                    replay_ok = Check::Fail(format!("state {} horizon {h} {mode:?}: witness gives {}", a.state_name(s), show(&back)));
                }
            }
        }
        for mode in [Mode::Sup, Mode::Inf] {
            let (v, w) = unbounded_reach(a, s, &c, &cp, mode);
            let back = replay_unbounded(a, s, &c, &cp, &w);
            if back != v && matches!(replay_ok, Check::Pass) {
                replay_ok = Check::Fail(format!("state {} unbounded {mode:?}: witness gives {}", a.state_name(s), show(&back)));
            }
        }
    }
    let caps = Caps::default();
    let d = dir.unwrap_or(Direction::AtLeast);
    let mut verdicts = Check::Pass;
    for outcome in [strong_branching_i(a, 2, d, &caps), strong_i_depth(a, 2, d, &caps), weak_bisim(a, d, &caps)] {
        let Ok(o) = outcome else {
            verdicts = Check::Skip;
            break;
        };
        for (s, r) in a.states().flat_map(|s| a.states().map(move |r| (s, r))) {
            let Some(w) = o.witness(a, s, r) else { continue };
            match (w.replay(a, caps.stutter_nodes), &w.values) {
                (Ok(Some(got)), Some(want)) if &got == want => {}
                (Ok(None), None) => {}
                (got, _) => {
                    verdicts = Check::Fail(format!("witness for {} replays to {got:?}", pair_text(a, s, r)));
                    break;
                }
            }
        }
    }
    vec![
        ("bounded_reach sup = scheduler enumeration (n <= 3)".into(), sup_ok),
        ("bounded_reach inf = scheduler enumeration (n <= 3)".into(), inf_ok),
        ("policy witnesses replay".into(), replay_ok),
        ("verdict witnesses replay".into(), verdicts),
    ]
}

fn safe(a: &ProbAutomaton) -> Vec<Row> {
    let sps = strong_prob_sim(a).relation;
    let budget = FormulaBudget::new(FragmentTag::PctlSafe).depth(2);
    let row = match SafeStratification::compute(a, &budget) {
        Ok(strat) => {
            let gap = missing(a, &sps, strat.relation());
            Check::from(gap.is_none(), || format!("{} similar but refuted by a safe formula", gap.unwrap()))
        }
        Err(_) => Check::Skip,
    };
    vec![("strong_prob_sim <= PCTLs preorder".into(), row)]
}

fn run_sample(config: &SuiteConfig, i: usize) -> Report {
    let params = config.sample_params(i);
    let a = generate_random(&params);
    let mut report = Report::default();
    for &kind in &config.suites {
        let rows = match kind {
            SuiteKind::Characterization => characterization(&a, config.direction),
            SuiteKind::Inclusion => inclusion(&a, config.direction),
            SuiteKind::Congruence => congruence(&a, params.seed, &config.params, config.direction),
            SuiteKind::Engine => engine(&a, params.seed, config.direction),
            SuiteKind::Safe => safe(&a),
        };
        let mut s = SuiteReport::new(kind);
        s.samples = 1;
        for (name, check) in rows {
            let t = s.checks.entry(name.clone()).or_default();
            match check {
                Check::Pass => t.passed += 1,
                Check::Skip => t.skipped += 1,
                Check::Fail(detail) => {
                    t.failed += 1;
                    s.failures.push(Failure { check: name, sample: i, seed: params.seed, detail, model: write_model(&a) });
                }
            }
        }
        report = report.merge(Report { suites: [(kind, s)].into() });
    }
    report
}

/// Runs the selected suites over `config.samples` generated automata,
/// sharding sample ranges across worker threads.
pub fn run_property_suites(config: &SuiteConfig) -> Report {
    let workers = config.workers.clamp(1, config.samples.max(1));
    let chunk = config.samples.div_ceil(workers);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let range = (w * chunk)..((w + 1) * chunk).min(config.samples);
                scope.spawn(move || range.map(|i| run_sample(config, i)).fold(Report::default(), Report::merge))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite worker panicked")).fold(Report::default(), Report::merge)
    })
}
