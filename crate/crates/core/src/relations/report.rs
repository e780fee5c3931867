use std::fmt::Write;

use crate::model::automaton::ProbAutomaton;
use crate::model::stateset::StateSet;
use crate::relations::events::set_names;
use crate::relations::{Verdict, WitnessItem};

/// Line-oriented text report of a verdict.
pub fn render(a: &ProbAutomaton, v: &Verdict) -> String {
    let mut out = String::new();
    let q = &v.query;
    let o = &v.outcome;
    let _ = writeln!(out, "relation: {}", q.name);
    let _ = writeln!(out, "depth: {}", q.depth.map_or("-".to_string(), |d| d.to_string()));
    let _ = writeln!(out, "direction: {}", q.effective_direction());
    let caps = if o.caps_hit.is_empty() { "none".to_string() } else { o.caps_hit.iter().cloned().collect::<Vec<_>>().join(", ") };
    let _ = writeln!(out, "caps hit: {caps}");
    let _ = writeln!(out, "rounds: {}", o.rounds);
    match o.relation.classes() {
        Some(class_of) => {
            let k = class_of.iter().max().map_or(0, |m| m + 1);
            let blocks: Vec<String> = (0..k)
                .map(|c| set_names(a, &StateSet::from_indices(a.len(), a.states().filter(|&s| class_of[s] == c))))
                .collect();
            let _ = writeln!(out, "classes: {}", blocks.join(" "));
        }
        None => {
            let _ = writeln!(out, "preorder:");
            for s in a.states() {
                let _ = writeln!(out, "  {} <= {}", a.state_name(s), set_names(a, o.relation.row(s)));
            }
        }
    }
    if let (Some((s, r)), Some(related)) = (v.pair, v.related) {
        let _ = writeln!(out, "pair: {}, {}", a.state_name(s), a.state_name(r));
        let _ = writeln!(out, "related: {related}");
    }
    if let Some(w) = &v.witness {
        let item = match &w.item {
            WitnessItem::Labels => "labels differ".to_string(),
            WitnessItem::Transition { state, index } => {
                format!("transition {} of {} has no match", index, a.state_name(*state))
            }
            WitnessItem::Event(e) => e.describe(a),
        };
        let _ = writeln!(out, "witness: {item}");
        if let Some((x, y)) = &w.values {
            let _ = writeln!(out, "  {}: {}", a.state_name(w.left), x);
            let _ = writeln!(out, "  {}: {}", a.state_name(w.right), y);
        }
    }
    out
}
