//! Line-based text format for probabilistic automata.
//!
//! ```text
//! pa fig1_left
//! state s label top
//! absorbing s1 label a1
//! init s
//! trans s -> 0.3:s1 0.3:s2 0.4:s3
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::automaton::{AutomatonBuilder, Distribution, ProbAutomaton};
use crate::model::rational::{one, parse_rational, zero};

struct Line<'a> {
    number: usize,
    words: Vec<&'a str>,
}

/// Parses the model format. Declarations may appear in any order.
pub fn parse_model(text: &str) -> Result<ProbAutomaton> {
    let lines: Vec<Line> = text
        .lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let words: Vec<&str> = body.split_whitespace().collect();
            (!words.is_empty()).then_some(Line { number: i + 1, words })
        })
        .collect();

    let mut name: Option<String> = None;
    let mut builder = AutomatonBuilder::default();
    let mut absorbing = Vec::new();

    for line in &lines {
        let syntax = |message: String| Error::Syntax { line: line.number, message };
        match line.words[0] {
            "pa" => {
                if line.words.len() != 2 {
                    return Err(syntax("expected `pa <name>`".into()));
                }
                if name.is_some() {
                    return Err(syntax("duplicate `pa` header".into()));
                }
                name = Some(line.words[1].to_string());
            }
            kw @ ("state" | "absorbing") => {
                let (id, labels) = parse_declaration(line)?;
                let s = builder
                    .add_state(id, labels)
                    .map_err(|_| syntax(format!("state `{id}` declared twice")))?;
                if kw == "absorbing" {
                    absorbing.push((s, line.number));
                }
            }
            "init" | "trans" => {}
            other => return Err(syntax(format!("unknown keyword `{other}`"))),
        }
    }
    if builder.is_empty() {
        return Err(Error::Syntax { line: text.lines().count().max(1), message: "model declares no states".into() });
    }

    for line in &lines {
        let syntax = |message: String| Error::Syntax { line: line.number, message };
        let lookup = |builder: &AutomatonBuilder, id: &str| {
            builder
                .id(id)
                .ok_or_else(|| Error::UndeclaredState { line: line.number, state: id.to_string() })
        };
        match line.words[0] {
            "init" => {
                if line.words.len() < 2 {
                    return Err(syntax("expected `init <id>`".into()));
                }
                for id in &line.words[1..] {
                    let s = lookup(&builder, id)?;
                    builder.set_initial(s);
                }
            }
            "trans" => {
                if line.words.len() < 4 || line.words[2] != "->" {
                    return Err(syntax("expected `trans <id> -> <prob>:<id> ...`".into()));
                }
                let from = lookup(&builder, line.words[1])?;
                if absorbing.iter().any(|(s, _)| *s == from) {
                    return Err(syntax(format!("absorbing state `{}` cannot have transitions", line.words[1])));
                }
                let mut entries = Vec::new();
                let mut targets = BTreeSet::new();
                for item in &line.words[3..] {
                    let (prob, target) =
                        item.split_once(':').ok_or_else(|| syntax(format!("malformed target `{item}`")))?;
                    let p = parse_rational(prob).ok_or_else(|| syntax(format!("malformed probability `{prob}`")))?;
                    if p <= zero() || p > one() {
                        return Err(syntax(format!("probability {prob} outside (0,1]")));
                    }
                    let to = lookup(&builder, target)?;
                    if !targets.insert(to) {
                        return Err(syntax(format!("target `{target}` listed twice")));
                    }
                    entries.push((to, p));
                }
                let sum = entries.iter().fold(zero(), |acc, (_, p)| acc + p);
                if sum != one() {
                    return Err(Error::DistributionSum { line: line.number, sum: sum.to_string() });
                }
                let dist = Distribution::new(entries).map_err(|e| syntax(e.to_string()))?;
                builder.add_transition(from, dist);
            }
            _ => {}
        }
    }
    for (s, _) in absorbing {
        builder.add_transition(s, Distribution::dirac(s));
    }
    if let Some(name) = name {
        builder.set_name(name);
    }
    Ok(builder.build())
}

fn parse_declaration<'a>(line: &Line<'a>) -> Result<(&'a str, Vec<String>)> {
    let syntax = |message: String| Error::Syntax { line: line.number, message };
    let words = &line.words;
    if words.len() < 2 {
        return Err(syntax(format!("expected `{} <id>`", words[0])));
    }
    let id = words[1];
    if !is_state_id(id) {
        return Err(syntax(format!("invalid state id `{id}`")));
    }
    let labels = match words.len() {
        2 => Vec::new(),
        _ if words[2] != "label" => return Err(syntax(format!("expected `label`, found `{}`", words[2]))),
        _ => {
            let joined = words[3..].join("");
            let labels: Vec<String> =
                joined.split(',').filter(|l| !l.is_empty()).map(str::to_string).collect();
            if let Some(bad) = labels.iter().find(|l| !is_prop(l)) {
                return Err(syntax(format!("invalid proposition `{bad}`")));
            }
            labels
        }
    };
    Ok((id, labels))
}

/// `[A-Za-z_][A-Za-z0-9_]*` or a composed `(<id>,<id>)`.
pub fn is_state_id(id: &str) -> bool {
    if let Some(inner) = id.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let mut depth = 0usize;
        for (i, c) in inner.char_indices() {
            match c {
                '(' => depth += 1,
                ')' if depth == 0 => return false,
                ')' => depth -= 1,
                ',' if depth == 0 => return is_state_id(&inner[..i]) && is_state_id(&inner[i + 1..]),
                _ => {}
            }
        }
        return false;
    }
    let mut chars = id.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Proposition names additionally allow `@` for composed labels.
pub fn is_prop(p: &str) -> bool {
    let mut chars = p.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '@')
}

/// Writes an automaton back to the model format. Dirac self-loops are
/// written as `absorbing` when they are a state's only transition.
pub fn write_model(a: &ProbAutomaton) -> String {
    let mut out = String::new();
    if !a.name().is_empty() {
        let _ = writeln!(out, "pa {}", a.name());
    }
    let absorbing = |s: usize| a.transitions(s) == [Distribution::dirac(s)];
    for s in a.states() {
        let kw = if absorbing(s) { "absorbing" } else { "state" };
        let _ = write!(out, "{kw} {}", a.state_name(s));
        if !a.label(s).is_empty() {
            let labels: Vec<&str> = a.label(s).iter().map(String::as_str).collect();
            let _ = write!(out, " label {}", labels.join(","));
        }
        out.push('\n');
    }
    for &s in a.initial() {
        let _ = writeln!(out, "init {}", a.state_name(s));
    }
    for s in a.states().filter(|&s| !absorbing(s)) {
        for mu in a.transitions(s) {
            let _ = write!(out, "trans {} ->", a.state_name(s));
            for (t, p) in mu.iter() {
                let _ = write!(out, " {}:{}", p, a.state_name(t));
            }
            out.push('\n');
        }
    }
    out
}
