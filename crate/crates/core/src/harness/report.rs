use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuiteKind {
    /// Relations against the oracle's logical equivalences.
    Characterization,
    /// Chains and inclusions between relations.
    Inclusion,
    /// Preservation under interleaving.
    Congruence,
    /// Reachability engines against scheduler enumeration; witness replay.
    Engine,
    /// Strong simulation against the safe-fragment preorder.
    Safe,
}

impl SuiteKind {
    pub const ALL: [SuiteKind; 5] =
        [SuiteKind::Characterization, SuiteKind::Inclusion, SuiteKind::Congruence, SuiteKind::Engine, SuiteKind::Safe];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteKind::Characterization => "characterization",
            SuiteKind::Inclusion => "inclusion",
            SuiteKind::Congruence => "congruence",
            SuiteKind::Engine => "engine",
            SuiteKind::Safe => "safe",
        }
    }
}

impl fmt::Display for SuiteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        SuiteKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Query(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    /// Samples where a cap stopped the check.
    pub skipped: usize,
}

impl Tally {
    pub fn total(&self) -> usize {
        self.passed + self.failed + self.skipped
    }

    fn add(&mut self, o: &Tally) {
        self.passed += o.passed;
        self.failed += o.failed;
        self.skipped += o.skipped;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub check: String,
    pub sample: usize,
    pub seed: u64,
    pub detail: String,
    /// The automaton in model format.
    pub model: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteReport {
    pub kind: SuiteKind,
    pub samples: usize,
    pub checks: BTreeMap<String, Tally>,
    pub failures: Vec<Failure>,
}

impl SuiteReport {
    pub fn new(kind: SuiteKind) -> Self {
        SuiteReport { kind, samples: 0, checks: BTreeMap::new(), failures: Vec::new() }
    }

    fn absorb(&mut self, other: SuiteReport) {
        self.samples += other.samples;
        for (name, t) in other.checks {
            self.checks.entry(name).or_default().add(&t);
        }
        self.failures.extend(other.failures);
        self.failures.sort_by(|x, y| (&x.check, x.sample).cmp(&(&y.check, y.sample)));
    }

    /// Failed samples, counted once per sample.
    pub fn failed_samples(&self) -> usize {
        let mut s: Vec<usize> = self.failures.iter().map(|f| f.sample).collect();
        s.sort_unstable();
        s.dedup();
        s.len()
    }
}

/// Results of [`super::suites::run_property_suites`]. Merging is
/// associative and ignores the order reports arrive in.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub suites: BTreeMap<SuiteKind, SuiteReport>,
}

impl Report {
    pub fn merge(mut self, other: Report) -> Report {
        for (k, s) in other.suites {
            match self.suites.get_mut(&k) {
                Some(mine) => mine.absorb(s),
                None => {
                    let mut fresh = SuiteReport::new(k);
                    fresh.absorb(s);
                    self.suites.insert(k, fresh);
                }
            }
        }
        self
    }

    pub fn tally(&self, suite: SuiteKind, check: &str) -> Option<Tally> {
        self.suites.get(&suite)?.checks.get(check).copied()
    }

    pub fn failure_count(&self) -> usize {
        self.suites.values().map(|s| s.failures.len()).sum()
    }

    /// Writes one file of failing automata per suite that has failures.
    pub fn write_witnesses(&self, dir: &Path) -> std::io::Result<BTreeMap<SuiteKind, PathBuf>> {
        let mut out = BTreeMap::new();
        for (k, s) in &self.suites {
            if s.failures.is_empty() {
                continue;
            }
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("{k}-witnesses.pa"));
            let mut text = String::new();
            for f in &s.failures {
                let _ = writeln!(text, "# check: {}", f.check);
                let _ = writeln!(text, "# sample {} seed {}", f.sample, f.seed);
                for line in f.detail.lines() {
                    let _ = writeln!(text, "# {line}");
                }
                text.push_str(&f.model);
                text.push('\n');
            }
            std::fs::write(&path, text)?;
            out.insert(*k, path);
        }
        Ok(out)
    }

    pub fn render(&self, witness_files: &BTreeMap<SuiteKind, PathBuf>) -> String {
        let mut out = String::new();
        for (k, s) in &self.suites {
            let _ = writeln!(out, "suite {k}");
            let width = s.checks.keys().map(|c| c.chars().count()).max().unwrap_or(0);
            for (name, t) in &s.checks {
                let mark = if t.failed == 0 { "pass" } else { "FAIL" };
                let pad = width - name.chars().count();
                let _ = write!(out, "  {mark} {name}{} {}/{}", " ".repeat(pad), t.passed, t.total());
                if t.skipped > 0 {
                    let _ = write!(out, " ({} skipped at caps)", t.skipped);
                }
                out.push('\n');
            }
            for f in &s.failures {
                let first = f.detail.lines().next().unwrap_or("");
                let _ = writeln!(out, "  failure {} sample {} seed {}: {first}", f.check, f.sample, f.seed);
            }
            let _ = writeln!(out, "summary");
            let _ = writeln!(out, "  suite: {k}");
            let _ = writeln!(out, "  samples: {}", s.samples);
            let _ = writeln!(out, "  failures: {}", s.failures.len());
            match witness_files.get(k) {
                Some(p) => {
                    let _ = writeln!(out, "  witness-file: {}", p.display());
                }
                None => {
                    let _ = writeln!(out, "  witness-file: none");
                }
            }
        }
        out
    }
}
