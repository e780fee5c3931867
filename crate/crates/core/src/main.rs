use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pabisim::error::Error;
use pabisim::harness::fixtures::{corpus, run_fixture};
use pabisim::harness::generate::{generate_random, GenParams};
use pabisim::harness::report::SuiteKind;
use pabisim::harness::suites::{run_property_suites, SuiteConfig};
use pabisim::harness::taxonomy::Taxonomy;
use pabisim::logic::{check, parse_formula, path_values, PathFormula, StateFormula};
use pabisim::model::automaton::{ProbAutomaton, StateId};
use pabisim::model::compose::interleave;
use pabisim::model::format::{parse_model, write_model};
use pabisim::model::rational::{parse_rational, show, Rational};
use pabisim::reach::Mode;
use pabisim::relations::{self, Caps, Direction, RelationName, RelationQuery};

const RELATED: u8 = 0;
const UNRELATED: u8 = 1;
const USAGE: u8 = 2;
const CAPPED: u8 = 3;

#[derive(Parser)]
#[command(name = "pabisim", version, about = "Exact checks for probabilistic automata")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model file.
    Parse { file: PathBuf },
    /// Model check a state formula.
    Mc(McArgs),
    /// Compute a relation, optionally for one pair.
    Relate(RelateArgs),
    /// Write the interleaving of two models.
    Compose {
        left: PathBuf,
        right: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// All relations and the inclusions between them.
    Taxonomy {
        file: PathBuf,
        /// Largest depth for the indexed relations.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Run the fixture corpus, and optionally the property suites.
    Regress(RegressArgs),
    /// Emit a random model.
    Random(RandomArgs),
}

#[derive(Args)]
struct McArgs {
    file: PathBuf,
    #[arg(long)]
    formula: String,
    /// Defaults to every state.
    #[arg(long)]
    state: Option<String>,
}

#[derive(Args)]
struct RelateArgs {
    file: PathBuf,
    #[arg(long)]
    relation: RelationName,
    #[arg(long)]
    depth: Option<usize>,
    /// Two state names separated by a comma, e.g. `s,r` or `(s,t),(r,t)`.
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    direction: Option<Direction>,
    /// Use only principal down-sets in one-step clauses.
    #[arg(long)]
    principal_only: bool,
    #[arg(long)]
    pattern_length: Option<usize>,
}

#[derive(Args)]
struct RegressArgs {
    /// Only fixtures with this name.
    #[arg(long)]
    fixture: Option<String>,
    /// Also run these property suites (comma separated, or `all`).
    #[arg(long, value_delimiter = ',')]
    suites: Vec<String>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    direction: Option<Direction>,
    #[arg(long)]
    workers: Option<usize>,
    /// Where failing automata are written.
    #[arg(long, default_value = "witnesses")]
    witness_dir: PathBuf,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    states: usize,
    #[arg(long, default_value_t = 2)]
    max_transitions: usize,
    #[arg(long, default_value_t = 2)]
    alphabet: usize,
    /// Comma-separated masses in (0,1].
    #[arg(long, value_delimiter = ',')]
    grid: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Capped(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceCap { .. } => Failure::Capped(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<ProbAutomaton, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn state(a: &ProbAutomaton, name: &str) -> Result<StateId, Failure> {
    Ok(a.state(name)?)
}

/// Splits `x,y` at the one comma outside parentheses.
fn split_pair(text: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    let mut at = None;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                if at.is_some() {
                    return None;
                }
                at = Some(i);
            }
            _ => {}
        }
    }
    let i = at?;
    Some((text[..i].trim(), text[i + 1..].trim()))
}

/// The probability operators reachable through boolean connectives.
fn top_probs(phi: &StateFormula, out: &mut Vec<(String, PathFormula)>) {
    match phi {
        StateFormula::Not(x) => top_probs(x, out),
        StateFormula::And(x, y) | StateFormula::Or(x, y) => {
            top_probs(x, out);
            top_probs(y, out);
        }
        StateFormula::Prob { path, .. } => out.push((phi.to_string(), (**path).clone())),
        _ => {}
    }
}

fn mc(args: &McArgs) -> Result<u8, Failure> {
    let a = load(&args.file)?;
    let phi = parse_formula(&args.formula)?;
    let holds = check(&a, &phi)?;
    let states: Vec<StateId> = match &args.state {
        Some(s) => vec![state(&a, s)?],
        None => a.states().collect(),
    };
    let mut probs = Vec::new();
    top_probs(&phi, &mut probs);
    let mut values = Vec::new();
    for (_, path) in &probs {
        values.push((path_values(&a, path, Mode::Inf)?, path_values(&a, path, Mode::Sup)?));
    }
    for &s in &states {
        println!("{}: {}", a.state_name(s), if holds[s] { "holds" } else { "fails" });
        for ((text, _), (inf, sup)) in probs.iter().zip(&values) {
            println!("  {text}: inf {} sup {}", show(&inf[s]), show(&sup[s]));
        }
    }
    Ok(if states.iter().all(|&s| holds[s]) { RELATED } else { UNRELATED })
}

fn relate(args: &RelateArgs) -> Result<u8, Failure> {
    let a = load(&args.file)?;
    let caps = Caps { principal_only: args.principal_only, pattern_length: args.pattern_length, ..Caps::default() };
    let mut q = RelationQuery::new(args.relation).caps(caps);
    if let Some(i) = args.depth {
        q = q.depth(i);
    }
    if let Some(d) = args.direction {
        q = q.direction(d);
    }
    let pair = match &args.pair {
        Some(text) => {
            let (x, y) = split_pair(text).ok_or_else(|| Failure::Usage(format!("bad pair `{text}`, expected `s,r`")))?;
            Some((state(&a, x)?, state(&a, y)?))
        }
        None => None,
    };
    let v = relations::relate(&a, &q, pair)?;
    print!("{}", relations::render(&a, &v));
    Ok(if v.related == Some(false) { UNRELATED } else { RELATED })
}

fn compose(left: &Path, right: &Path, output: &Path) -> Result<u8, Failure> {
    let p = interleave(&load(left)?, &load(right)?);
    std::fs::write(output, write_model(&p)).map_err(|e| Failure::Usage(format!("{}: {e}", output.display())))?;
    println!("wrote {} ({} states)", output.display(), p.len());
    Ok(RELATED)
}

fn taxonomy(file: &Path, depth: usize) -> Result<u8, Failure> {
    let a = load(file)?;
    let t = Taxonomy::compute(&a, depth, &Caps::default())?;
    print!("{}", t.render(&a));
    Ok(if !t.violations(&a).is_empty() {
        UNRELATED
    } else if t.capped() {
        CAPPED
    } else {
        RELATED
    })
}

fn regress(args: &RegressArgs) -> Result<u8, Failure> {
    let mut failed = 0usize;
    let mut total = 0usize;
    for f in corpus() {
        if args.fixture.as_ref().is_some_and(|n| *n != f.name) {
            continue;
        }
        for o in run_fixture(&f)? {
            total += 1;
            let got = match &o.actual {
                Ok(ans) => ans.to_string(),
                Err(e) => format!("error: {e}"),
            };
            let mark = if o.passed() { "ok  " } else { "FAIL" };
            if !o.passed() {
                failed += 1;
            }
            println!("{mark} {} {} | expected {} ({}) got {got}", f.name, o.query.op, o.query.expected, o.query.basis);
        }
    }
    println!("fixtures: {}/{} passed", total - failed, total);

    if !args.suites.is_empty() {
        let kinds: Vec<SuiteKind> = if args.suites.iter().any(|s| s == "all") {
            SuiteKind::ALL.to_vec()
        } else {
            args.suites.iter().map(|s| s.parse()).collect::<Result<_, _>>()?
        };
        let mut config = SuiteConfig { suites: kinds, samples: args.samples, seed: args.seed, direction: args.direction, ..SuiteConfig::default() };
        if let Some(w) = args.workers {
            config.workers = w;
        }
        let report = run_property_suites(&config);
        let files = report
            .write_witnesses(&args.witness_dir)
            .map_err(|e| Failure::Usage(format!("{}: {e}", args.witness_dir.display())))?;
        print!("{}", report.render(&files));
        failed += report.failure_count();
    }
    Ok(if failed == 0 { RELATED } else { UNRELATED })
}

fn random(args: &RandomArgs) -> Result<u8, Failure> {
    if args.states == 0 {
        return Err(Failure::Usage("--states must be at least 1".into()));
    }
    let mut params = GenParams {
        seed: args.seed,
        states: args.states,
        max_transitions: args.max_transitions,
        alphabet: args.alphabet,
        ..GenParams::default()
    };
    if !args.grid.is_empty() {
        let grid: Vec<Rational> = args
            .grid
            .iter()
            .map(|g| parse_rational(g).ok_or_else(|| Failure::Usage(format!("bad grid mass `{g}`"))))
            .collect::<Result<_, _>>()?;
        if grid.iter().any(|g| *g <= Rational::from_integer(0.into()) || *g > Rational::from_integer(1.into())) {
            return Err(Failure::Usage("grid masses must lie in (0,1]".into()));
        }
        params.grid = grid;
    }
    let text = write_model(&generate_random(&params));
    match &args.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(RELATED)
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Parse { file } => {
            let a = load(file)?;
            println!("{}: {} states, {} transitions", a.name(), a.len(), a.transition_count());
            Ok(RELATED)
        }
        Command::Mc(args) => mc(args),
        Command::Relate(args) => relate(args),
        Command::Compose { left, right, output } => compose(left, right, output),
        Command::Taxonomy { file, depth } => taxonomy(file, *depth),
        Command::Regress(args) => regress(args),
        Command::Random(args) => random(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(USAGE)
        }
        Err(Failure::Capped(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(CAPPED)
        }
    }
}
