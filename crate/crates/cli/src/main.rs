use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use synchro::automaton::DEFAULT_SUBSET_CAP;
use synchro::cone::{ConeContext, ConeSummary};
use synchro::generators::{GeneratorFilters, GeneratorSpec};
use synchro::growth::{gamma_growth, verify_growth_lemmas, GrowthTrace, LemmaCheck};
use synchro::perm::{is_transitive, permutation_of_letter, PermSet, DEFAULT_GROUP_CAP};
use synchro::synthesis::{
    bounds_report, synthesize_reset_word, BoundsOptions, BoundsReport, ExtensionStep,
};
use synchro::verify::{self, CheckOptions, SuiteReport};
use synchro::{emit_automaton, parse_automaton, Automaton, Error};

mod exit {
    pub const CHECKS_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const PARSE: u8 = 10;
    pub const NOT_SYNCHRONIZING: u8 = 11;
    pub const NOT_TRANSITIVE: u8 = 12;
    pub const RESOURCE_CAP: u8 = 13;
    pub const INTERNAL: u8 = 14;
    pub const BAD_LETTER: u8 = 15;
    pub const PRECONDITION: u8 = 16;
    pub const IO: u8 = 17;
}

#[derive(Parser, Debug)]
#[command(
    name = "synchro",
    version,
    about = "Reset words and reset-threshold bounds for synchronizing automata"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Permutation letters to use as A, comma separated. Defaults to every defect-0 letter.
    #[arg(long, global = true, value_name = "NAMES")]
    perm_set: Option<String>,
    /// Also compute the exact reset threshold by subset search.
    #[arg(long, global = true)]
    exact: bool,
    /// Maximum number of subsets visited by the exact search.
    #[arg(long, global = true, default_value_t = DEFAULT_SUBSET_CAP)]
    subset_cap: usize,
    /// Maximum permutation group order to enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_GROUP_CAP)]
    group_cap: usize,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full analysis: defects, ST membership, cone sequences, digraph growth, bounds.
    Analyze { file: PathBuf },
    /// Build a reset word by subset extension and certify its length.
    Synthesize { file: PathBuf },
    /// Exact reset threshold and a shortest reset word.
    Rt { file: PathBuf },
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Write automata in the text file format.
    Generate(GenerateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Suite {
    Lemmas,
    Bounds,
    Cerny,
    Enumerate,
    Exhaustive,
    Oracles,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// State count; for `cerny` the largest member of the family.
    #[arg(long)]
    n: Option<usize>,
    /// Letters per automaton for `enumerate`.
    #[arg(long, default_value_t = 2)]
    letters: usize,
    /// Number of random instances.
    #[arg(long)]
    seed_count: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Cerny,
    RandomSt,
    Enumerate,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Permutation letters (random-st) or letters per table (enumerate).
    #[arg(long, default_value_t = 2)]
    letters: usize,
    /// Defect-1 letters (random-st).
    #[arg(long, default_value_t = 1)]
    defect_one: usize,
    #[arg(long)]
    synchronizing_only: bool,
    #[arg(long)]
    st_only: bool,
    #[arg(long)]
    defect_one_only: bool,
    /// Keep one table per state relabeling class (n ≤ 4).
    #[arg(long)]
    dedup: bool,
    /// Output file; standard output when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
    ChecksFailed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => exit::IO,
            Failure::ChecksFailed(_) => exit::CHECKS_FAILED,
            Failure::Core(e) => match e {
                Error::Parse { .. } => exit::PARSE,
                Error::NotSynchronizing => exit::NOT_SYNCHRONIZING,
                Error::NotTransitive => exit::NOT_TRANSITIVE,
                Error::ResourceCap { .. } | Error::CapExceeded { .. } => exit::RESOURCE_CAP,
                Error::InternalContradiction(_) => exit::INTERNAL,
                Error::NotAPermutation(_)
                | Error::UnknownLetter(_)
                | Error::InvalidLetter { .. } => exit::BAD_LETTER,
                _ => exit::PRECONDITION,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Io(_) => "io",
            Failure::ChecksFailed(_) => "checks-failed",
            Failure::Core(e) => match e {
                Error::Parse { .. } => "parse-error",
                Error::NotSynchronizing => "not-synchronizing",
                Error::NotTransitive => "not-transitive",
                Error::ResourceCap { .. } | Error::CapExceeded { .. } => "resource-cap",
                Error::InternalContradiction(_) => "internal-contradiction",
                Error::NotAPermutation(_) => "not-a-permutation",
                Error::UnknownLetter(_) | Error::InvalidLetter { .. } => "unknown-letter",
                Error::NotStronglyConnected => "not-strongly-connected",
                Error::UnsupportedAlphabet { .. } => "unsupported-alphabet",
                Error::NoDeficientLetters => "no-deficient-letters",
                _ => "precondition",
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) | Failure::ChecksFailed(m) => m.clone(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn read_automaton(path: &Path) -> CliResult<Automaton> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Io(format!("reading standard input: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?
    };
    Ok(parse_automaton(&text)?)
}

fn perm_set(aut: &Automaton, global: &Global) -> CliResult<PermSet> {
    Ok(match &global.perm_set {
        Some(names) => PermSet::from_names(aut, names)?,
        None => PermSet::all_permutation_letters(aut),
    })
}

fn one_based(parts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    parts
        .into_iter()
        .map(|c| c.into_iter().map(|q| q + 1).collect())
        .collect()
}

#[derive(Serialize)]
struct LetterInfo {
    name: String,
    defect: usize,
    /// Cycle notation, for permutation letters.
    cycles: Option<String>,
}

#[derive(Serialize)]
struct GrowthSummary {
    transient_length: usize,
    d: usize,
    arc_counts: Vec<usize>,
    strong_counts: Vec<usize>,
    weak_counts: Vec<usize>,
    limit_strong_components: Vec<Vec<usize>>,
    limit_weak_components: Vec<Vec<usize>>,
    limit_sink_count: usize,
    checks: Vec<LemmaCheck>,
}

fn growth_summary(trace: &GrowthTrace, checks: Vec<LemmaCheck>) -> GrowthSummary {
    let limit = &trace.limit().components;
    GrowthSummary {
        transient_length: trace.transient_length(),
        d: trace.d,
        arc_counts: trace.steps.iter().map(|s| s.graph.arc_count()).collect(),
        strong_counts: trace
            .steps
            .iter()
            .map(|s| s.components.strong_count())
            .collect(),
        weak_counts: trace
            .steps
            .iter()
            .map(|s| s.components.weak_count())
            .collect(),
        limit_strong_components: one_based(limit.strong_partition()),
        limit_weak_components: one_based(limit.weak_partition()),
        limit_sink_count: limit.sink_count(),
        checks,
    }
}

#[derive(Serialize)]
struct SynthesisDoc {
    word: Vec<String>,
    length: usize,
    bound_main: usize,
    dim_k_limit: usize,
    trans_len_k: usize,
    max_step_length: usize,
    verified_reset: bool,
    within_bound: bool,
    steps: Vec<ExtensionStep>,
}

fn synthesis_doc(aut: &Automaton, a: &PermSet) -> CliResult<SynthesisDoc> {
    let s = synthesize_reset_word(aut, a)?;
    if !aut.is_reset_word(&s.word)? {
        return Err(Error::InternalContradiction("synthesized word does not reset".into()).into());
    }
    Ok(SynthesisDoc {
        word: s.word.names(aut),
        length: s.length,
        bound_main: s.bound_main,
        dim_k_limit: s.dim_k_limit,
        trans_len_k: s.trans_len_k,
        max_step_length: s.max_step_length,
        verified_reset: s.verified_reset,
        within_bound: s.within_bound,
        steps: s.steps,
    })
}

#[derive(Serialize)]
struct RtDoc {
    n: usize,
    rt: usize,
    witness: Vec<String>,
}

#[derive(Serialize)]
struct AnalyzeDoc {
    n: usize,
    letters: Vec<LetterInfo>,
    perm_set: Vec<String>,
    strongly_connected: bool,
    synchronizing: bool,
    transitive: bool,
    cone: ConeSummary,
    growth: Option<GrowthSummary>,
    bounds: BoundsReport,
    rt_witness: Option<Vec<String>>,
    synthesis: SynthesisDoc,
}

fn analyze(aut: &Automaton, g: &Global) -> CliResult<AnalyzeDoc> {
    let a = perm_set(aut, g)?;
    if !aut.is_synchronizing() {
        return Err(Error::NotSynchronizing.into());
    }
    if !is_transitive(&a) {
        return Err(Error::NotTransitive.into());
    }
    let letters = aut
        .letters()
        .map(|l| LetterInfo {
            name: aut.letter_name(l).to_string(),
            defect: aut.letter_defect(l),
            cycles: permutation_of_letter(aut, l).ok().map(|p| p.to_string()),
        })
        .collect();
    let ctx = ConeContext::new(aut, &a)?;
    let growth = match gamma_growth(aut, &a) {
        Ok(trace) => {
            let checks = verify_growth_lemmas(aut, &a)?.checks;
            Some(growth_summary(&trace, checks))
        }
        Err(Error::NoDefectOneLetters) => None,
        Err(e) => return Err(e.into()),
    };
    let bounds = bounds_report(
        aut,
        &a,
        BoundsOptions {
            group_cap: g.group_cap,
            subset_cap: g.subset_cap,
            exact: g.exact,
        },
    )?;
    let rt_witness = if g.exact {
        Some(aut.reset_threshold_exact(g.subset_cap)?.witness.names(aut))
    } else {
        None
    };
    Ok(AnalyzeDoc {
        n: aut.n(),
        letters,
        perm_set: a.names(aut),
        strongly_connected: aut.is_strongly_connected(),
        synchronizing: true,
        transitive: true,
        cone: ConeSummary::from(ctx.report()),
        growth,
        bounds,
        rt_witness,
        synthesis: synthesis_doc(aut, &a)?,
    })
}

fn rt(aut: &Automaton, g: &Global) -> CliResult<RtDoc> {
    if !aut.is_synchronizing() {
        return Err(Error::NotSynchronizing.into());
    }
    let r = aut.reset_threshold_exact(g.subset_cap)?;
    Ok(RtDoc {
        n: aut.n(),
        rt: r.length,
        witness: r.witness.names(aut),
    })
}

#[derive(Serialize)]
struct VerifyDoc {
    suite: String,
    seed: u64,
    passed: bool,
    reports: Vec<SuiteReport>,
}

fn verify_cmd(args: &VerifyArgs, g: &Global) -> CliResult<VerifyDoc> {
    let opts = CheckOptions {
        seed: g.seed,
        group_cap: g.group_cap,
        subset_cap: g.subset_cap,
        ..CheckOptions::default()
    };
    let random = |default_count: usize| -> CliResult<Vec<verify::Instance>> {
        let count = args.seed_count.unwrap_or(default_count);
        Ok(match args.n {
            Some(n) => verify::random_st_batch_sizes(count, g.seed, &[n])?,
            None => verify::random_st_batch(count, g.seed)?,
        })
    };
    let reports = match args.suite {
        Suite::Lemmas => vec![verify::lemma_suite(&random(20)?, &opts)],
        Suite::Bounds => vec![verify::bounds_suite(&random(20)?, &opts)],
        Suite::Cerny => vec![verify::cerny_suite(args.n.unwrap_or(8), &opts)?],
        Suite::Enumerate => vec![verify::enumerate_suite(
            args.n.unwrap_or(3),
            args.letters,
            &opts,
        )?],
        Suite::Exhaustive => vec![verify::lemma_suite(&verify::exhaustive_st_batch()?, &opts)],
        Suite::Oracles => {
            let count = args.seed_count.unwrap_or(1000);
            vec![
                verify::reachability_oracle_suite(count, args.n.unwrap_or(10), g.seed),
                verify::escape_length_suite(count.div_ceil(2), g.seed)?,
            ]
        }
    };
    Ok(VerifyDoc {
        suite: format!("{:?}", args.suite).to_lowercase(),
        seed: g.seed,
        passed: reports.iter().all(SuiteReport::passed),
        reports,
    })
}

fn generate(args: &GenerateArgs, g: &Global) -> CliResult<Vec<Automaton>> {
    let filters = GeneratorFilters {
        synchronizing_only: args.synchronizing_only,
        st_only: args.st_only,
        defect_at_most_one: args.defect_one_only,
    };
    let spec = match args.kind {
        Kind::Cerny => GeneratorSpec::cerny(args.n),
        Kind::RandomSt => GeneratorSpec::random_st(args.n, args.letters, args.defect_one, g.seed),
        Kind::Enumerate => GeneratorSpec::enumerate(args.n, args.letters, filters),
    };
    let spec = GeneratorSpec { filters, ..spec };
    Ok(spec.instances(args.dedup)?)
}

/// Renders a JSON value as indented `key: value` lines. Arrays of scalars go
/// on one line; words are joined by spaces.
fn render_text(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                match v {
                    Value::Object(_) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(v, indent + 1, out);
                    }
                    Value::Array(items) if items.iter().any(|x| x.is_object() || x.is_array()) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for (i, item) in items.iter().enumerate() {
                            if item.is_object() {
                                out.push_str(&format!("{pad}  - [{i}]\n"));
                                render_text(item, indent + 2, out);
                            } else {
                                out.push_str(&format!("{pad}  - {}\n", scalar(item)));
                            }
                        }
                    }
                    _ => out.push_str(&format!("{pad}{k}: {}\n", scalar(v))),
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Array(items) if items.is_empty() => "[]".into(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

fn emit<T: Serialize>(doc: &T, json: bool) -> CliResult<()> {
    let value = serde_json::to_value(doc).map_err(|e| Failure::Io(e.to_string()))?;
    let text = if json {
        serde_json::to_string_pretty(&value).map_err(|e| Failure::Io(e.to_string()))? + "\n"
    } else {
        let mut s = String::new();
        render_text(&value, 0, &mut s);
        s
    };
    io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| Failure::Io(e.to_string()))
}

fn configure_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("SYNCHRO_THREADS") {
        let threads: usize = v.parse().map_err(|_| {
            Failure::Core(Error::Precondition(format!(
                "SYNCHRO_THREADS=`{v}` is not a number"
            )))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Io(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Analyze { file } => emit(&analyze(&read_automaton(file)?, g)?, g.json),
        Command::Synthesize { file } => {
            let aut = read_automaton(file)?;
            let a = perm_set(&aut, g)?;
            emit(&synthesis_doc(&aut, &a)?, g.json)
        }
        Command::Rt { file } => emit(&rt(&read_automaton(file)?, g)?, g.json),
        Command::Verify(args) => {
            configure_threads()?;
            let doc = verify_cmd(args, g)?;
            emit(&doc, g.json)?;
            if doc.passed {
                Ok(())
            } else {
                let failed: usize = doc.reports.iter().map(|r| r.failures.len()).sum();
                Err(Failure::ChecksFailed(format!("{failed} checks failed")))
            }
        }
        Command::Generate(args) => {
            let automata = generate(args, g)?;
            if matches!(args.kind, Kind::RandomSt) {
                eprintln!("seed: {}", g.seed);
            }
            let text = if g.json {
                let doc = serde_json::json!({
                    "kind": format!("{:?}", args.kind).to_lowercase(),
                    "seed": matches!(args.kind, Kind::RandomSt).then_some(g.seed),
                    "automata": automata.iter().map(emit_automaton).collect::<Vec<_>>(),
                });
                serde_json::to_string_pretty(&doc).map_err(|e| Failure::Io(e.to_string()))? + "\n"
            } else {
                automata
                    .iter()
                    .map(emit_automaton)
                    .collect::<Vec<_>>()
                    .join("\n")
            };
            match &args.out {
                Some(path) => fs::write(path, text)
                    .map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
                None => io::stdout()
                    .write_all(text.as_bytes())
                    .map_err(|e| Failure::Io(e.to_string())),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if cli.global.json {
                let doc = serde_json::json!({"error": f.kind(), "message": f.message()});
                eprintln!("{doc}");
            } else {
                eprintln!("error [{}]: {}", f.kind(), f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
