use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use catquery::bench::{format_table, lim_sweep, log_log_slope, reach_sweep, BenchRow};
use catquery::calculus::{parse, CalculusQuery};
use catquery::compile::{CompileOptions, Fault};
use catquery::io::{load_workspace, relation_to_json_lines, relation_to_table};
use catquery::pipeline::{compile_source, explain, run_source, QueryError, Stage};
use catquery::testgen::{corpus_from_report, export_corpus, import_corpus, check_case, verify, Features, Limits, Outcome, VerifyConfig};
use catquery::InstanceCategory;

#[derive(Parser)]
#[command(name = "catquery", version, about = "Categorical calculus and algebra queries over multi-model data")]
struct Cli {
    /// Output format for stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Emit {
    Plan,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Lim,
    Reach,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    FlipTheta,
}

#[derive(clap::Args)]
struct QuerySource {
    /// File holding the query (`-` for stdin).
    query_file: Option<PathBuf>,
    /// The query text itself, instead of a file.
    #[arg(short = 'e', long = "expr", conflicts_with = "query_file")]
    expr: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query over a workspace and print the result.
    Run {
        /// Workspace file (TOML or JSON) or a category JSON file.
        workspace: PathBuf,
        #[command(flatten)]
        query: QuerySource,
    },
    /// Print an intermediate form of the compilation.
    Explain {
        #[command(flatten)]
        query: QuerySource,
        #[arg(long, default_value = "plan")]
        stage: String,
        /// Workspace to check names against; required for the diagram and
        /// plan stages.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Compile a query and print the algebra plan.
    Compile {
        #[command(flatten)]
        query: QuerySource,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Plan)]
        emit: Emit,
    },
    /// Differential test campaign: compiled plans against the oracle on
    /// generated cases.
    Verify {
        #[arg(long, default_value_t = 1000)]
        queries: usize,
        /// Overridden by the CATQUERY_SEED environment variable.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        max_objects: usize,
        #[arg(long, default_value_t = 6)]
        max_elems: usize,
        #[arg(long, default_value_t = 6)]
        max_morphisms: usize,
        /// Maximum quantifier nesting depth.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Comma-separated constructs to enable (default: all).
        #[arg(long, value_delimiter = ',')]
        features: Option<Vec<String>>,
        /// Worker threads (0: one per core).
        #[arg(long, default_value_t = 0)]
        threads: usize,
        #[arg(long)]
        no_shrink: bool,
        /// Inject a deliberate compiler bug, to check that it is caught.
        #[arg(long, value_enum)]
        fault: Option<FaultArg>,
        /// Write the counterexamples as a regression corpus.
        #[arg(long)]
        corpus_out: Option<PathBuf>,
        /// Re-check a stored corpus instead of generating cases.
        #[arg(long)]
        corpus_in: Option<PathBuf>,
    },
    /// Time scaling sweeps.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Diagram width for the lim suite.
        #[arg(long, default_value_t = 2)]
        p: usize,
        /// Largest size in the sweep (sizes double from 10, plus n=1).
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
    },
    /// Load a workspace and check it, and optionally a query against it.
    Validate {
        workspace: PathBuf,
        #[command(flatten)]
        query: QuerySource,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn query(e: &QueryError, src: &str) -> Self {
        Self::new(e.exit_code() as u8, e.diagnostic(src))
    }
}

type CmdResult = Result<u8, Failure>;

fn read_query(source: &QuerySource) -> Result<Option<String>, Failure> {
    if let Some(e) = &source.expr {
        return Ok(Some(e.clone()));
    }
    let Some(path) = &source.query_file else { return Ok(None) };
    let mut text = String::new();
    if path == Path::new("-") {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| Failure::new(2, format!("stdin: {e}")))?;
    } else {
        text = std::fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
    }
    Ok(Some(text))
}

fn require_query(source: &QuerySource) -> Result<String, Failure> {
    read_query(source)?.ok_or_else(|| Failure::new(2, "no query given (pass a query file or --expr)"))
}

fn load(path: &Path) -> Result<InstanceCategory, Failure> {
    load_workspace(path).map_err(|e| Failure::new(2, e.to_string()))
}

fn out(text: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(text.as_bytes());
}

fn cmd_run(format: Format, workspace: &Path, query: &QuerySource) -> CmdResult {
    let cat = load(workspace)?;
    let src = require_query(query)?;
    let rel = run_source(&src, &cat, &CompileOptions::default()).map_err(|e| Failure::query(&e, &src))?;
    out(&match format {
        Format::Json => relation_to_json_lines(&rel, &cat),
        Format::Table => relation_to_table(&rel, &cat),
    });
    Ok(0)
}

fn cmd_explain(format: Format, query: &QuerySource, stage: &str, data: Option<&Path>) -> CmdResult {
    let stage: Stage = stage.parse().map_err(|e: String| Failure::new(2, e))?;
    let src = require_query(query)?;
    let q: CalculusQuery = parse(&src).map_err(|e| Failure::query(&QueryError::Parse(e), &src))?;
    let cat = match data {
        Some(p) => Some(load(p)?),
        None if matches!(stage, Stage::Prenex | Stage::Dnf) => None,
        None => return Err(Failure::new(2, "--data is required for the diagram and plan stages")),
    };
    let text = explain(&q, cat.as_ref(), stage, &CompileOptions::default()).map_err(|e| Failure::query(&e, &src))?;
    match format {
        Format::Json => out(&format!("{}\n", json!({ "stage": stage_name(stage), "text": text }))),
        Format::Table => out(&text),
    }
    Ok(0)
}

fn stage_name(stage: Stage) -> &'static str {
    match stage {
        Stage::Prenex => "prenex",
        Stage::Dnf => "dnf",
        Stage::Diagram => "diagram",
        Stage::Plan => "plan",
    }
}

fn cmd_compile(format: Format, query: &QuerySource, data: &Path) -> CmdResult {
    let cat = load(data)?;
    let src = require_query(query)?;
    let plan = compile_source(&src, &cat, &CompileOptions::default()).map_err(|e| Failure::query(&e, &src))?;
    match format {
        Format::Json => {
            let lines: Vec<String> = plan.to_text().lines().map(String::from).collect();
            out(&format!("{}\n", json!({ "plan": lines })));
        }
        Format::Table => out(&plan.to_text()),
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    format: Format,
    queries: usize,
    seed: u64,
    limits: Limits,
    depth: usize,
    features: Option<&[String]>,
    threads: usize,
    shrink: bool,
    fault: Option<FaultArg>,
    corpus_out: Option<&Path>,
    corpus_in: Option<&Path>,
) -> CmdResult {
    let seed = match std::env::var("CATQUERY_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::new(2, format!("CATQUERY_SEED `{s}` is not an unsigned integer")))?,
        Err(_) => seed,
    };
    let fault = fault.map(|FaultArg::FlipTheta| Fault::FlipTheta);
    if let Some(path) = corpus_in {
        return verify_corpus(format, path, fault);
    }
    let mut feats = Features::all(depth);
    if let Some(names) = features {
        feats.constructs.clear();
        for n in names.iter().filter(|n| !n.is_empty()) {
            let c = catquery::testgen::Construct::parse(n).ok_or_else(|| Failure::new(2, format!("unknown feature `{n}`")))?;
            feats.constructs.insert(c);
        }
    }
    let config = VerifyConfig {
        seed,
        cases: queries,
        limits,
        features: feats,
        fault,
        threads,
        shrink,
        ..VerifyConfig::default()
    };
    let report = verify(&config);
    match format {
        Format::Table => out(&report.to_text()),
        Format::Json => {
            let coverage: serde_json::Map<String, serde_json::Value> =
                report.coverage.iter().map(|(c, n)| (c.name().to_string(), json!(n))).collect();
            let value = json!({
                "seed": report.seed,
                "cases": report.cases,
                "agreed": report.agreed,
                "failed": report.failed,
                "rejected": report.rejected,
                "skipped": report.skipped,
                "coverage": coverage,
                "failures": report.failures,
                "report": report.to_text(),
                "passed": report.passed(),
            });
            out(&format!("{value}\n"));
        }
    }
    if let Some(path) = corpus_out {
        export_corpus(&corpus_from_report(&report), path).map_err(|e| Failure::new(4, e.to_string()))?;
    }
    Ok(if report.passed() { 0 } else { 1 })
}

fn verify_corpus(format: Format, path: &Path, fault: Option<Fault>) -> CmdResult {
    let cases = import_corpus(path).map_err(|e| Failure::new(2, e.to_string()))?;
    let opts = CompileOptions {
        fault,
        ..CompileOptions::default()
    };
    let mut failed = 0;
    let mut lines = Vec::new();
    for case in &cases {
        let (cat, q) = case.load().map_err(|e| Failure::new(2, e.to_string()))?;
        let outcome = check_case(&cat, &q, &opts, catquery::eval::DEFAULT_ORACLE_BOUND);
        let status = match &outcome {
            Outcome::Agree => "agree",
            Outcome::Rejected(_) => "rejected",
            Outcome::Skipped(_) => "skipped",
            _ => {
                failed += 1;
                "FAIL"
            }
        };
        lines.push((case.name.clone(), status));
    }
    match format {
        Format::Table => {
            for (name, status) in &lines {
                out(&format!("{status:<8} {name}\n"));
            }
            out(&format!("{} cases, {failed} failed\n", cases.len()));
        }
        Format::Json => {
            for (name, status) in &lines {
                out(&format!("{}\n", json!({ "case": name, "status": status })));
            }
        }
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

fn sweep_sizes(max: usize) -> Vec<usize> {
    let mut sizes = vec![1];
    let mut n = 10;
    while n <= max {
        sizes.push(n);
        n *= 2;
    }
    sizes
}

fn cmd_bench(format: Format, suite: Suite, p: usize, max_n: Option<usize>, reps: usize) -> CmdResult {
    let (rows, slope): (Vec<BenchRow>, f64) = match suite {
        Suite::Lim => {
            if !(1..=4).contains(&p) {
                return Err(Failure::new(2, "--p must be between 1 and 4"));
            }
            let default_max = if p >= 3 { 80 } else { 160 };
            let rows = lim_sweep(p, &sweep_sizes(max_n.unwrap_or(default_max)), reps);
            let fit: Vec<BenchRow> = rows.iter().filter(|r| r.n >= 10).cloned().collect();
            let slope = log_log_slope(&fit, |r| r.n as f64);
            (rows, slope)
        }
        Suite::Reach => {
            let rows = reach_sweep(&sweep_sizes(max_n.unwrap_or(2560)), reps);
            let fit: Vec<BenchRow> = rows.iter().filter(|r| r.n >= 10).cloned().collect();
            let slope = log_log_slope(&fit, |r| r.edges as f64);
            (rows, slope)
        }
    };
    match format {
        Format::Table => {
            out(&format_table(&rows));
            out(&format!("log-log slope: {slope:.3}\n"));
        }
        Format::Json => {
            for r in &rows {
                out(&format!(
                    "{}\n",
                    json!({ "n": r.n, "rows": r.rows, "edges": r.edges, "seconds": r.seconds })
                ));
            }
            out(&format!("{}\n", json!({ "slope": slope })));
        }
    }
    Ok(0)
}

fn cmd_validate(format: Format, workspace: &Path, query: &QuerySource) -> CmdResult {
    let cat = load(workspace)?;
    let elements: usize = cat.objects().iter().map(|o| o.len()).sum();
    if let Some(src) = read_query(query)? {
        catquery::pipeline::parse_checked(&src, &cat).map_err(|e| Failure::query(&e, &src))?;
    }
    match format {
        Format::Table => out(&format!(
            "ok: {} objects, {elements} elements, {} morphisms\n",
            cat.objects().len(),
            cat.morphisms().len()
        )),
        Format::Json => out(&format!(
            "{}\n",
            json!({ "ok": true, "objects": cat.objects().len(), "elements": elements, "morphisms": cat.morphisms().len() })
        )),
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let f = cli.format;
    let result = match &cli.command {
        Command::Run { workspace, query } => cmd_run(f, workspace, query),
        Command::Explain { query, stage, data } => cmd_explain(f, query, stage, data.as_deref()),
        Command::Compile { query, data, emit: Emit::Plan } => cmd_compile(f, query, data),
        Command::Verify {
            queries,
            seed,
            max_objects,
            max_elems,
            max_morphisms,
            depth,
            features,
            threads,
            no_shrink,
            fault,
            corpus_out,
            corpus_in,
        } => cmd_verify(
            f,
            *queries,
            *seed,
            Limits {
                max_objects: *max_objects,
                max_elements: *max_elems,
                max_morphisms: *max_morphisms,
            },
            *depth,
            features.as_deref(),
            *threads,
            !no_shrink,
            *fault,
            corpus_out.as_deref(),
            corpus_in.as_deref(),
        ),
        Command::Bench { suite, p, max_n, reps } => cmd_bench(f, *suite, *p, *max_n, *reps),
        Command::Validate { workspace, query } => cmd_validate(f, workspace, query),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
