//! Differential verification: compiled plans against the oracle on
//! generated cases.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{constructs_of, gen_category, gen_query, shrink, Construct, Features, Limits};
use crate::calculus::{parse, CalculusQuery};
use crate::category::InstanceCategory;
use crate::compile::{compile_with, CompileError, CompileOptions, Fault};
use crate::eval::{evaluate, oracle_evaluate_bounded, OracleError, DEFAULT_ORACLE_BOUND};
use crate::io::{category_from_json_str, category_to_json_string, IoError};
use crate::relation::Relation;

/// Derives the seed of case `i` from the run seed (SplitMix64).
pub fn case_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed.wrapping_add(i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub cases: usize,
    pub limits: Limits,
    pub features: Features,
    pub fault: Option<Fault>,
    /// Worker threads; 0 means one per available core.
    pub threads: usize,
    pub shrink: bool,
    /// Counterexamples kept (and shrunk) in the report.
    pub max_counterexamples: usize,
    pub oracle_bound: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            cases: 1000,
            limits: Limits::default(),
            features: Features::default(),
            fault: None,
            threads: 0,
            shrink: true,
            max_counterexamples: 3,
            oracle_bound: DEFAULT_ORACLE_BOUND,
        }
    }
}

/// How one case came out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Agree,
    /// Both sides produced a result and they differ.
    Mismatch { engine: Relation, oracle: Relation },
    /// The oracle answered but compiling or evaluating failed.
    EngineError { message: String, oracle: Relation },
    /// The compiler rejected the query by design.
    Rejected(String),
    /// The oracle could not answer (work bound exceeded).
    Skipped(String),
}

impl Outcome {
    pub fn is_failure(&self) -> bool {
        matches!(self, Outcome::Mismatch { .. } | Outcome::EngineError { .. })
    }
}

/// Compiles, evaluates and compares one query against the oracle.
pub fn check_case(cat: &InstanceCategory, query: &CalculusQuery, opts: &CompileOptions, bound: u64) -> Outcome {
    let oracle = match oracle_evaluate_bounded(query, cat, bound) {
        Ok(r) => r,
        Err(e @ OracleError::Bound { .. }) => return Outcome::Skipped(e.to_string()),
        Err(e) => return Outcome::Rejected(e.to_string()),
    };
    let plan = match compile_with(query, cat, opts) {
        Ok(p) => p,
        Err(e @ (CompileError::UnusedUniversal(_) | CompileError::NegatedPredicate(_) | CompileError::Normalize(_))) => {
            return Outcome::Rejected(e.to_string())
        }
        Err(e) => {
            return Outcome::EngineError {
                message: e.to_string(),
                oracle,
            }
        }
    };
    match evaluate(&plan, cat) {
        Ok(engine) if engine.same_contents(&oracle) => Outcome::Agree,
        Ok(engine) => Outcome::Mismatch { engine, oracle },
        Err(e) => Outcome::EngineError {
            message: e.to_string(),
            oracle,
        },
    }
}

#[derive(Debug, Clone)]
pub struct CaseResult {
    pub index: usize,
    pub seed: u64,
    pub category: InstanceCategory,
    pub query: Option<CalculusQuery>,
    pub outcome: Outcome,
}

/// Generates and checks case `index` of a run.
pub fn run_case(config: &VerifyConfig, index: usize) -> CaseResult {
    let seed = case_seed(config.seed, index as u64);
    let (category, _) = gen_category(seed, &config.limits);
    let query = gen_query(seed ^ 0x5151_5151, &category, &config.features);
    let outcome = match &query {
        Some(q) => check_case(&category, q, &compile_options(config), config.oracle_bound),
        None => Outcome::Skipped("no object to range over".into()),
    };
    CaseResult {
        index,
        seed,
        category,
        query,
        outcome,
    }
}

fn compile_options(config: &VerifyConfig) -> CompileOptions {
    CompileOptions {
        fault: config.fault,
        ..CompileOptions::default()
    }
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub case: CaseResult,
    /// The shrunk case and its outcome, when shrinking ran.
    pub shrunk: Option<(InstanceCategory, CalculusQuery, Outcome)>,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub cases: usize,
    pub agreed: usize,
    pub failed: usize,
    pub rejected: usize,
    pub skipped: usize,
    /// Cases containing each construct.
    pub coverage: BTreeMap<Construct, usize>,
    /// Indices of all failing cases, in order.
    pub failures: Vec<usize>,
    pub counterexamples: Vec<Counterexample>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    pub fn first_failure(&self) -> Option<usize> {
        self.failures.first().copied()
    }

    /// A deterministic plain-text report.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed {}  cases {}", self.seed, self.cases);
        let _ = writeln!(
            s,
            "agreed {}  failed {}  rejected {}  skipped {}",
            self.agreed, self.failed, self.rejected, self.skipped
        );
        let _ = writeln!(s, "coverage:");
        for c in Construct::ALL {
            let _ = writeln!(s, "  {:<14} {}", c.name(), self.coverage.get(&c).copied().unwrap_or(0));
        }
        for ce in &self.counterexamples {
            let _ = writeln!(s, "\ncounterexample: case {} (seed {})", ce.case.index, ce.case.seed);
            if let Some(q) = &ce.case.query {
                write_case(&mut s, &ce.case.category, q, &ce.case.outcome);
            }
            if let Some((cat, q, outcome)) = &ce.shrunk {
                let _ = writeln!(s, "shrunk:");
                write_case(&mut s, cat, q, outcome);
            }
        }
        let _ = writeln!(s, "\n{}", if self.passed() { "PASS" } else { "FAIL" });
        s
    }
}

fn write_case(s: &mut String, cat: &InstanceCategory, q: &CalculusQuery, outcome: &Outcome) {
    let _ = writeln!(s, "  query: {q}");
    let _ = writeln!(s, "  category:");
    for line in category_to_json_string(cat).lines() {
        let _ = writeln!(s, "    {line}");
    }
    match outcome {
        Outcome::Mismatch { engine, oracle } => {
            let _ = writeln!(s, "  engine:\n{}", indent(&engine.to_string()));
            let _ = writeln!(s, "  oracle:\n{}", indent(&oracle.to_string()));
        }
        Outcome::EngineError { message, oracle } => {
            let _ = writeln!(s, "  engine error: {message}");
            let _ = writeln!(s, "  oracle:\n{}", indent(&oracle.to_string()));
        }
        other => {
            let _ = writeln!(s, "  outcome: {other:?}");
        }
    }
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
}

/// Runs `config.cases` generated cases in parallel. Results do not depend
/// on the thread count.
pub fn verify(config: &VerifyConfig) -> VerifyReport {
    let threads = if config.threads == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        config.threads
    }
    .min(config.cases.max(1));
    let mut results: Vec<Option<CaseResult>> = vec![None; config.cases];
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                scope.spawn(move || {
                    (t..config.cases)
                        .step_by(threads)
                        .map(|i| run_case(config, i))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for r in h.join().expect("verification worker panicked") {
                let i = r.index;
                results[i] = Some(r);
            }
        }
    });
    let results: Vec<CaseResult> = results.into_iter().map(|r| r.expect("every case ran")).collect();
    summarize(config, results)
}

fn summarize(config: &VerifyConfig, results: Vec<CaseResult>) -> VerifyReport {
    let mut report = VerifyReport {
        seed: config.seed,
        cases: results.len(),
        agreed: 0,
        failed: 0,
        rejected: 0,
        skipped: 0,
        coverage: BTreeMap::new(),
        failures: Vec::new(),
        counterexamples: Vec::new(),
    };
    let opts = compile_options(config);
    for r in results {
        if let Some(q) = &r.query {
            for c in constructs_of(q) {
                *report.coverage.entry(c).or_default() += 1;
            }
        }
        match &r.outcome {
            Outcome::Agree => report.agreed += 1,
            Outcome::Rejected(_) => report.rejected += 1,
            Outcome::Skipped(_) => report.skipped += 1,
            Outcome::Mismatch { .. } | Outcome::EngineError { .. } => {
                report.failed += 1;
                report.failures.push(r.index);
                if report.counterexamples.len() < config.max_counterexamples {
                    let shrunk = match (&r.query, config.shrink) {
                        (Some(q), true) => {
                            let fails = |c: &InstanceCategory, q: &CalculusQuery| {
                                check_case(c, q, &opts, config.oracle_bound).is_failure()
                            };
                            let (cat, q) = shrink(&r.category, q, &fails);
                            let outcome = check_case(&cat, &q, &opts, config.oracle_bound);
                            Some((cat, q, outcome))
                        }
                        _ => None,
                    };
                    report.counterexamples.push(Counterexample { case: r, shrunk });
                }
            }
        }
    }
    report
}

/// One stored regression case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusCase {
    pub name: String,
    pub query: String,
    pub category: serde_json::Value,
}

impl CorpusCase {
    pub fn new(name: impl Into<String>, cat: &InstanceCategory, query: &CalculusQuery) -> Self {
        let category = serde_json::from_str(&category_to_json_string(cat)).expect("category JSON is well formed");
        Self {
            name: name.into(),
            query: query.to_string(),
            category,
        }
    }

    pub fn load(&self) -> Result<(InstanceCategory, CalculusQuery), IoError> {
        let cat = category_from_json_str(&self.category.to_string())?;
        let query = parse(&self.query).map_err(|e| IoError::Format {
            location: format!("{}: query", self.name),
            message: e.to_string(),
        })?;
        Ok((cat, query))
    }
}

/// Writes cases as one JSON array.
pub fn export_corpus(cases: &[CorpusCase], path: impl AsRef<Path>) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(cases).expect("corpus serializes");
    crate::io::write_file(path.as_ref(), &(text + "\n"))
}

pub fn import_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusCase>, IoError> {
    let path = path.as_ref();
    let text = crate::io::read_file(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::Format {
        location: path.display().to_string(),
        message: e.to_string(),
    })
}

/// The failing cases of a report as corpus entries, shrunk when available.
pub fn corpus_from_report(report: &VerifyReport) -> Vec<CorpusCase> {
    report
        .counterexamples
        .iter()
        .filter_map(|ce| {
            let name = format!("seed-{}-case-{}", report.seed, ce.case.index);
            match &ce.shrunk {
                Some((cat, q, _)) => Some(CorpusCase::new(name, cat, q)),
                None => ce.case.query.as_ref().map(|q| CorpusCase::new(name, &ce.case.category, q)),
            }
        })
        .collect()
}
