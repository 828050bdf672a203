//! Parse, compile and evaluate in one call, and the intermediate forms
//! shown by `explain`.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::calculus::{check_safety, parse, CalculusQuery, ParseError};
use crate::category::{InstanceCategory, Violation};
use crate::compile::{compile_with, AlgebraPlan, CompileError, CompileOptions, NodeId, PlanOp};
use crate::eval::{evaluate, EvalError};
use crate::normalize::{fold_empty_quantifiers, format_clauses, format_prefix, to_prenex_with_limit};
use crate::relation::Relation;

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("{0}")]
    Parse(ParseError),
    #[error("query is not safe: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Unsafe(Vec<Violation>),
    #[error(transparent)]
    Compile(CompileError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl QueryError {
    /// 2 for parse and safety errors, 3 for compile errors, 4 at runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            QueryError::Parse(_) | QueryError::Unsafe(_) => 2,
            QueryError::Compile(_) => 3,
            QueryError::Eval(_) => 4,
        }
    }

    /// The message, with a caret under the offending position for parse
    /// errors.
    pub fn diagnostic(&self, src: &str) -> String {
        match self {
            QueryError::Parse(e) => format!("{e}\n{}", e.caret(src)),
            other => other.to_string(),
        }
    }
}

impl From<CompileError> for QueryError {
    fn from(e: CompileError) -> Self {
        match e {
            CompileError::Unsafe(v) => QueryError::Unsafe(v),
            other => QueryError::Compile(other),
        }
    }
}

/// Parses and checks safety.
pub fn parse_checked(src: &str, cat: &InstanceCategory) -> Result<CalculusQuery, QueryError> {
    let q = parse(src).map_err(QueryError::Parse)?;
    let violations = check_safety(&q, cat);
    if violations.is_empty() {
        Ok(q)
    } else {
        Err(QueryError::Unsafe(violations))
    }
}

pub fn compile_source(src: &str, cat: &InstanceCategory, opts: &CompileOptions) -> Result<AlgebraPlan, QueryError> {
    let q = parse_checked(src, cat)?;
    Ok(compile_with(&q, cat, opts)?)
}

pub fn run_source(src: &str, cat: &InstanceCategory, opts: &CompileOptions) -> Result<Relation, QueryError> {
    let plan = compile_source(src, cat, opts)?;
    Ok(evaluate(&plan, cat)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// The query with every quantifier in front, as calculus text.
    Prenex,
    /// The quantifier prefix and one line per DNF clause.
    Dnf,
    /// Each clause's diagram: its objects and arrows.
    Diagram,
    /// The compiled plan text.
    Plan,
}

impl FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prenex" => Ok(Stage::Prenex),
            "dnf" => Ok(Stage::Dnf),
            "diagram" => Ok(Stage::Diagram),
            "plan" => Ok(Stage::Plan),
            _ => Err(format!("unknown stage `{s}` (expected prenex, dnf, diagram or plan)")),
        }
    }
}

/// Renders one intermediate form of `q`. Deterministic.
///
/// Without a category only the prenex and DNF stages are available; names
/// are then not checked and no quantifier is folded away.
pub fn explain(
    q: &CalculusQuery,
    cat: Option<&InstanceCategory>,
    stage: Stage,
    opts: &CompileOptions,
) -> Result<String, QueryError> {
    if let Some(cat) = cat {
        let violations = check_safety(q, cat);
        if !violations.is_empty() {
            return Err(QueryError::Unsafe(violations));
        }
    }
    let prenex = || {
        let folded = match cat {
            Some(cat) => fold_empty_quantifiers(q, cat),
            None => q.clone(),
        };
        to_prenex_with_limit(&folded, opts.clause_limit).map_err(|e| QueryError::Compile(CompileError::Normalize(e)))
    };
    let compiled = || match cat {
        Some(cat) => Ok(compile_with(q, cat, opts)?),
        None => Err(QueryError::Compile(CompileError::Invalid(
            "the diagram and plan stages need data".into(),
        ))),
    };
    match stage {
        Stage::Prenex => Ok(format!("{}\n", prenex()?)),
        Stage::Dnf => {
            let p = prenex()?;
            let prefix = if p.prefix.is_empty() { "none".to_string() } else { format_prefix(&p.prefix) };
            Ok(format!("prefix: {prefix}\n{}", format_clauses(&p.clauses)))
        }
        Stage::Diagram => Ok(diagrams(&compiled()?)),
        Stage::Plan => Ok(compiled()?.to_text()),
    }
}

/// Every `cat` node of the plan with its objects spelled out.
fn diagrams(plan: &AlgebraPlan) -> String {
    let mut out = String::new();
    let mut k = 0;
    for n in plan.live_nodes() {
        let PlanOp::Cat { inputs, arrows } = &plan.node(n).op else { continue };
        k += 1;
        let _ = writeln!(out, "diagram {k}:");
        for &i in inputs {
            let _ = writeln!(out, "  object ({}) = {}", plan.node(i).columns.join(", "), describe(plan, i));
        }
        for a in arrows {
            let _ = writeln!(out, "  arrow {a}");
        }
    }
    out
}

fn describe(plan: &AlgebraPlan, n: NodeId) -> String {
    match &plan.node(n).op {
        PlanOp::Scan { object, .. } => object.clone(),
        PlanOp::Union { lhs, rhs } => format!("({} | {})", describe(plan, *lhs), describe(plan, *rhs)),
        PlanOp::Intersect { lhs, rhs } => format!("({} & {})", describe(plan, *lhs), describe(plan, *rhs)),
        PlanOp::Difference { lhs, rhs } => format!("({} - {})", describe(plan, *lhs), describe(plan, *rhs)),
        PlanOp::Reach { source, target, edges, .. } => {
            format!("getReach({}, {}, {edges})", describe(plan, *source), describe(plan, *target))
        }
        PlanOp::NHop { source, target, edges, n: hops, .. } => {
            format!("getnHop({}, {}, {edges}, {hops})", describe(plan, *source), describe(plan, *target))
        }
        op @ PlanOp::Tree { lhs, rhs, .. } => format!("{}({}, {})", op.name(), describe(plan, *lhs), describe(plan, *rhs)),
        other => other.name().to_string(),
    }
}
